// Copyright 2026 The VBSE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vbse/numerics.hpp"

namespace vbse {

enum class DofKind { electron_site, spin, phonon };

const char* to_string(DofKind kind);
DofKind dof_kind_from_string(std::string_view name);

struct DegreeOfFreedom {
  std::string label;
  DofKind kind = DofKind::phonon;
  std::size_t dim = 2;

  bool operator==(const DegreeOfFreedom&) const = default;
};

/// One local factor of a product term, keyed by the position of its DOF.
struct Factor {
  std::size_t dof = 0;
  ComplexMatrix matrix;
};

/// coefficient * prod_k factor_k; DOFs without a factor carry the identity.
/// Factors are kept sorted by DOF position.
struct ProductTerm {
  cplx coefficient{1.0, 0.0};
  std::vector<Factor> factors;

  const ComplexMatrix* factor_for(std::size_t dof) const;
};

/// Sum of product terms over an ordered list of DOFs. `row_dims` is empty for
/// square operators; a half-encoded operator sets it so one DOF maps between
/// spaces of different size (every term then carries an explicit factor there).
class SumOfProducts {
 public:
  SumOfProducts() = default;
  explicit SumOfProducts(std::vector<DegreeOfFreedom> dofs);

  const std::vector<DegreeOfFreedom>& dofs() const { return dofs_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }
  std::vector<ProductTerm>& mutable_terms() { return terms_; }

  std::size_t index_of(std::string_view label) const;
  std::optional<std::size_t> find(std::string_view label) const;

  /// Column (ket side) dimensions.
  std::vector<std::size_t> dims() const;
  /// Row (bra side) dimensions; equal to dims() for square operators.
  std::vector<std::size_t> row_dims() const;
  bool is_square() const { return row_dims_.empty(); }
  void set_row_dims(std::vector<std::size_t> row_dims);

  std::size_t total_dim() const;

  /// Adds coefficient * prod factors; factors are given by DOF label.
  void add_term(cplx coefficient,
                const std::vector<std::pair<std::string, ComplexMatrix>>& factors);
  void add_term(ProductTerm term);

  /// Throws contract_violation when a factor has the wrong shape or a DOF
  /// appears twice in one term.
  void validate() const;

  /// Applies a single term to a vector over dims().
  ComplexVector apply_term(std::size_t term, const ComplexVector& psi) const;
  /// Applies the whole sum.
  ComplexVector apply(const ComplexVector& psi) const;

 private:
  std::vector<DegreeOfFreedom> dofs_;
  std::vector<ProductTerm> terms_;
  std::vector<std::size_t> row_dims_;
};

// ---------------------------------------------------------------------------
// Local operators.

/// b with b|m> = sqrt(m)|m-1>.
ComplexMatrix boson_annihilation(std::size_t n_levels);
ComplexMatrix boson_creation(std::size_t n_levels);
ComplexMatrix boson_number(std::size_t n_levels);

enum class PauliKind { I, X, Y, Z };
ComplexMatrix pauli(PauliKind which);

/// Kronecker product of Pauli letters, first letter most significant.
ComplexMatrix pauli_string(std::string_view letters);

/// coefficient * (kron of the term's factors) on the DOFs it touches, listed
/// in `support` in declaration order. A term without factors yields a 1x1
/// matrix and an empty support.
ComplexMatrix term_local_matrix(const ProductTerm& term, std::vector<std::size_t>& support);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Dense realization; resource error beyond 2^22 total dimension or when the
/// matrix would not fit in a 2 GiB budget.
ComplexMatrix build_dense(const SumOfProducts& h);

// ---------------------------------------------------------------------------
// Binary (Gray code) encoding.

std::size_t gray_code(std::size_t m);
/// Bitstring of the m-th Gray code word, most significant bit first.
std::string gray_index(std::size_t m, std::size_t n_qubits);

/// Relabels an N x N operator onto n_qubits qubits with basis state m sent to
/// computational basis state gray(m); unused states are zero.
ComplexMatrix binary_encode_operator(const ComplexMatrix& op, std::size_t n_qubits);

// ---------------------------------------------------------------------------
// Matrix-free application tuned for repeated products (oracles).

class TermwiseOperator {
 public:
  explicit TermwiseOperator(const SumOfProducts& h);

  std::size_t dim() const { return dim_; }
  ComplexVector apply(const ComplexVector& psi) const;

 private:
  std::vector<std::size_t> dims_;
  std::size_t dim_ = 0;
  RealVector diagonal_;
  bool has_diagonal_ = false;
  std::vector<ProductTerm> offdiagonal_;
};

// ---------------------------------------------------------------------------
// JSON.

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SumOfProducts& h);
SumOfProducts sum_of_products_from_json(const nlohmann::json& j);

}  // namespace vbse
