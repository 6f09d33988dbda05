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

// Basis state encoders: isometries C (N levels x 2^n qubit states) that
// compress a phonon mode, plus the tables needed to optimize and propagate
// them. The encoded operator of h is C^dagger h C.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vbse/circuits.hpp"
#include "vbse/operators.hpp"

namespace vbse {

struct BasisEncoder {
  std::string label;
  std::size_t n_levels = 0;
  std::size_t n_qubits = 0;
  ComplexMatrix c;  // n_levels x 2^n_qubits, orthonormal columns

  std::size_t encoded_dim() const { return std::size_t{1} << n_qubits; }
};

/// Checks shape and ||C^dagger C - I||_inf < tol.
void check_encoder(const BasisEncoder& enc, double tol = 1e-10);

double orthonormality_defect(const ComplexMatrix& c);

/// Encoders keyed by DOF label. A phonon DOF without an entry keeps its full
/// space (dummy identity encoder).
using EncoderSet = std::map<std::string, BasisEncoder>;

/// C_{mn} = delta_{mn}; capacity error when 2^n_qubits exceeds the DOF dimension.
BasisEncoder identity_encoder(const DegreeOfFreedom& dof, std::size_t n_qubits);

/// Binary baseline: C_{m, gray(m)} = 1, requires N = 2^n_qubits.
BasisEncoder gray_encoder(const DegreeOfFreedom& dof, std::size_t n_qubits);

/// Same encoder on a larger truncation: the new rows are zero, so every
/// encoded operator is unchanged.
BasisEncoder embed_encoder(const BasisEncoder& enc, std::size_t n_levels);

/// P = C C^dagger.
ComplexMatrix projector(const BasisEncoder& enc);

/// C^dagger h C.
ComplexMatrix encode_local_operator(const ComplexMatrix& op, const BasisEncoder& enc);

/// Encodes every factor on an encoded DOF; encoded DOFs take dimension 2^n.
SumOfProducts encode_hamiltonian(const SumOfProducts& h, const EncoderSet& encs);

/// Encodes all modes except `label` on the bra side: that mode keeps N rows
/// and 2^n columns, with factor h C (or C where the term has no factor).
SumOfProducts half_encoded_hamiltonian(const SumOfProducts& h, const EncoderSet& encs,
                                       const std::string& label);

/// J[x]_{n n'} = sum_rest conj(phi(n, rest)) (coef_x prod_{k != l} h~[k]_x phi)(n', rest),
/// one K x K matrix per term of h.
struct MeasurementTables {
  std::string label;
  std::vector<ComplexMatrix> j;
};

MeasurementTables compute_j_table(const HybridState& state, const SumOfProducts& h,
                                  const EncoderSet& encs, const std::string& label);

/// G = sum_x h[l]_x C J[x]^T (N x 2^n).
ComplexMatrix compute_g_matrix(const MeasurementTables& tables, const SumOfProducts& h,
                               const BasisEncoder& enc);

/// Tables grouped for repeated G evaluation at varying C with the state and
/// the other encoders fixed: terms with a factor on the mode keep their own
/// J, all remaining terms are summed into one table.
struct CompactTables {
  std::vector<ComplexMatrix> local;  // bare factor on the mode
  std::vector<ComplexMatrix> j;
  ComplexMatrix j_rest;
};

/// `h_encoded` must be encode_hamiltonian(h, encs) for the current encoders.
CompactTables compact_tables(const HybridState& state, const SumOfProducts& h,
                             const SumOfProducts& h_encoded, std::size_t dof);
ComplexMatrix g_from_tables(const CompactTables& tables, const ComplexMatrix& c);

/// (1 - C C^dagger) G.
ComplexMatrix static_residual(const ComplexMatrix& g, const BasisEncoder& enc);

enum class EncoderField { real, complex };

struct EncoderSolveOptions {
  double tol = 1e-8;
  EncoderField field = EncoderField::real;
  std::uint64_t seed = 0;
  double noise_sigma = 0.1;
  /// Labels solved jointly with one shared encoder (empty: just `label`).
  std::vector<std::string> shared_labels;
};

struct EncoderSolveResult {
  BasisEncoder encoder;
  double energy = 0.0;        // <phi|H~|phi> with the new encoder
  double residual_inf = 0.0;  // ||(1 - P) G||_inf at the returned encoder
  int guess = -1;             // 0 current, 1 identity, 2 perturbed
  bool converged = false;
};

/// Raised when no initial guess reaches the tolerance; carries the best one.
class EncoderSolveError : public Error {
 public:
  EncoderSolveError(const std::string& message, EncoderSolveResult best)
      : Error(ErrorCode::convergence, message), best_(std::move(best)) {}
  const EncoderSolveResult& best() const noexcept { return best_; }

 private:
  EncoderSolveResult best_;
};

/// Solves (1 - P) G(C) = 0 for mode `label` with the state held fixed, from
/// three initial guesses, and keeps the converged root of lowest energy.
/// A complete basis (N = 2^n) is returned unchanged.
EncoderSolveResult solve_encoder(const HybridState& state, const SumOfProducts& h,
                                 const EncoderSet& encs, const std::string& label,
                                 const EncoderSolveOptions& options = {});

/// Diagonal shift applied to the reduced density matrix before inversion.
inline constexpr double kRhoRegularization = 1e-5;

/// dC/dt = -i (1 - P) G (rho + 1e-5 I)^{-1}; rho is the reduced density
/// matrix of the encoded mode. State-corruption error when rho is not PSD.
ComplexMatrix encoder_eom_rhs(const HybridState& state, const SumOfProducts& h,
                              const EncoderSet& encs, const std::string& label,
                              const ComplexMatrix& rho);

/// Same from a precomputed G.
ComplexMatrix encoder_velocity(const ComplexMatrix& g, const BasisEncoder& enc,
                               const ComplexMatrix& rho);

nlohmann::json to_json(const BasisEncoder& enc);
BasisEncoder basis_encoder_from_json(const nlohmann::json& j);

}  // namespace vbse
