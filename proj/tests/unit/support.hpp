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

// Independent dense oracles and seeded random instances for the unit tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vbse/circuits.hpp"
#include "vbse/encoder.hpp"
#include "vbse/operators.hpp"

namespace vbse::testing {

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  }
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const ComplexMatrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

inline ComplexVector random_vector(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, 1).col(0).normalized();
}

/// Orthonormal columns from a Householder QR of a Gaussian matrix.
inline ComplexMatrix random_isometry(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(rng, rows, cols));
  return qr.householderQ() * ComplexMatrix::Identity(rows, cols);
}

inline HybridState random_state(std::mt19937_64& rng, const std::vector<DegreeOfFreedom>& dofs) {
  std::size_t dim = 1;
  for (const auto& d : dofs) dim *= d.dim;
  return make_state(dofs, random_vector(rng, static_cast<Eigen::Index>(dim)));
}

/// Kronecker product written out elementwise (first factor most significant).
inline ComplexMatrix kron_oracle(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index k = 0; k < b.rows(); ++k) {
        for (Eigen::Index l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
        }
      }
    }
  }
  return out;
}

inline ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron_oracle(out, f);
  return out;
}

/// Dense matrix of a sum of products assembled term by term from kron_oracle.
inline ComplexMatrix dense_oracle(const SumOfProducts& h) {
  const auto& dofs = h.dofs();
  std::vector<std::size_t> rows = h.is_square() ? h.dims() : h.row_dims();
  const std::vector<std::size_t> cols = h.dims();
  ComplexMatrix total;
  for (const auto& term : h.terms()) {
    std::vector<ComplexMatrix> factors;
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const ComplexMatrix* f = term.factor_for(k);
      factors.push_back(f != nullptr ? *f
                                     : ComplexMatrix::Identity(static_cast<Eigen::Index>(rows[k]),
                                                               static_cast<Eigen::Index>(cols[k])));
    }
    const ComplexMatrix m = term.coefficient * kron_all(factors);
    if (total.size() == 0) total = ComplexMatrix::Zero(m.rows(), m.cols());
    total += m;
  }
  return total;
}

/// Tensor product of the encoder isometries (identity where a DOF has none).
inline ComplexMatrix encoder_product(const std::vector<DegreeOfFreedom>& dofs, const EncoderSet& encs,
                                     const std::string& skip = {}) {
  std::vector<ComplexMatrix> factors;
  for (const auto& d : dofs) {
    const auto it = encs.find(d.label);
    if (it != encs.end() && d.label != skip) {
      factors.push_back(it->second.c);
    } else {
      factors.push_back(ComplexMatrix::Identity(static_cast<Eigen::Index>(d.dim),
                                                static_cast<Eigen::Index>(d.dim)));
    }
  }
  return kron_all(factors);
}

/// Matrix exponential through the eigenbasis of a normal matrix i*A with A
/// Hermitian, or directly for Hermitian A: exp(s A).
inline ComplexMatrix exp_hermitian(const ComplexMatrix& a, cplx s) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(a);
  ComplexVector d(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(s * eig.eigenvalues()(i));
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace vbse::testing
