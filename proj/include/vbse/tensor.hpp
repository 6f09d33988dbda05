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

// Index arithmetic for vectors over a tensor product of local spaces. The
// first site is the most significant index (row-major), matching Kronecker
// products built left to right.

#include <cstddef>
#include <span>
#include <vector>

#include "vbse/numerics.hpp"

namespace vbse {

using RowMajorComplexMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t product(std::span<const std::size_t> dims);

/// out = (I ⊗ op ⊗ I) in, where op acts on `site`. `op` may be rectangular:
/// its column count must equal dims[site], and the output has op.rows() there.
/// Zero entries of `op` are skipped.
ComplexVector apply_local(const ComplexVector& in, std::span<const std::size_t> dims,
                          std::size_t site, const ComplexMatrix& op);

/// In-place application of a square operator acting jointly on `sites`
/// (listed in the order of the operator's own tensor factors).
void apply_on_support(ComplexVector& state, std::span<const std::size_t> dims,
                      std::span<const std::size_t> sites, const ComplexMatrix& op);

/// Same as apply_on_support, applied to every column of a block whose rows
/// index the tensor product space. Only columns [0, active_cols) are touched.
void apply_on_support_block(RowMajorComplexMatrix& block, std::span<const std::size_t> dims,
                            std::span<const std::size_t> sites, const ComplexMatrix& op,
                            Eigen::Index active_cols);

/// rho_{ab} = sum_rest psi(a, rest) conj(psi(b, rest)) for the joint index of
/// `sites`; the usual reduced density matrix when psi is normalized.
ComplexMatrix reduced_matrix(const ComplexVector& psi, std::span<const std::size_t> dims,
                             std::span<const std::size_t> sites);

/// M_{ab} = sum_rest conj(bra(a, rest)) ket(b, rest) for a single site.
ComplexMatrix partial_overlap(const ComplexVector& bra, const ComplexVector& ket,
                              std::span<const std::size_t> dims, std::size_t site);

/// Reshapes psi into a (sites) x (rest) matrix.
ComplexMatrix bipartition_matrix(const ComplexVector& psi, std::span<const std::size_t> dims,
                                 std::span<const std::size_t> sites);

}  // namespace vbse
