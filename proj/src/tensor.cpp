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

#include "vbse/tensor.hpp"

#include <algorithm>
#include <numeric>

namespace vbse {

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

struct SupportLayout {
  std::vector<std::size_t> sub_offsets;   // one per joint index of the support
  std::vector<std::size_t> base_offsets;  // one per index of the complement
};

SupportLayout make_layout(std::span<const std::size_t> dims, std::span<const std::size_t> sites) {
  const std::size_t n = dims.size();
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * dims[i];

  std::vector<bool> in_support(n, false);
  for (std::size_t s : sites) {
    require(s < n, ErrorCode::index_out_of_range, "support site out of range");
    require(!in_support[s], ErrorCode::contract_violation, "support lists a site twice");
    in_support[s] = true;
  }

  SupportLayout layout;
  std::size_t sub_dim = 1;
  for (std::size_t s : sites) sub_dim *= dims[s];
  layout.sub_offsets.resize(sub_dim);
  for (std::size_t a = 0; a < sub_dim; ++a) {
    std::size_t rem = a;
    std::size_t off = 0;
    for (std::size_t k = sites.size(); k-- > 0;) {
      const std::size_t s = sites[k];
      off += (rem % dims[s]) * stride[s];
      rem /= dims[s];
    }
    layout.sub_offsets[a] = off;
  }

  std::vector<std::size_t> comp;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_support[i]) comp.push_back(i);
  }
  std::size_t comp_dim = 1;
  for (std::size_t c : comp) comp_dim *= dims[c];
  layout.base_offsets.resize(comp_dim);
  for (std::size_t r = 0; r < comp_dim; ++r) {
    std::size_t rem = r;
    std::size_t off = 0;
    for (std::size_t k = comp.size(); k-- > 0;) {
      const std::size_t c = comp[k];
      off += (rem % dims[c]) * stride[c];
      rem /= dims[c];
    }
    layout.base_offsets[r] = off;
  }
  return layout;
}

}  // namespace

ComplexVector apply_local(const ComplexVector& in, std::span<const std::size_t> dims,
                          std::size_t site, const ComplexMatrix& op) {
  require(site < dims.size(), ErrorCode::index_out_of_range, "apply_local: site out of range");
  require(static_cast<std::size_t>(op.cols()) == dims[site], ErrorCode::contract_violation,
          "apply_local: operator does not match the site dimension");
  require(static_cast<std::size_t>(in.size()) == product(dims), ErrorCode::contract_violation,
          "apply_local: vector length does not match dimensions");
  std::size_t left = 1;
  for (std::size_t i = 0; i < site; ++i) left *= dims[i];
  std::size_t right = 1;
  for (std::size_t i = site + 1; i < dims.size(); ++i) right *= dims[i];
  const std::size_t d_in = dims[site];
  const std::size_t d_out = static_cast<std::size_t>(op.rows());

  ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(left * d_out * right));
  for (std::size_t j = 0; j < d_in; ++j) {
    for (std::size_t i = 0; i < d_out; ++i) {
      const cplx v = op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v == cplx(0.0)) continue;
      for (std::size_t l = 0; l < left; ++l) {
        const cplx* src = in.data() + (l * d_in + j) * right;
        cplx* dst = out.data() + (l * d_out + i) * right;
        for (std::size_t r = 0; r < right; ++r) dst[r] += v * src[r];
      }
    }
  }
  return out;
}

void apply_on_support(ComplexVector& state, std::span<const std::size_t> dims,
                      std::span<const std::size_t> sites, const ComplexMatrix& op) {
  const SupportLayout layout = make_layout(dims, sites);
  const auto d = static_cast<Eigen::Index>(layout.sub_offsets.size());
  require(op.rows() == d && op.cols() == d, ErrorCode::contract_violation,
          "apply_on_support: operator does not match the support dimension");
  require(static_cast<std::size_t>(state.size()) == product(dims), ErrorCode::contract_violation,
          "apply_on_support: vector length does not match dimensions");
  ComplexVector local(d);
  ComplexVector mapped(d);
  for (std::size_t base : layout.base_offsets) {
    for (Eigen::Index a = 0; a < d; ++a) local(a) = state(base + layout.sub_offsets[a]);
    mapped.noalias() = op * local;
    for (Eigen::Index a = 0; a < d; ++a) state(base + layout.sub_offsets[a]) = mapped(a);
  }
}

void apply_on_support_block(RowMajorComplexMatrix& block, std::span<const std::size_t> dims,
                            std::span<const std::size_t> sites, const ComplexMatrix& op,
                            Eigen::Index active_cols) {
  const SupportLayout layout = make_layout(dims, sites);
  const auto d = static_cast<Eigen::Index>(layout.sub_offsets.size());
  require(op.rows() == d && op.cols() == d, ErrorCode::contract_violation,
          "apply_on_support_block: operator does not match the support dimension");
  require(static_cast<std::size_t>(block.rows()) == product(dims), ErrorCode::contract_violation,
          "apply_on_support_block: row count does not match dimensions");
  if (active_cols <= 0) return;
  RowMajorComplexMatrix local(d, active_cols);
  RowMajorComplexMatrix mapped(d, active_cols);
  for (std::size_t base : layout.base_offsets) {
    for (Eigen::Index a = 0; a < d; ++a) {
      local.row(a) = block.row(base + layout.sub_offsets[a]).head(active_cols);
    }
    mapped.noalias() = op * local;
    for (Eigen::Index a = 0; a < d; ++a) {
      block.row(base + layout.sub_offsets[a]).head(active_cols) = mapped.row(a);
    }
  }
}

ComplexMatrix bipartition_matrix(const ComplexVector& psi, std::span<const std::size_t> dims,
                                 std::span<const std::size_t> sites) {
  const SupportLayout layout = make_layout(dims, sites);
  require(static_cast<std::size_t>(psi.size()) == product(dims), ErrorCode::contract_violation,
          "bipartition_matrix: vector length does not match dimensions");
  const auto d = static_cast<Eigen::Index>(layout.sub_offsets.size());
  const auto rest = static_cast<Eigen::Index>(layout.base_offsets.size());
  ComplexMatrix x(d, rest);
  for (Eigen::Index r = 0; r < rest; ++r) {
    const std::size_t base = layout.base_offsets[static_cast<std::size_t>(r)];
    for (Eigen::Index a = 0; a < d; ++a) x(a, r) = psi(base + layout.sub_offsets[a]);
  }
  return x;
}

ComplexMatrix reduced_matrix(const ComplexVector& psi, std::span<const std::size_t> dims,
                             std::span<const std::size_t> sites) {
  const ComplexMatrix x = bipartition_matrix(psi, dims, sites);
  return x * x.adjoint();
}

ComplexMatrix partial_overlap(const ComplexVector& bra, const ComplexVector& ket,
                              std::span<const std::size_t> dims, std::size_t site) {
  const std::size_t sites[1] = {site};
  const ComplexMatrix xb = bipartition_matrix(bra, dims, sites);
  const ComplexMatrix xk = bipartition_matrix(ket, dims, sites);
  return xb.conjugate() * xk.transpose();
}

}  // namespace vbse
