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

#include "vbse/operators.hpp"

#include <algorithm>
#include <cmath>

#include "vbse/tensor.hpp"

namespace vbse {

const char* to_string(DofKind kind) {
  switch (kind) {
    case DofKind::electron_site: return "electron_site";
    case DofKind::spin: return "spin";
    case DofKind::phonon: return "phonon";
  }
  return "unknown";
}

DofKind dof_kind_from_string(std::string_view name) {
  if (name == "electron_site") return DofKind::electron_site;
  if (name == "spin") return DofKind::spin;
  if (name == "phonon") return DofKind::phonon;
  fail(ErrorCode::contract_violation, "unknown DOF kind '" + std::string(name) + "'");
}

const ComplexMatrix* ProductTerm::factor_for(std::size_t dof) const {
  for (const Factor& f : factors) {
    if (f.dof == dof) return &f.matrix;
  }
  return nullptr;
}

SumOfProducts::SumOfProducts(std::vector<DegreeOfFreedom> dofs) : dofs_(std::move(dofs)) {
  for (std::size_t i = 0; i < dofs_.size(); ++i) {
    require(dofs_[i].dim >= 2, ErrorCode::truncation,
            "DOF '" + dofs_[i].label + "' needs dimension >= 2");
    for (std::size_t j = 0; j < i; ++j) {
      require(dofs_[j].label != dofs_[i].label, ErrorCode::contract_violation,
              "duplicate DOF label '" + dofs_[i].label + "'");
    }
  }
}

std::optional<std::size_t> SumOfProducts::find(std::string_view label) const {
  for (std::size_t i = 0; i < dofs_.size(); ++i) {
    if (dofs_[i].label == label) return i;
  }
  return std::nullopt;
}

std::size_t SumOfProducts::index_of(std::string_view label) const {
  const auto i = find(label);
  require(i.has_value(), ErrorCode::contract_violation, "unknown DOF '" + std::string(label) + "'");
  return *i;
}

std::vector<std::size_t> SumOfProducts::dims() const {
  std::vector<std::size_t> d;
  d.reserve(dofs_.size());
  for (const auto& dof : dofs_) d.push_back(dof.dim);
  return d;
}

std::vector<std::size_t> SumOfProducts::row_dims() const {
  return row_dims_.empty() ? dims() : row_dims_;
}

void SumOfProducts::set_row_dims(std::vector<std::size_t> row_dims) {
  require(row_dims.size() == dofs_.size(), ErrorCode::contract_violation,
          "row dimension list does not match the DOF count");
  if (row_dims == dims()) {
    row_dims_.clear();
  } else {
    row_dims_ = std::move(row_dims);
  }
}

std::size_t SumOfProducts::total_dim() const {
  const auto d = dims();
  return product(d);
}

void SumOfProducts::add_term(cplx coefficient,
                             const std::vector<std::pair<std::string, ComplexMatrix>>& factors) {
  ProductTerm term;
  term.coefficient = coefficient;
  for (const auto& [label, m] : factors) term.factors.push_back({index_of(label), m});
  add_term(std::move(term));
}

void SumOfProducts::add_term(ProductTerm term) {
  std::sort(term.factors.begin(), term.factors.end(),
            [](const Factor& a, const Factor& b) { return a.dof < b.dof; });
  terms_.push_back(std::move(term));
  try {
    validate();
  } catch (...) {
    terms_.pop_back();
    throw;
  }
}

void SumOfProducts::validate() const {
  const auto cols = dims();
  const auto rows = row_dims();
  for (std::size_t x = 0; x < terms_.size(); ++x) {
    const ProductTerm& t = terms_[x];
    require(std::isfinite(t.coefficient.real()) && std::isfinite(t.coefficient.imag()),
            ErrorCode::contract_violation, "non-finite term coefficient");
    std::vector<bool> seen(dofs_.size(), false);
    for (const Factor& f : t.factors) {
      require(f.dof < dofs_.size(), ErrorCode::contract_violation, "factor DOF out of range");
      require(!seen[f.dof], ErrorCode::contract_violation,
              "term lists DOF '" + dofs_[f.dof].label + "' twice");
      seen[f.dof] = true;
      require(static_cast<std::size_t>(f.matrix.rows()) == rows[f.dof] &&
                  static_cast<std::size_t>(f.matrix.cols()) == cols[f.dof],
              ErrorCode::contract_violation,
              "factor on '" + dofs_[f.dof].label + "' has the wrong shape");
      require_finite(f.matrix, "factor matrix");
    }
    for (std::size_t k = 0; k < dofs_.size(); ++k) {
      require(seen[k] || rows[k] == cols[k], ErrorCode::contract_violation,
              "rectangular DOF '" + dofs_[k].label + "' needs an explicit factor in every term");
    }
  }
}

ComplexVector SumOfProducts::apply_term(std::size_t term, const ComplexVector& psi) const {
  require(term < terms_.size(), ErrorCode::index_out_of_range, "term index out of range");
  std::vector<std::size_t> current = dims();
  require(static_cast<std::size_t>(psi.size()) == product(current), ErrorCode::contract_violation,
          "state length does not match the operator");
  const ProductTerm& t = terms_[term];
  ComplexVector out = psi;
  for (const Factor& f : t.factors) {
    out = apply_local(out, current, f.dof, f.matrix);
    current[f.dof] = static_cast<std::size_t>(f.matrix.rows());
  }
  out *= t.coefficient;
  return out;
}

ComplexVector SumOfProducts::apply(const ComplexVector& psi) const {
  const auto rows = row_dims();
  ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(product(rows)));
  for (std::size_t x = 0; x < terms_.size(); ++x) out += apply_term(x, psi);
  return out;
}

// ---------------------------------------------------------------------------

ComplexMatrix boson_annihilation(std::size_t n_levels) {
  require(n_levels >= 2, ErrorCode::truncation, "boson truncation needs at least 2 levels");
  const auto n = static_cast<Eigen::Index>(n_levels);
  ComplexMatrix b = ComplexMatrix::Zero(n, n);
  for (Eigen::Index m = 1; m < n; ++m) b(m - 1, m) = std::sqrt(static_cast<double>(m));
  return b;
}

ComplexMatrix boson_creation(std::size_t n_levels) { return boson_annihilation(n_levels).adjoint(); }

ComplexMatrix boson_number(std::size_t n_levels) {
  require(n_levels >= 2, ErrorCode::truncation, "boson truncation needs at least 2 levels");
  const auto n = static_cast<Eigen::Index>(n_levels);
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) d(m, m) = static_cast<double>(m);
  return d;
}

ComplexMatrix pauli(PauliKind which) {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  switch (which) {
    case PauliKind::I: p(0, 0) = 1.0; p(1, 1) = 1.0; break;
    case PauliKind::X: p(0, 1) = 1.0; p(1, 0) = 1.0; break;
    case PauliKind::Y: p(0, 1) = -kI; p(1, 0) = kI; break;
    case PauliKind::Z: p(0, 0) = 1.0; p(1, 1) = -1.0; break;
  }
  return p;
}

ComplexMatrix pauli_string(std::string_view letters) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : letters) {
    PauliKind k{};
    switch (c) {
      case 'I': k = PauliKind::I; break;
      case 'X': k = PauliKind::X; break;
      case 'Y': k = PauliKind::Y; break;
      case 'Z': k = PauliKind::Z; break;
      default: fail(ErrorCode::contract_violation, std::string("bad Pauli letter '") + c + "'");
    }
    const ComplexMatrix p = pauli(k);
    // The new letter becomes the least significant factor.
    ComplexMatrix kron(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) kron.block(i * 2, j * 2, 2, 2) = out(i, j) * p;
    }
    out = std::move(kron);
  }
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix term_local_matrix(const ProductTerm& term, std::vector<std::size_t>& support) {
  support.clear();
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (const Factor& f : term.factors) {
    support.push_back(f.dof);
    m = kron(m, f.matrix);
  }
  return term.coefficient * m;
}

ComplexMatrix build_dense(const SumOfProducts& h) {
  const auto cols = h.dims();
  const auto rows = h.row_dims();
  const std::size_t nc = product(cols);
  const std::size_t nr = product(rows);
  constexpr std::size_t kDimCap = std::size_t{1} << 22;
  constexpr double kByteBudget = 2.0 * 1024 * 1024 * 1024;
  require(nc <= kDimCap && nr <= kDimCap, ErrorCode::resource,
          "dense build exceeds the 2^22 dimension cap");
  require(static_cast<double>(nc) * static_cast<double>(nr) * sizeof(cplx) <= kByteBudget,
          ErrorCode::resource, "dense build exceeds the memory budget");
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
  for (const ProductTerm& t : h.terms()) {
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const ComplexMatrix* f = t.factor_for(k);
      if (f != nullptr) {
        m = kron(m, *f);
      } else {
        m = kron(m, ComplexMatrix::Identity(static_cast<Eigen::Index>(cols[k]),
                                            static_cast<Eigen::Index>(cols[k])));
      }
    }
    out += t.coefficient * m;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t gray_code(std::size_t m) { return m ^ (m >> 1); }

std::string gray_index(std::size_t m, std::size_t n_qubits) {
  require(n_qubits < 63 && m < (std::size_t{1} << n_qubits), ErrorCode::index_out_of_range,
          "Gray code index out of range");
  const std::size_t g = gray_code(m);
  std::string bits(n_qubits, '0');
  for (std::size_t i = 0; i < n_qubits; ++i) {
    if ((g >> (n_qubits - 1 - i)) & 1U) bits[i] = '1';
  }
  return bits;
}

ComplexMatrix binary_encode_operator(const ComplexMatrix& op, std::size_t n_qubits) {
  require(op.rows() == op.cols(), ErrorCode::contract_violation, "operator must be square");
  require(n_qubits < 31, ErrorCode::capacity, "too many qubits");
  const auto q = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  require(op.rows() <= q, ErrorCode::capacity, "operator has more levels than the qubit register");
  ComplexMatrix out = ComplexMatrix::Zero(q, q);
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    for (Eigen::Index j = 0; j < op.cols(); ++j) {
      out(static_cast<Eigen::Index>(gray_code(static_cast<std::size_t>(i))),
          static_cast<Eigen::Index>(gray_code(static_cast<std::size_t>(j)))) = op(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TermwiseOperator::TermwiseOperator(const SumOfProducts& h) : dims_(h.dims()) {
  require(h.is_square(), ErrorCode::contract_violation, "termwise operator must be square");
  dim_ = product(dims_);
  const std::size_t n = dims_.size();
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * dims_[i];

  ComplexVector diag = ComplexVector::Zero(static_cast<Eigen::Index>(dim_));
  for (const ProductTerm& t : h.terms()) {
    if (t.coefficient == cplx(0.0)) continue;
    bool diagonal = true;
    bool zero = false;
    for (const Factor& f : t.factors) {
      const ComplexMatrix off = f.matrix - ComplexMatrix(f.matrix.diagonal().asDiagonal());
      if (off.cwiseAbs().maxCoeff() != 0.0) diagonal = false;
      if (f.matrix.cwiseAbs().maxCoeff() == 0.0) zero = true;
    }
    if (zero) continue;
    if (!diagonal) {
      offdiagonal_.push_back(t);
      continue;
    }
    has_diagonal_ = true;
    // Kronecker product of the factor diagonals, identity elsewhere.
    ComplexVector d = ComplexVector::Constant(1, t.coefficient);
    for (std::size_t k = 0; k < n; ++k) {
      const ComplexMatrix* f = t.factor_for(k);
      const auto dk = static_cast<Eigen::Index>(dims_[k]);
      ComplexVector next(d.size() * dk);
      for (Eigen::Index a = 0; a < d.size(); ++a) {
        for (Eigen::Index b = 0; b < dk; ++b) next(a * dk + b) = d(a) * (f ? (*f)(b, b) : cplx(1.0));
      }
      d = std::move(next);
    }
    diag += d;
  }
  if (has_diagonal_) {
    require(diag.imag().cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, diag.cwiseAbs().maxCoeff()),
            ErrorCode::hermiticity, "diagonal part of the operator is not real");
    diagonal_ = diag.real();
  }
}

ComplexVector TermwiseOperator::apply(const ComplexVector& psi) const {
  require(static_cast<std::size_t>(psi.size()) == dim_, ErrorCode::contract_violation,
          "state length does not match the operator");
  ComplexVector out = has_diagonal_ ? ComplexVector(diagonal_.cast<cplx>().cwiseProduct(psi))
                                    : ComplexVector(ComplexVector::Zero(psi.size()));
  for (const ProductTerm& t : offdiagonal_) {
    ComplexVector v = psi;
    for (const Factor& f : t.factors) v = apply_local(v, dims_, f.dof, f.matrix);
    out += t.coefficient * v;
  }
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  require(j.is_array() && !j.empty() && j[0].is_array(), ErrorCode::contract_violation,
          "matrix must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
            ErrorCode::contract_violation, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = row[static_cast<std::size_t>(c)];
      require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
              ErrorCode::contract_violation, "matrix entries must be [re, im] pairs");
      m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

nlohmann::json to_json(const SumOfProducts& h) {
  nlohmann::json out;
  out["dofs"] = nlohmann::json::array();
  for (const auto& d : h.dofs()) {
    out["dofs"].push_back({{"label", d.label}, {"kind", to_string(d.kind)}, {"dim", d.dim}});
  }
  if (!h.is_square()) out["row_dims"] = h.row_dims();
  out["terms"] = nlohmann::json::array();
  for (const ProductTerm& t : h.terms()) {
    nlohmann::json term;
    term["coeff"] = {t.coefficient.real(), t.coefficient.imag()};
    term["factors"] = nlohmann::json::object();
    for (const Factor& f : t.factors) term["factors"][h.dofs()[f.dof].label] = matrix_to_json(f.matrix);
    out["terms"].push_back(std::move(term));
  }
  return out;
}

SumOfProducts sum_of_products_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("dofs") && j.contains("terms"), ErrorCode::contract_violation,
          "operator JSON needs 'dofs' and 'terms'");
  std::vector<DegreeOfFreedom> dofs;
  for (const auto& d : j.at("dofs")) {
    dofs.push_back({d.at("label").get<std::string>(),
                    dof_kind_from_string(d.at("kind").get<std::string>()),
                    d.at("dim").get<std::size_t>()});
  }
  SumOfProducts h(std::move(dofs));
  if (j.contains("row_dims")) h.set_row_dims(j.at("row_dims").get<std::vector<std::size_t>>());
  for (const auto& t : j.at("terms")) {
    const auto& c = t.at("coeff");
    ProductTerm term;
    term.coefficient = cplx(c.at(0).get<double>(), c.at(1).get<double>());
    for (const auto& [label, m] : t.at("factors").items()) {
      term.factors.push_back({h.index_of(label), matrix_from_json(m)});
    }
    h.add_term(std::move(term));
  }
  return h;
}

}  // namespace vbse
