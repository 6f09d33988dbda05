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

#include "vbse/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "vbse/tensor.hpp"

namespace vbse {

double orthonormality_defect(const ComplexMatrix& c) {
  const ComplexMatrix gram = c.adjoint() * c;
  return max_abs(gram - ComplexMatrix::Identity(gram.rows(), gram.cols()));
}

void check_encoder(const BasisEncoder& enc, double tol) {
  require(enc.n_qubits < 20, ErrorCode::capacity, "encoder qubit count too large");
  require(enc.n_levels >= enc.encoded_dim(), ErrorCode::capacity,
          "encoder '" + enc.label + "' has fewer levels than qubit basis states");
  require(static_cast<std::size_t>(enc.c.rows()) == enc.n_levels &&
              static_cast<std::size_t>(enc.c.cols()) == enc.encoded_dim(),
          ErrorCode::contract_violation, "encoder '" + enc.label + "' has the wrong shape");
  require_finite(enc.c, "encoder matrix");
  require(orthonormality_defect(enc.c) < tol, ErrorCode::contract_violation,
          "encoder '" + enc.label + "' columns are not orthonormal");
}

BasisEncoder identity_encoder(const DegreeOfFreedom& dof, std::size_t n_qubits) {
  require(n_qubits >= 1 && n_qubits < 20, ErrorCode::capacity, "qubit count out of range");
  const std::size_t k = std::size_t{1} << n_qubits;
  require(dof.dim >= k, ErrorCode::capacity,
          "'" + dof.label + "' has fewer levels than 2^n_qubits");
  BasisEncoder enc{dof.label, dof.dim, n_qubits,
                   ComplexMatrix::Identity(static_cast<Eigen::Index>(dof.dim), static_cast<Eigen::Index>(k))};
  return enc;
}

BasisEncoder gray_encoder(const DegreeOfFreedom& dof, std::size_t n_qubits) {
  BasisEncoder enc = identity_encoder(dof, n_qubits);
  require(dof.dim == enc.encoded_dim(), ErrorCode::capacity,
          "binary encoding needs exactly 2^n_qubits levels");
  enc.c.setZero();
  for (std::size_t m = 0; m < dof.dim; ++m) {
    enc.c(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(gray_code(m))) = 1.0;
  }
  return enc;
}

BasisEncoder embed_encoder(const BasisEncoder& enc, std::size_t n_levels) {
  require(n_levels >= enc.n_levels, ErrorCode::contract_violation,
          "embedding cannot drop levels");
  BasisEncoder out = enc;
  out.n_levels = n_levels;
  out.c = ComplexMatrix::Zero(static_cast<Eigen::Index>(n_levels), enc.c.cols());
  out.c.topRows(enc.c.rows()) = enc.c;
  return out;
}

ComplexMatrix projector(const BasisEncoder& enc) { return enc.c * enc.c.adjoint(); }

ComplexMatrix encode_local_operator(const ComplexMatrix& op, const BasisEncoder& enc) {
  require(op.rows() == enc.c.rows() && op.cols() == enc.c.rows(), ErrorCode::contract_violation,
          "operator does not act on the encoder's mode");
  return enc.c.adjoint() * op * enc.c;
}

namespace {

const BasisEncoder* encoder_for(const EncoderSet& encs, const DegreeOfFreedom& dof) {
  const auto it = encs.find(dof.label);
  if (it == encs.end()) return nullptr;
  require(dof.kind == DofKind::phonon, ErrorCode::contract_violation,
          "only phonon DOFs can be encoded ('" + dof.label + "')");
  require(it->second.n_levels == dof.dim, ErrorCode::contract_violation,
          "encoder '" + dof.label + "' does not match the mode truncation");
  return &it->second;
}

void check_labels(const SumOfProducts& h, const EncoderSet& encs) {
  for (const auto& [label, enc] : encs) {
    require(h.find(label).has_value(), ErrorCode::contract_violation,
            "encoder '" + label + "' has no matching DOF");
    require(enc.label == label, ErrorCode::contract_violation, "encoder label mismatch");
  }
}

}  // namespace

SumOfProducts encode_hamiltonian(const SumOfProducts& h, const EncoderSet& encs) {
  require(h.is_square(), ErrorCode::contract_violation, "can only encode square operators");
  check_labels(h, encs);
  std::vector<DegreeOfFreedom> dofs = h.dofs();
  std::vector<const BasisEncoder*> per_dof(dofs.size(), nullptr);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    per_dof[k] = encoder_for(encs, dofs[k]);
    if (per_dof[k] != nullptr) dofs[k].dim = per_dof[k]->encoded_dim();
  }
  SumOfProducts out(std::move(dofs));
  for (const ProductTerm& t : h.terms()) {
    ProductTerm e;
    e.coefficient = t.coefficient;
    for (const Factor& f : t.factors) {
      const BasisEncoder* enc = per_dof[f.dof];
      e.factors.push_back({f.dof, enc ? encode_local_operator(f.matrix, *enc) : f.matrix});
    }
    out.add_term(std::move(e));
  }
  return out;
}

SumOfProducts half_encoded_hamiltonian(const SumOfProducts& h, const EncoderSet& encs,
                                       const std::string& label) {
  const std::size_t l = h.index_of(label);
  require(encs.count(label) == 1, ErrorCode::contract_violation,
          "mode '" + label + "' is not encoded");
  const BasisEncoder& enc = encs.at(label);
  SumOfProducts full = encode_hamiltonian(h, encs);
  std::vector<std::size_t> rows = full.dims();
  rows[l] = enc.n_levels;
  SumOfProducts out(full.dofs());
  out.set_row_dims(rows);
  for (std::size_t x = 0; x < h.terms().size(); ++x) {
    ProductTerm e;
    e.coefficient = full.terms()[x].coefficient;
    bool placed = false;
    for (const Factor& f : full.terms()[x].factors) {
      if (f.dof == l) {
        const ComplexMatrix* bare = h.terms()[x].factor_for(l);
        e.factors.push_back({l, (*bare) * enc.c});
        placed = true;
      } else {
        e.factors.push_back(f);
      }
    }
    if (!placed) e.factors.push_back({l, enc.c});
    out.add_term(std::move(e));
  }
  return out;
}

MeasurementTables compute_j_table(const HybridState& state, const SumOfProducts& h,
                                  const EncoderSet& encs, const std::string& label) {
  const std::size_t l = h.index_of(label);
  require(encs.count(label) == 1, ErrorCode::contract_violation,
          "mode '" + label + "' is not encoded");
  const SumOfProducts he = encode_hamiltonian(h, encs);
  const auto dims = he.dims();
  require(state.dims() == dims, ErrorCode::contract_violation,
          "state does not live in the encoded space");
  MeasurementTables out;
  out.label = label;
  for (const ProductTerm& t : he.terms()) {
    ComplexVector v = state.amplitudes;
    for (const Factor& f : t.factors) {
      if (f.dof != l) v = apply_local(v, dims, f.dof, f.matrix);
    }
    v *= t.coefficient;
    out.j.push_back(partial_overlap(state.amplitudes, v, dims, l));
  }
  return out;
}

ComplexMatrix compute_g_matrix(const MeasurementTables& tables, const SumOfProducts& h,
                               const BasisEncoder& enc) {
  require(tables.label == enc.label, ErrorCode::contract_violation, "table/encoder mode mismatch");
  require(tables.j.size() == h.terms().size(), ErrorCode::contract_violation,
          "table count does not match the term count");
  const std::size_t l = h.index_of(enc.label);
  const auto k = static_cast<Eigen::Index>(enc.encoded_dim());
  ComplexMatrix g = ComplexMatrix::Zero(enc.c.rows(), enc.c.cols());
  for (std::size_t x = 0; x < tables.j.size(); ++x) {
    require(tables.j[x].rows() == k && tables.j[x].cols() == k, ErrorCode::contract_violation,
            "table entry has the wrong shape");
    const ComplexMatrix* f = h.terms()[x].factor_for(l);
    if (f != nullptr) {
      g.noalias() += (*f) * enc.c * tables.j[x].transpose();
    } else {
      g.noalias() += enc.c * tables.j[x].transpose();
    }
  }
  return g;
}

CompactTables compact_tables(const HybridState& state, const SumOfProducts& h,
                             const SumOfProducts& h_encoded, std::size_t dof) {
  const auto dims = h_encoded.dims();
  require(state.dims() == dims, ErrorCode::contract_violation,
          "state does not live in the encoded space");
  require(h.terms().size() == h_encoded.terms().size(), ErrorCode::contract_violation,
          "encoded operator does not match the bare operator");
  CompactTables out;
  ComplexVector rest = ComplexVector::Zero(state.amplitudes.size());
  for (std::size_t x = 0; x < h.terms().size(); ++x) {
    const ProductTerm& t = h_encoded.terms()[x];
    if (t.coefficient == cplx(0.0)) continue;
    ComplexVector v = state.amplitudes;
    for (const Factor& f : t.factors) {
      if (f.dof != dof) v = apply_local(v, dims, f.dof, f.matrix);
    }
    v *= t.coefficient;
    const ComplexMatrix* bare = h.terms()[x].factor_for(dof);
    if (bare != nullptr) {
      out.local.push_back(*bare);
      out.j.push_back(partial_overlap(state.amplitudes, v, dims, dof));
    } else {
      rest += v;
    }
  }
  out.j_rest = partial_overlap(state.amplitudes, rest, dims, dof);
  return out;
}

ComplexMatrix g_from_tables(const CompactTables& tables, const ComplexMatrix& c) {
  ComplexMatrix g = c * tables.j_rest.transpose();
  for (std::size_t x = 0; x < tables.local.size(); ++x) {
    g.noalias() += tables.local[x] * c * tables.j[x].transpose();
  }
  return g;
}

ComplexMatrix static_residual(const ComplexMatrix& g, const BasisEncoder& enc) {
  require(g.rows() == enc.c.rows() && g.cols() == enc.c.cols(), ErrorCode::contract_violation,
          "G does not match the encoder shape");
  return g - enc.c * (enc.c.adjoint() * g);
}

// ---------------------------------------------------------------------------

namespace {

struct SolveContext {
  std::vector<CompactTables> tables;  // one per jointly solved mode
  ComplexMatrix preconditioner;       // (rho + delta I)^{-1}
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  EncoderField field = EncoderField::real;

  Eigen::Index unknowns() const {
    return rows * cols * (field == EncoderField::complex ? 2 : 1);
  }

  ComplexMatrix unpack(const RealVector& x) const {
    ComplexMatrix c(rows, cols);
    const Eigen::Index n = rows * cols;
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index p = j * rows + i;
        c(i, j) = cplx(x(p), field == EncoderField::complex ? x(n + p) : 0.0);
      }
    }
    return c;
  }

  RealVector pack(const ComplexMatrix& c) const {
    RealVector x(unknowns());
    const Eigen::Index n = rows * cols;
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index p = j * rows + i;
        x(p) = c(i, j).real();
        if (field == EncoderField::complex) x(n + p) = c(i, j).imag();
      }
    }
    return x;
  }

  ComplexMatrix g(const ComplexMatrix& c) const {
    ComplexMatrix total = ComplexMatrix::Zero(rows, cols);
    for (const auto& t : tables) total += g_from_tables(t, c);
    return total;
  }

  ComplexMatrix residual(const ComplexMatrix& q) const {
    const ComplexMatrix gq = g(q);
    return gq - q * (q.adjoint() * gq);
  }

  ComplexMatrix preconditioned(const ComplexMatrix& q) const { return residual(q) * preconditioner; }
};

double energy_for(const HybridState& state, const SumOfProducts& h, EncoderSet encs,
                  const std::vector<std::string>& labels, const ComplexMatrix& c) {
  for (const auto& label : labels) encs.at(label).c = c;
  return expectation(state, encode_hamiltonian(h, encs));
}

}  // namespace

EncoderSolveResult solve_encoder(const HybridState& state, const SumOfProducts& h,
                                 const EncoderSet& encs, const std::string& label,
                                 const EncoderSolveOptions& options) {
  require(encs.count(label) == 1, ErrorCode::contract_violation,
          "mode '" + label + "' is not encoded");
  const BasisEncoder& current = encs.at(label);
  check_encoder(current);
  std::vector<std::string> labels = options.shared_labels;
  if (labels.empty()) labels.push_back(label);
  require(std::find(labels.begin(), labels.end(), label) != labels.end(),
          ErrorCode::contract_violation, "shared label list must contain the solved mode");
  for (const auto& other : labels) {
    require(encs.count(other) == 1, ErrorCode::contract_violation,
            "shared mode '" + other + "' is not encoded");
    require(max_abs(encs.at(other).c - current.c) <= 1e-12, ErrorCode::contract_violation,
            "shared modes must start from the same encoder");
  }

  const SumOfProducts he = encode_hamiltonian(h, encs);
  const double current_energy = expectation(state, he);
  if (current.n_levels == current.encoded_dim()) {
    return {current, current_energy, 0.0, 0, true};
  }

  SolveContext ctx;
  ctx.rows = current.c.rows();
  ctx.cols = current.c.cols();
  ctx.field = options.field;
  ComplexMatrix rho = ComplexMatrix::Zero(ctx.cols, ctx.cols);
  for (const auto& other : labels) {
    ctx.tables.push_back(compact_tables(state, h, he, h.index_of(other)));
    rho += reduced_density_matrix(state, other);
  }
  rho /= static_cast<double>(labels.size());
  // G carries the reduced density matrix as a right factor, so weakly
  // populated encoded states make the plain residual badly scaled.
  ctx.preconditioner = (0.5 * (rho + rho.adjoint()) +
                        kRhoRegularization * ComplexMatrix::Identity(ctx.cols, ctx.cols))
                           .inverse();
  if (options.field == EncoderField::real) {
    ctx.preconditioner = ctx.preconditioner.real().cast<cplx>();
  }

  const ResidualFunction residual = [&ctx](const RealVector& x) -> RealVector {
    ComplexMatrix q;
    try {
      q = qr_orthonormalize(ctx.unpack(x));
    } catch (const Error&) {
      return RealVector::Constant(x.size(), 1e6);
    }
    return ctx.pack(ctx.preconditioned(q));
  };
  // ||R||_inf <= K ||R rho^{-1}||_inf because rho has unit trace.
  const double inner_tol = options.tol / static_cast<double>(ctx.cols);

  ComplexMatrix start_current = current.c;
  if (options.field == EncoderField::real) start_current = start_current.real().cast<cplx>();
  std::vector<ComplexMatrix> guesses;
  guesses.push_back(start_current);
  guesses.push_back(ComplexMatrix::Identity(ctx.rows, ctx.cols));
  {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, options.noise_sigma);
    ComplexMatrix perturbed = start_current;
    for (Eigen::Index j = 0; j < ctx.cols; ++j) {
      for (Eigen::Index i = 0; i < ctx.rows; ++i) {
        const double re = noise(rng);
        const double im = options.field == EncoderField::complex ? noise(rng) : 0.0;
        perturbed(i, j) += cplx(re, im);
      }
    }
    guesses.push_back(qr_orthonormalize(perturbed));
  }

  std::optional<EncoderSolveResult> best_converged;
  EncoderSolveResult best_any;
  best_any.residual_inf = std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < guesses.size(); ++gi) {
    const RootReport report = solve_nonlinear(residual, ctx.pack(guesses[gi]), inner_tol);
    ComplexMatrix q;
    try {
      q = qr_orthonormalize(ctx.unpack(report.x));
    } catch (const Error&) {
      continue;
    }
    EncoderSolveResult r;
    r.encoder = current;
    r.encoder.c = q;
    r.residual_inf = max_abs(ctx.residual(q));
    r.converged = r.residual_inf <= options.tol;
    r.guess = static_cast<int>(gi);
    if (labels.size() == 1) {
      r.energy = (q.adjoint() * ctx.g(q)).trace().real();
    } else {
      r.energy = energy_for(state, h, encs, labels, q);
    }
    if (r.converged) {
      if (!best_converged || r.energy < best_converged->energy - 1e-12) best_converged = r;
    } else if (r.residual_inf < best_any.residual_inf) {
      best_any = r;
    }
  }
  if (!best_converged) {
    throw EncoderSolveError("encoder solve for '" + label + "' failed from every initial guess",
                            best_any);
  }
  return *best_converged;
}

// ---------------------------------------------------------------------------

ComplexMatrix encoder_velocity(const ComplexMatrix& g, const BasisEncoder& enc,
                               const ComplexMatrix& rho) {
  const auto k = enc.c.cols();
  require(rho.rows() == k && rho.cols() == k, ErrorCode::contract_violation,
          "reduced density matrix does not match the encoder");
  require(is_hermitian(rho, 1e-8), ErrorCode::state_corruption,
          "reduced density matrix is not Hermitian");
  const ComplexMatrix rho_h = 0.5 * (rho + rho.adjoint());
  const EigenDecomposition eig = hermitian_eig(rho_h);
  require(eig.values(0) >= -1e-8, ErrorCode::state_corruption,
          "reduced density matrix is not positive semidefinite");
  const ComplexMatrix residual = static_residual(g, enc);
  const ComplexMatrix shifted = rho_h + kRhoRegularization * ComplexMatrix::Identity(k, k);
  // X shifted = R  <=>  shifted X^dagger = R^dagger for Hermitian `shifted`.
  const ComplexMatrix x_adj = shifted.ldlt().solve(residual.adjoint());
  return -kI * x_adj.adjoint();
}

ComplexMatrix encoder_eom_rhs(const HybridState& state, const SumOfProducts& h,
                              const EncoderSet& encs, const std::string& label,
                              const ComplexMatrix& rho) {
  const BasisEncoder& enc = encs.at(label);
  const SumOfProducts he = encode_hamiltonian(h, encs);
  const CompactTables tables = compact_tables(state, h, he, h.index_of(label));
  return encoder_velocity(g_from_tables(tables, enc.c), enc, rho);
}

nlohmann::json to_json(const BasisEncoder& enc) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < enc.c.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index j = 0; j < enc.c.cols(); ++j) {
      rr.push_back(enc.c(i, j).real());
      ri.push_back(enc.c(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"label", enc.label}, {"n_levels", enc.n_levels}, {"n_qubits", enc.n_qubits},
          {"c_real", re}, {"c_imag", im}};
}

BasisEncoder basis_encoder_from_json(const nlohmann::json& j) {
  BasisEncoder enc;
  enc.label = j.at("label").get<std::string>();
  enc.n_levels = j.at("n_levels").get<std::size_t>();
  enc.n_qubits = j.at("n_qubits").get<std::size_t>();
  const auto& re = j.at("c_real");
  const auto& im = j.at("c_imag");
  require(re.size() == enc.n_levels && im.size() == enc.n_levels, ErrorCode::contract_violation,
          "encoder JSON row count does not match n_levels");
  enc.c.resize(static_cast<Eigen::Index>(enc.n_levels),
               static_cast<Eigen::Index>(std::size_t{1} << enc.n_qubits));
  for (Eigen::Index r = 0; r < enc.c.rows(); ++r) {
    const auto& rr = re.at(static_cast<std::size_t>(r));
    const auto& ri = im.at(static_cast<std::size_t>(r));
    require(static_cast<Eigen::Index>(rr.size()) == enc.c.cols() &&
                static_cast<Eigen::Index>(ri.size()) == enc.c.cols(),
            ErrorCode::contract_violation, "encoder JSON column count mismatch");
    for (Eigen::Index c = 0; c < enc.c.cols(); ++c) {
      enc.c(r, c) = cplx(rr.at(static_cast<std::size_t>(c)).get<double>(),
                         ri.at(static_cast<std::size_t>(c)).get<double>());
    }
  }
  check_encoder(enc);
  return enc;
}

}  // namespace vbse
