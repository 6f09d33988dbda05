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

#include "vbse/models.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "vbse/hash.hpp"
#include "vbse/tensor.hpp"

namespace vbse {

std::string phonon_label(std::size_t j) { return "p" + std::to_string(j); }

void validate(const HolsteinParams& p) {
  require(p.n_sites >= 2, ErrorCode::contract_violation, "Holstein chain needs at least 2 sites");
  require(p.n_levels >= 2, ErrorCode::truncation, "phonon truncation needs at least 2 levels");
  require(std::isfinite(p.v_hop) && std::isfinite(p.omega) && std::isfinite(p.g),
          ErrorCode::contract_violation, "Holstein parameters must be finite");
  require(p.omega > 0.0, ErrorCode::contract_violation, "phonon frequency must be positive");
}

std::vector<std::pair<std::size_t, std::size_t>> holstein_bonds(const HolsteinParams& p) {
  std::vector<std::pair<std::size_t, std::size_t>> bonds;
  for (std::size_t i = 0; i + 1 < p.n_sites; ++i) bonds.emplace_back(i, i + 1);
  if (p.periodic && p.n_sites >= 3) bonds.emplace_back(p.n_sites - 1, 0);
  return bonds;
}

SumOfProducts build_holstein(const HolsteinParams& p) {
  validate(p);
  std::vector<DegreeOfFreedom> dofs{{"e", DofKind::electron_site, p.n_sites}};
  for (std::size_t j = 0; j < p.n_sites; ++j) dofs.push_back({phonon_label(j), DofKind::phonon, p.n_levels});
  SumOfProducts h(std::move(dofs));
  const auto ns = static_cast<Eigen::Index>(p.n_sites);
  for (const auto& [i, j] : holstein_bonds(p)) {
    ComplexMatrix hop = ComplexMatrix::Zero(ns, ns);
    hop(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    hop(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
    h.add_term(-p.v_hop, {{"e", hop}});
  }
  const ComplexMatrix number = boson_number(p.n_levels);
  const ComplexMatrix b = boson_annihilation(p.n_levels);
  const ComplexMatrix displacement = b + b.adjoint();
  for (std::size_t j = 0; j < p.n_sites; ++j) h.add_term(p.omega, {{phonon_label(j), number}});
  for (std::size_t j = 0; j < p.n_sites; ++j) {
    ComplexMatrix occ = ComplexMatrix::Zero(ns, ns);
    occ(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
    h.add_term(p.g * p.omega, {{"e", occ}, {phonon_label(j), displacement}});
  }
  return h;
}

HybridState holstein_reference(const std::vector<DegreeOfFreedom>& dofs) {
  std::vector<ComplexVector> locals;
  for (const auto& d : dofs) {
    const auto n = static_cast<Eigen::Index>(d.dim);
    if (d.kind == DofKind::electron_site) {
      locals.push_back(ComplexVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
    } else {
      ComplexVector v = ComplexVector::Zero(n);
      v(0) = 1.0;
      locals.push_back(v);
    }
  }
  return product_state(dofs, locals);
}

namespace {

std::vector<DegreeOfFreedom> encoded_dofs(const std::vector<DegreeOfFreedom>& dofs,
                                          const EncoderSet& encs) {
  std::vector<DegreeOfFreedom> out = dofs;
  for (auto& d : out) {
    const auto it = encs.find(d.label);
    if (it != encs.end()) {
      require(it->second.n_levels == d.dim, ErrorCode::contract_violation,
              "encoder '" + d.label + "' does not match the mode truncation");
      d.dim = it->second.encoded_dim();
    }
  }
  return out;
}

}  // namespace

AnsatzCircuit holstein_ansatz(const HolsteinParams& p, const EncoderSet& encs,
                              const HolsteinAnsatzOptions& options) {
  validate(p);
  require(options.n_layers >= 1, ErrorCode::contract_violation, "ansatz needs at least one layer");
  const SumOfProducts h = build_holstein(p);
  AnsatzCircuit circ;
  circ.reference = holstein_reference(encoded_dofs(h.dofs(), encs));
  const auto ns = static_cast<Eigen::Index>(p.n_sites);
  const ComplexMatrix b = boson_annihilation(p.n_levels);
  const ComplexMatrix shift = b.adjoint() - b;
  std::size_t next = 0;
  for (std::size_t layer = 0; layer < options.n_layers; ++layer) {
    if (options.hopping) {
      for (const auto& [j, k] : holstein_bonds(p)) {
        ComplexMatrix gen = ComplexMatrix::Zero(ns, ns);
        gen(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
        gen(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = -1.0;
        circ.add_gate(Gate({0}, gen, next++, "hop"));
      }
    }
    const std::size_t shared = next;
    if (options.shared_displacement) ++next;
    for (std::size_t j = 0; j < p.n_sites; ++j) {
      const std::string label = phonon_label(j);
      const auto it = encs.find(label);
      const ComplexMatrix local = it != encs.end() ? encode_local_operator(shift, it->second) : shift;
      ComplexMatrix occ = ComplexMatrix::Zero(ns, ns);
      occ(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
      const std::size_t param = options.shared_displacement ? shared : next++;
      circ.add_gate(Gate({0, j + 1}, kron(occ, local), param, "displace"));
    }
  }
  return circ;
}

// ---------------------------------------------------------------------------

void validate(const SpinBosonParams& p) {
  require(p.n_levels >= 2, ErrorCode::truncation, "phonon truncation needs at least 2 levels");
  require(std::isfinite(p.epsilon) && std::isfinite(p.delta), ErrorCode::contract_violation,
          "spin parameters must be finite");
  for (const auto& m : p.modes) {
    require(std::isfinite(m.omega) && m.omega > 0.0, ErrorCode::contract_violation,
            "mode frequencies must be positive");
    require(std::isfinite(m.g), ErrorCode::contract_violation, "mode couplings must be finite");
  }
}

SumOfProducts build_spin_boson(const SpinBosonParams& p) {
  validate(p);
  std::vector<DegreeOfFreedom> dofs{{"s", DofKind::spin, 2}};
  for (std::size_t j = 0; j < p.modes.size(); ++j) {
    dofs.push_back({phonon_label(j), DofKind::phonon, p.n_levels});
  }
  SumOfProducts h(std::move(dofs));
  const ComplexMatrix z = pauli(PauliKind::Z);
  h.add_term(p.epsilon / 2.0, {{"s", z}});
  h.add_term(p.delta, {{"s", pauli(PauliKind::X)}});
  const ComplexMatrix b = boson_annihilation(p.n_levels);
  const ComplexMatrix displacement = b + b.adjoint();
  const ComplexMatrix number = boson_number(p.n_levels);
  for (std::size_t j = 0; j < p.modes.size(); ++j) {
    h.add_term(p.modes[j].g * p.modes[j].omega, {{"s", z}, {phonon_label(j), displacement}});
  }
  for (std::size_t j = 0; j < p.modes.size(); ++j) {
    h.add_term(p.modes[j].omega, {{phonon_label(j), number}});
  }
  return h;
}

HybridState spin_boson_initial_state(const std::vector<DegreeOfFreedom>& dofs) {
  std::vector<ComplexVector> locals;
  for (const auto& d : dofs) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d.dim));
    v(0) = 1.0;
    locals.push_back(v);
  }
  return product_state(dofs, locals);
}

double spectral_weight(const SpectralDensity& sd) {
  return std::numbers::pi / 2.0 * sd.alpha * std::tgamma(sd.s) * sd.omega_c;
}

std::vector<SpinBosonMode> discretize_sub_ohmic(const SpectralDensity& sd, std::size_t n_modes) {
  require(n_modes >= 1, ErrorCode::contract_violation, "need at least one mode");
  require(sd.alpha > 0.0 && sd.omega_c > 0.0 && sd.s > 0.0, ErrorCode::contract_violation,
          "spectral density parameters must be positive");
  const double w = spectral_weight(sd);
  std::vector<SpinBosonMode> modes;
  for (std::size_t j = 1; j <= n_modes; ++j) {
    const double q = (static_cast<double>(j) - 0.5) / static_cast<double>(n_modes);
    double x = 0.0;
    try {
      x = boost::math::gamma_p_inv(sd.s, q);
    } catch (const std::exception& e) {
      fail(ErrorCode::convergence, std::string("spectral quantile failed: ") + e.what());
    }
    const double omega = sd.omega_c * x;
    const double c2 = 2.0 / std::numbers::pi * omega * w / static_cast<double>(n_modes);
    modes.push_back({omega, std::sqrt(c2) / omega});
  }
  return modes;
}

AnsatzCircuit vha_ansatz(const SumOfProducts& h_encoded, const HybridState& reference,
                         const std::vector<std::string>& encoded_labels, std::size_t n_layers) {
  require(h_encoded.is_square() && h_encoded.dims() == reference.dims(),
          ErrorCode::contract_violation, "reference does not match the encoded operator");
  require(n_layers >= 1, ErrorCode::contract_violation, "ansatz needs at least one layer");
  AnsatzCircuit circ;
  circ.reference = reference;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> pools;
  for (const auto& label : encoded_labels) {
    const std::size_t k = h_encoded.index_of(label);
    const std::size_t dim = h_encoded.dofs()[k].dim;
    std::size_t n_qubits = 0;
    while ((std::size_t{1} << n_qubits) < dim) ++n_qubits;
    require((std::size_t{1} << n_qubits) == dim, ErrorCode::contract_violation,
            "Pauli pool needs a power-of-two encoded dimension");
    std::vector<std::string> strings{""};
    for (std::size_t q = 0; q < n_qubits; ++q) {
      std::vector<std::string> grown;
      for (const auto& s : strings) {
        for (char c : {'I', 'X', 'Y', 'Z'}) grown.push_back(s + c);
      }
      strings = std::move(grown);
    }
    pools.emplace_back(k, std::move(strings));
  }
  std::size_t next = 0;
  for (std::size_t layer = 0; layer < n_layers; ++layer) {
    for (const ProductTerm& t : h_encoded.terms()) {
      std::vector<std::size_t> support;
      const ComplexMatrix local = term_local_matrix(t, support);
      ComplexMatrix herm = 0.5 * (local + local.adjoint());
      circ.add_gate(Gate(support, -kI * herm, next++, "term"));
    }
    for (const auto& [k, strings] : pools) {
      for (const auto& s : strings) circ.add_gate(Gate({k}, -kI * pauli_string(s), next++, s));
    }
  }
  return circ;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kDenseLimit = 2048;
// Propagation switches to Krylov earlier: a dense complex eigensolve at the
// full limit costs tens of seconds while Krylov steps stay cheap.
constexpr std::size_t kDensePropagationLimit = 512;

ComplexVector default_start(std::size_t dim) {
  std::mt19937_64 rng(20260101);
  std::normal_distribution<double> normal;
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(normal(rng), normal(rng));
  return v.normalized();
}

void check_oracle_dim(std::size_t dim) {
  require(dim <= (std::size_t{1} << 22), ErrorCode::resource,
          "oracle dimension exceeds the 2^22 cap");
}

GroundState lanczos_ground(const SumOfProducts& h, const ComplexVector& start) {
  const TermwiseOperator op(h);
  const auto n = static_cast<Eigen::Index>(op.dim());
  const Eigen::Index m = std::min<Eigen::Index>(n, 80);
  ComplexVector v0 = start.normalized();
  ComplexMatrix basis(n, m);
  double energy = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  ComplexVector ritz = v0;
  for (int restart = 0; restart < 200; ++restart) {
    RealVector alpha(m);
    RealVector beta(m);
    basis.col(0) = v0;
    Eigen::Index used = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      ComplexVector w = op.apply(basis.col(j));
      alpha(j) = basis.col(j).dot(w).real();
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      }
      beta(j) = w.norm();
      if (j + 1 < m) {
        if (beta(j) < 1e-12) {
          used = j + 1;
          break;
        }
        basis.col(j + 1) = w / beta(j);
      }
    }
    RealMatrix t = RealMatrix::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(t);
    energy = eig.eigenvalues()(0);
    const RealVector y = eig.eigenvectors().col(0);
    ritz = basis.leftCols(used) * y.cast<cplx>();
    ritz.normalize();
    residual = (op.apply(ritz) - energy * ritz).norm();
    if (residual <= 1e-9) break;
    v0 = ritz;
  }
  require(residual <= 1e-8, ErrorCode::convergence, "Lanczos ground state did not converge");
  return {energy, make_state(h.dofs(), ritz), residual};
}

}  // namespace

GroundState exact_ground_state(const SumOfProducts& h, const std::optional<ComplexVector>& start) {
  require(h.is_square(), ErrorCode::contract_violation, "oracle needs a square operator");
  const std::size_t dim = h.total_dim();
  check_oracle_dim(dim);
  if (start) {
    require(static_cast<std::size_t>(start->size()) == dim, ErrorCode::contract_violation,
            "start vector has the wrong length");
  }
  if (dim <= kDenseLimit) {
    const ComplexMatrix dense = build_dense(h);
    const EigenDecomposition eig = hermitian_eig(dense);
    ComplexVector psi = eig.vectors.col(0);
    const double residual = (dense * psi - eig.values(0) * psi).norm();
    return {eig.values(0), make_state(h.dofs(), psi.normalized()), residual};
  }
  ComplexVector v = default_start(dim);
  if (start) v = (*start).normalized() + 1e-3 * v;
  return lanczos_ground(h, v);
}

ComplexVector krylov_propagate(const TermwiseOperator& op, const ComplexVector& psi, double t,
                               std::size_t krylov_dim, double tol) {
  ComplexVector current = psi;
  double remaining = t;
  const auto n = static_cast<Eigen::Index>(op.dim());
  const Eigen::Index m = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(krylov_dim));
  double tau = remaining;
  while (remaining > 0.0) {
    const double norm0 = current.norm();
    if (norm0 == 0.0) break;
    ComplexMatrix basis(n, m);
    RealVector alpha(m);
    RealVector beta(m);
    basis.col(0) = current / norm0;
    Eigen::Index used = m;
    bool breakdown = false;
    for (Eigen::Index j = 0; j < m; ++j) {
      ComplexVector w = op.apply(basis.col(j));
      alpha(j) = basis.col(j).dot(w).real();
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      }
      beta(j) = w.norm();
      if (beta(j) < 1e-13 * std::max(1.0, std::abs(alpha(j)))) {
        used = j + 1;
        breakdown = true;
        break;
      }
      if (j + 1 < m) basis.col(j + 1) = w / beta(j);
    }
    RealMatrix tri = RealMatrix::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
      tri(j, j) = alpha(j);
      if (j + 1 < used) tri(j, j + 1) = tri(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(tri);
    const ComplexMatrix vecs = eig.eigenvectors().cast<cplx>();
    auto coefficients = [&](double step) {
      ComplexVector d(used);
      for (Eigen::Index i = 0; i < used; ++i) d(i) = std::exp(-kI * eig.eigenvalues()(i) * step);
      return ComplexVector(vecs * d.asDiagonal() * vecs.row(0).adjoint());
    };
    tau = std::min(tau * 2.0, remaining);
    ComplexVector y;
    for (int tries = 0;; ++tries) {
      y = coefficients(tau);
      const double err = breakdown ? 0.0 : beta(used - 1) * std::abs(y(used - 1));
      if (err <= tol * tau / std::max(t, 1e-300) || tries > 60) break;
      tau *= 0.5;
    }
    current = norm0 * (basis.leftCols(used) * y);
    remaining -= tau;
    if (remaining < 1e-14 * std::max(1.0, t)) remaining = 0.0;
  }
  return current;
}

HybridState exact_propagate(const SumOfProducts& h, const HybridState& psi0, double t) {
  require(h.is_square() && h.dims() == psi0.dims(), ErrorCode::contract_violation,
          "state does not match the operator");
  const std::size_t dim = h.total_dim();
  check_oracle_dim(dim);
  if (t == 0.0) return psi0;
  ComplexVector out;
  if (dim <= kDensePropagationLimit) {
    const EigenDecomposition eig = hermitian_eig(build_dense(h));
    ComplexVector phases(eig.values.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(-kI * eig.values(i) * t);
    out = eig.vectors * (phases.asDiagonal() * (eig.vectors.adjoint() * psi0.amplitudes));
  } else {
    out = krylov_propagate(TermwiseOperator(h), psi0.amplitudes, t);
  }
  return make_state(psi0.dofs, out / out.norm());
}

std::vector<double> exact_observable_trajectory(
    const SumOfProducts& h, const HybridState& psi0, const std::vector<double>& times,
    const std::function<double(const HybridState&)>& observable) {
  require(h.is_square() && h.dims() == psi0.dims(), ErrorCode::contract_violation,
          "state does not match the operator");
  const std::size_t dim = h.total_dim();
  check_oracle_dim(dim);
  std::vector<double> out;
  out.reserve(times.size());
  if (dim <= kDensePropagationLimit) {
    const EigenDecomposition eig = hermitian_eig(build_dense(h));
    const ComplexVector coeff = eig.vectors.adjoint() * psi0.amplitudes;
    for (double t : times) {
      ComplexVector phases(eig.values.size());
      for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(-kI * eig.values(i) * t);
      const ComplexVector psi = eig.vectors * phases.cwiseProduct(coeff);
      out.push_back(observable(make_state(psi0.dofs, psi / psi.norm())));
    }
    return out;
  }
  const TermwiseOperator op(h);
  ComplexVector psi = psi0.amplitudes;
  double now = 0.0;
  for (double t : times) {
    require(t >= now, ErrorCode::contract_violation, "sample times must be increasing");
    if (t > now) psi = krylov_propagate(op, psi, t - now);
    now = t;
    psi /= psi.norm();
    out.push_back(observable(make_state(psi0.dofs, psi)));
  }
  return out;
}

double spin_z(const HybridState& state) {
  const ComplexMatrix rho = reduced_density_matrix(state, "s");
  return (rho(0, 0) - rho(1, 1)).real();
}

// ---------------------------------------------------------------------------

std::optional<std::string> oracle_cache_dir() {
  const char* dir = std::getenv("VBSE_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::string(dir);
}

namespace {

std::string operator_key(const SumOfProducts& h) { return sha1_hex(to_json(h).dump()); }

std::string vector_bytes(const ComplexVector& v) {
  return std::string(reinterpret_cast<const char*>(v.data()), sizeof(cplx) * static_cast<std::size_t>(v.size()));
}

}  // namespace

GroundState cached_exact_ground_state(const SumOfProducts& h,
                                      const std::optional<ComplexVector>& start) {
  const auto dir = oracle_cache_dir();
  if (!dir) return exact_ground_state(h, start);
  namespace fs = std::filesystem;
  const fs::path path = fs::path(*dir) / ("ground-" + operator_key(h) + ".bin");
  const std::uint64_t dim = h.total_dim();
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t stored = 0;
    double energy = 0.0;
    double residual = 0.0;
    in.read(reinterpret_cast<char*>(&stored), sizeof stored);
    in.read(reinterpret_cast<char*>(&energy), sizeof energy);
    in.read(reinterpret_cast<char*>(&residual), sizeof residual);
    if (in && stored == dim) {
      ComplexVector psi(static_cast<Eigen::Index>(dim));
      in.read(reinterpret_cast<char*>(psi.data()), static_cast<std::streamsize>(sizeof(cplx) * dim));
      if (in) return {energy, make_state(h.dofs(), psi), residual};
    }
  }
  GroundState gs = exact_ground_state(h, start);
  std::error_code ec;
  fs::create_directories(*dir, ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(&gs.energy), sizeof gs.energy);
    out.write(reinterpret_cast<const char*>(&gs.residual), sizeof gs.residual);
    out.write(reinterpret_cast<const char*>(gs.state.amplitudes.data()),
              static_cast<std::streamsize>(sizeof(cplx) * dim));
  }
  fs::rename(tmp, path, ec);
  return gs;
}

std::vector<double> cached_spin_trajectory(const SumOfProducts& h, const HybridState& psi0,
                                           const std::vector<double>& times) {
  const auto dir = oracle_cache_dir();
  if (!dir) return exact_observable_trajectory(h, psi0, times, spin_z);
  namespace fs = std::filesystem;
  std::string key = to_json(h).dump() + "|" + vector_bytes(psi0.amplitudes) + "|";
  for (double t : times) key += std::to_string(t) + ",";
  const fs::path path = fs::path(*dir) / ("sz-" + sha1_hex(key) + ".json");
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      const auto j = nlohmann::json::parse(in);
      auto values = j.get<std::vector<double>>();
      if (values.size() == times.size()) return values;
    } catch (const std::exception&) {
    }
  }
  auto values = exact_observable_trajectory(h, psi0, times, spin_z);
  std::error_code ec;
  fs::create_directories(*dir, ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << nlohmann::json(values).dump();
  }
  fs::rename(tmp, path, ec);
  return values;
}

}  // namespace vbse
