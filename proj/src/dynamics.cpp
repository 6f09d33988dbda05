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

#include "vbse/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "vbse/numerics.hpp"
#include "vbse/tensor.hpp"

namespace vbse {

std::vector<double> Trajectory::series(const std::string& name) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto it = s.observables.find(name);
    require(it != s.observables.end(), ErrorCode::contract_violation,
            "trajectory has no observable '" + name + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.time);
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<std::string>& columns,
                          const std::string& config_hash) {
  if (!config_hash.empty()) out << "# config_hash: " << config_hash << "\n";
  out << "time";
  for (const auto& c : columns) out << "," << c;
  out << "\n";
  out << std::setprecision(12);
  for (const auto& s : traj.samples) {
    out << s.time;
    for (const auto& c : columns) {
      const auto it = s.observables.find(c);
      require(it != s.observables.end(), ErrorCode::contract_violation,
              "trajectory has no observable '" + c + "'");
      out << "," << it->second;
    }
    out << "\n";
  }
}

nlohmann::json to_json(const DynamicsState& state) {
  nlohmann::json encs = nlohmann::json::object();
  for (const auto& [label, enc] : state.encoders) encs[label] = to_json(enc);
  return {{"time", state.time},
          {"theta", std::vector<double>(state.theta.data(), state.theta.data() + state.theta.size())},
          {"encoders", encs}};
}

DynamicsState dynamics_state_from_json(const nlohmann::json& j) {
  DynamicsState out;
  out.time = j.at("time").get<double>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  out.theta = Eigen::Map<const RealVector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  for (const auto& [label, value] : j.at("encoders").items()) {
    out.encoders.emplace(label, basis_encoder_from_json(value));
  }
  return out;
}

RealVector theta_eom(const AnsatzCircuit& circ, const RealVector& theta,
                     const SumOfProducts& h_encoded) {
  const HybridState phi = evaluate_state(circ, theta);
  const ComplexMatrix jac = state_jacobian(circ, theta);
  const ComplexVector h_phi = h_encoded.apply(phi.amplitudes);
  RealMatrix metric = (jac.adjoint() * jac).real();
  metric.diagonal().array() += kMetricRegularization;
  const RealVector force = (jac.adjoint() * h_phi).imag();
  const Eigen::LDLT<RealMatrix> ldlt(metric);
  RealVector rate = ldlt.solve(force);
  if (ldlt.info() != Eigen::Success || !rate.allFinite()) {
    throw StiffnessError("theta_eom: metric is singular beyond regularization", 0.0,
                         ComplexVector());
  }
  return rate;
}

namespace {

constexpr double kReturnedDriftLimit = 1e-10;

double max_drift(const EncoderSet& encs) {
  double worst = 0.0;
  for (const auto& [label, enc] : encs) worst = std::max(worst, orthonormality_defect(enc.c));
  return worst;
}

bool has_spin(const std::vector<DegreeOfFreedom>& dofs) {
  return std::any_of(dofs.begin(), dofs.end(),
                     [](const DegreeOfFreedom& d) { return d.label == "s" && d.kind == DofKind::spin; });
}

double spin_z_of(const HybridState& phi) {
  const ComplexMatrix rho = reduced_density_matrix(phi, "s");
  return (rho(0, 0) - rho(1, 1)).real();
}

TrajectorySample observe(double t, const HybridState& phi, const SumOfProducts& h_encoded,
                         const EncoderSet& encs) {
  TrajectorySample s;
  s.time = t;
  if (has_spin(phi.dofs)) s.observables["sz"] = spin_z_of(phi);
  s.observables["energy"] = expectation(phi, h_encoded);
  s.observables["c_drift"] = max_drift(encs);
  return s;
}

// Encoder velocities for every mode with the state and encoders fixed.
std::map<std::string, ComplexMatrix> encoder_rates(const HybridState& phi, const SumOfProducts& h,
                                                   const SumOfProducts& h_encoded,
                                                   const EncoderSet& encs) {
  std::map<std::string, ComplexMatrix> out;
  for (const auto& [label, enc] : encs) {
    if (enc.n_levels == enc.encoded_dim()) {
      out[label] = ComplexMatrix::Zero(enc.c.rows(), enc.c.cols());
      continue;
    }
    const CompactTables tables = compact_tables(phi, h, h_encoded, h.index_of(label));
    const ComplexMatrix rho = reduced_density_matrix(phi, label);
    out[label] = encoder_velocity(g_from_tables(tables, enc.c), enc, rho);
  }
  return out;
}

// Packs theta (as real parts) followed by the column-major entries of each
// encoder in label order.
struct JointLayout {
  Eigen::Index n_theta = 0;
  std::vector<std::pair<std::string, Eigen::Index>> offsets;
  Eigen::Index size = 0;

  explicit JointLayout(const DynamicsState& s) {
    n_theta = s.theta.size();
    size = n_theta;
    for (const auto& [label, enc] : s.encoders) {
      offsets.emplace_back(label, size);
      size += enc.c.size();
    }
  }

  ComplexVector pack(const RealVector& theta, const EncoderSet& encs) const {
    ComplexVector y(size);
    y.head(n_theta) = theta.cast<cplx>();
    for (const auto& [label, off] : offsets) {
      const ComplexMatrix& c = encs.at(label).c;
      y.segment(off, c.size()) = Eigen::Map<const ComplexVector>(c.data(), c.size());
    }
    return y;
  }

  void unpack(const ComplexVector& y, RealVector& theta, EncoderSet& encs) const {
    theta = y.head(n_theta).real();
    for (const auto& [label, off] : offsets) {
      ComplexMatrix& c = encs.at(label).c;
      c = Eigen::Map<const ComplexMatrix>(y.data() + off, c.rows(), c.cols());
    }
  }
};

}  // namespace

Trajectory vqd_evolve(const SumOfProducts& h, const AnsatzCircuit& circ,
                      const DynamicsState& state0, double t_end, double sample_dt,
                      const VqdOptions& options) {
  require(t_end >= 0.0, ErrorCode::contract_violation, "t_end must be non-negative");
  require(sample_dt > 0.0, ErrorCode::contract_violation, "sample_dt must be positive");
  require(static_cast<std::size_t>(state0.theta.size()) == circ.n_params,
          ErrorCode::contract_violation, "theta does not match the circuit");
  require(!options.split || options.split_dt > 0.0, ErrorCode::contract_violation,
          "split_dt must be positive");
  for (const auto& [label, enc] : state0.encoders) check_encoder(enc, 1e-6);

  const JointLayout layout(state0);
  DynamicsState current = state0;
  Trajectory traj;

  const auto record = [&](const DynamicsState& s) {
    const SumOfProducts he = encode_hamiltonian(h, s.encoders);
    const HybridState phi = evaluate_state(circ, s.theta);
    traj.samples.push_back(observe(s.time, phi, he, s.encoders));
    traj.final_wavefunction = phi;
  };

  // Joint right-hand side; `which` masks the halves for split stepping.
  enum class Part { both, theta, encoders };
  const auto rhs = [&](const ComplexVector& y, Part which) {
    RealVector theta;
    EncoderSet encs = current.encoders;
    layout.unpack(y, theta, encs);
    const SumOfProducts he = encode_hamiltonian(h, encs);
    ComplexVector dy = ComplexVector::Zero(layout.size);
    if (which != Part::encoders) {
      dy.head(layout.n_theta) = theta_eom(circ, theta, he).cast<cplx>();
    }
    if (which != Part::theta && !layout.offsets.empty()) {
      const HybridState phi = evaluate_state(circ, theta);
      const auto rates = encoder_rates(phi, h, he, encs);
      for (const auto& [label, off] : layout.offsets) {
        const ComplexMatrix& r = rates.at(label);
        dy.segment(off, r.size()) = Eigen::Map<const ComplexVector>(r.data(), r.size());
      }
    }
    return dy;
  };

  Rk45Options rk;
  rk.rtol = options.rtol;
  rk.atol = options.atol;

  const auto advance = [&](double t0, double t1) {
    ComplexVector y = layout.pack(current.theta, current.encoders);
    if (!options.split) {
      const double samples[] = {t1};
      const auto out = rk45_integrate([&](double, const ComplexVector& v) { return rhs(v, Part::both); },
                                      y, {t0, t1}, samples, rk);
      y = out.back().y;
    } else {
      double t = t0;
      while (t < t1 - 1e-14) {
        const double t_next = std::min(t1, t + options.split_dt);
        const double samples[] = {t_next};
        y = rk45_integrate([&](double, const ComplexVector& v) { return rhs(v, Part::theta); }, y,
                           {t, t_next}, samples, rk)
                .back()
                .y;
        y = rk45_integrate([&](double, const ComplexVector& v) { return rhs(v, Part::encoders); }, y,
                           {t, t_next}, samples, rk)
                .back()
                .y;
        t = t_next;
      }
    }
    layout.unpack(y, current.theta, current.encoders);
    current.time = t1;
  };

  record(current);
  const auto n_samples = static_cast<long>(std::floor(t_end / sample_dt + 1e-9));
  for (long k = 1; k <= n_samples; ++k) {
    const double t1 = state0.time + static_cast<double>(k) * sample_dt;
    try {
      advance(current.time, t1);
    } catch (const StiffnessError& e) {
      traj.truncated = true;
      std::ostringstream msg;
      msg << "integration stopped near t=" << current.time << ": " << e.what();
      traj.diagnostic = msg.str();
      break;
    }
    if (max_drift(current.encoders) > options.qr_threshold) {
      for (auto& [label, enc] : current.encoders) enc.c = qr_orthonormalize(enc.c);
      traj.qr_events.push_back(current.time);
    }
    record(current);
  }
  // Returned encoders always meet the orthonormality contract.
  if (max_drift(current.encoders) >= kReturnedDriftLimit) {
    for (auto& [label, enc] : current.encoders) enc.c = qr_orthonormalize(enc.c);
    traj.qr_events.push_back(current.time);
  }
  traj.final_state = current;
  return traj;
}

HybridState trotter_step(const HybridState& state, const SumOfProducts& h_encoded, double tau) {
  require(tau > 0.0, ErrorCode::contract_violation, "Trotter step must be positive");
  require(state.dims() == h_encoded.dims() && h_encoded.is_square(), ErrorCode::contract_violation,
          "state and Hamiltonian live in different spaces");
  HybridState out = state;
  const auto dims = h_encoded.dims();
  for (const ProductTerm& term : h_encoded.terms()) {
    std::vector<std::size_t> support;
    const ComplexMatrix local = term_local_matrix(term, support);
    const EigenDecomposition eig = hermitian_eig(0.5 * (local + local.adjoint()));
    const ComplexVector phases = (eig.values.array() * (-tau)).unaryExpr(
        [](double a) { return std::polar(1.0, a); });
    if (support.empty()) {
      out.amplitudes *= phases(0);
      continue;
    }
    const ComplexMatrix step = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
    apply_on_support(out.amplitudes, dims, support, step);
  }
  return out;
}

Trajectory trotter_evolve_with_encoder(const SumOfProducts& h, const HybridState& state0,
                                       const EncoderSet& encs0, double t_end, double tau,
                                       double sample_dt, const TrotterOptions& options) {
  require(tau > 0.0 && sample_dt > 0.0 && t_end >= 0.0, ErrorCode::contract_violation,
          "Trotter evolution needs positive steps and a non-negative end time");
  const double ratio = sample_dt / tau;
  const auto steps_per_sample = static_cast<long>(std::llround(ratio));
  require(steps_per_sample >= 1 && std::abs(ratio - static_cast<double>(steps_per_sample)) < 1e-9,
          ErrorCode::contract_violation, "sample_dt must be a multiple of tau");
  for (const auto& [label, enc] : encs0) check_encoder(enc, 1e-6);

  EncoderSet encs = encs0;
  HybridState phi = state0;
  SumOfProducts he = encode_hamiltonian(h, encs);
  require(phi.dims() == he.dims(), ErrorCode::contract_violation,
          "initial state does not live in the encoded space");

  Trajectory traj;
  traj.samples.push_back(observe(0.0, phi, he, encs));
  const auto n_samples = static_cast<long>(std::floor(t_end / sample_dt + 1e-9));
  long step_index = 0;

  const auto rates_at = [&](const EncoderSet& at) {
    return encoder_rates(phi, h, encode_hamiltonian(h, at), at);
  };
  const auto shifted = [](EncoderSet base, const std::map<std::string, ComplexMatrix>& rates,
                          double dt) {
    for (auto& [label, enc] : base) enc.c += dt * rates.at(label);
    return base;
  };

  for (long k = 1; k <= n_samples && !traj.truncated; ++k) {
    for (long s = 0; s < steps_per_sample; ++s) {
      phi = trotter_step(phi, he, tau);
      ++step_index;
      const double t = static_cast<double>(step_index) * tau;

      EncoderSet next;
      if (options.stepper == EncoderStepper::euler) {
        next = shifted(encs, encoder_rates(phi, h, he, encs), tau);
      } else {
        const auto k1 = encoder_rates(phi, h, he, encs);
        const auto k2 = rates_at(shifted(encs, k1, 0.5 * tau));
        const auto k3 = rates_at(shifted(encs, k2, 0.5 * tau));
        const auto k4 = rates_at(shifted(encs, k3, tau));
        next = encs;
        for (auto& [label, enc] : next) {
          enc.c += (tau / 6.0) * (k1.at(label) + 2.0 * k2.at(label) + 2.0 * k3.at(label) + k4.at(label));
        }
      }
      const double drift = max_drift(next);
      if (!std::isfinite(drift) || drift > options.max_drift) {
        traj.truncated = true;
        std::ostringstream msg;
        msg << "encoder drift " << drift << " exceeds " << options.max_drift << " at t=" << t;
        traj.diagnostic = msg.str();
        break;
      }
      for (auto& [label, enc] : next) enc.c = qr_orthonormalize(enc.c);
      encs = std::move(next);
      he = encode_hamiltonian(h, encs);
    }
    if (traj.truncated) break;
    traj.samples.push_back(observe(static_cast<double>(step_index) * tau, phi, he, encs));
  }
  traj.final_state.time = static_cast<double>(step_index) * tau;
  traj.final_state.encoders = encs;
  traj.final_wavefunction = phi;
  return traj;
}

}  // namespace vbse
