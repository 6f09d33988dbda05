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

#include "vbse/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <type_traits>

#include "vbse/dynamics.hpp"
#include "vbse/ground.hpp"
#include "vbse/hash.hpp"
#include "vbse/tensor.hpp"

namespace vbse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::holstein_vqe, "holstein_vqe"},
    {ExperimentKind::holstein_sweep, "holstein_sweep"},
    {ExperimentKind::sbm_vqd, "sbm_vqd"},
    {ExperimentKind::sbm_trotter, "sbm_trotter"},
    {ExperimentKind::schmidt_analysis, "schmidt_analysis"},
    {ExperimentKind::hardware_compile, "hardware_compile"},
};

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::config, path + ": " + what);
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, key_path(key));
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) out = as_count(*v, key_path(key));
  }

  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) config_error(key_path(key), "expected an integer");
      const auto value = v->get<std::int64_t>();
      if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
        config_error(key_path(key), "integer out of range");
      }
      out = static_cast<int>(value);
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) config_error(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) config_error(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) config_error(key_path(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(as_number((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }

  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) config_error(key_path(key), "expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(as_count((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (seen_.count(key) == 0) config_error(key_path(key), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error(path, "expected a finite number");
    return x;
  }

  static std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      config_error(path, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) config_error(path, what);
}

ExperimentKind kind_from_string(const std::string& name) {
  for (const auto& [kind, text] : kKindNames) {
    if (name == text) return kind;
  }
  config_error("experiment", "unknown experiment '" + name + "'");
}

void validate_sweep(const ExperimentConfig& cfg);

void validate(const ExperimentConfig& cfg) {
  const ModelConfig& m = cfg.model;
  const bool spin = is_spin_boson(cfg.experiment);
  if (!spin) {
    check(m.n_sites >= 2, "model.n_sites", "need at least two sites");
    check(m.omega > 0.0, "model.omega", "must be positive");
    check(m.g >= 0.0, "model.g", "must be non-negative");
  } else if (m.sub_ohmic) {
    check(m.sub_ohmic->alpha > 0.0, "model.sub_ohmic.alpha", "must be positive");
    check(m.sub_ohmic->s > 0.0, "model.sub_ohmic.s", "must be positive");
    check(m.sub_ohmic->omega_c > 0.0, "model.sub_ohmic.omega_c", "must be positive");
    check(m.sub_ohmic->n_modes >= 1, "model.sub_ohmic.n_modes", "need at least one mode");
  } else {
    check(!m.modes.empty(), "model.modes", "need at least one mode");
    for (std::size_t j = 0; j < m.modes.size(); ++j) {
      check(m.modes[j].omega > 0.0, "model.modes[" + std::to_string(j) + "].omega",
            "must be positive");
    }
  }

  const EncoderConfig& e = cfg.encoder;
  check(e.n_qubits >= 1 && e.n_qubits <= 4, "encoder.n_qubits", "must lie in [1, 4]");
  check(e.n_levels >= (std::size_t{1} << e.n_qubits), "encoder.n_levels",
        "must be at least 2^n_qubits");
  check(e.n_levels <= 64, "encoder.n_levels", "must not exceed 64");

  const SolverConfig& s = cfg.solver;
  check(s.layers >= 1, "solver.layers", "need at least one layer");
  check(s.binary_layers >= 1, "solver.binary_layers", "need at least one layer");
  check(s.max_macro_iter >= 1, "solver.max_macro_iter", "need at least one iteration");
  check(s.e_tol > 0.0, "solver.e_tol", "must be positive");
  check(s.solve_tol > 0.0, "solver.solve_tol", "must be positive");
  check(s.vqe_gtol > 0.0, "solver.vqe_gtol", "must be positive");
  check(s.vqe_max_iter >= 1, "solver.vqe_max_iter", "need at least one iteration");
  check(s.t_end >= 0.0, "solver.t_end", "must be non-negative");
  check(s.sample_dt > 0.0, "solver.sample_dt", "must be positive");
  check(s.tau > 0.0, "solver.tau", "must be positive");
  check(s.rtol > 0.0, "solver.rtol", "must be positive");
  check(s.atol > 0.0, "solver.atol", "must be positive");
  check(s.qr_threshold > 0.0, "solver.qr_threshold", "must be positive");
  if (cfg.experiment == ExperimentKind::sbm_trotter) {
    const double ratio = s.sample_dt / s.tau;
    check(std::abs(ratio - std::round(ratio)) < 1e-9, "solver.sample_dt",
          "must be a multiple of solver.tau");
  }

  const bool sweeps = cfg.experiment == ExperimentKind::holstein_sweep ||
                     cfg.experiment == ExperimentKind::schmidt_analysis;
  if (sweeps) validate_sweep(cfg);
  if (cfg.experiment == ExperimentKind::hardware_compile) {
    check(cfg.landscape.points >= 2, "landscape.points", "need at least two points");
    check(cfg.landscape.theta_min < cfg.landscape.theta_max, "landscape.theta_max",
          "must exceed theta_min");
    check(m.n_sites == 2, "model.n_sites", "the hardware fixture has two sites");
    check(e.n_qubits == 1, "encoder.n_qubits", "the hardware fixture uses one qubit per mode");
    check(e.shared, "encoder.shared", "the hardware fixture shares one encoder");
  }
}

void validate_sweep(const ExperimentConfig& cfg) {
  check(!cfg.sweep.g_values.empty(), "sweep.g_values", "must not be empty");
  for (std::size_t i = 0; i < cfg.sweep.g_values.size(); ++i) {
    check(cfg.sweep.g_values[i] >= 0.0, "sweep.g_values[" + std::to_string(i) + "]",
          "must be non-negative");
  }
  if (cfg.experiment != ExperimentKind::holstein_sweep) return;
  check(!cfg.sweep.n_qubits.empty(), "sweep.n_qubits", "must not be empty");
  for (std::size_t i = 0; i < cfg.sweep.n_qubits.size(); ++i) {
    const std::size_t nq = cfg.sweep.n_qubits[i];
    check(nq >= 1 && nq <= 4 && (std::size_t{1} << nq) <= cfg.encoder.n_levels,
          "sweep.n_qubits[" + std::to_string(i) + "]", "must lie in [1, 4] with 2^n <= n_levels");
  }
}

HolsteinParams holstein_params(const ExperimentConfig& cfg, double g, std::size_t n_levels) {
  HolsteinParams p;
  p.n_sites = cfg.model.n_sites;
  p.v_hop = cfg.model.v_hop;
  p.omega = cfg.model.omega;
  p.g = g;
  p.n_levels = n_levels;
  p.periodic = cfg.model.periodic;
  return p;
}

SpinBosonParams spin_boson_params(const ExperimentConfig& cfg, std::size_t n_levels) {
  SpinBosonParams p;
  p.epsilon = cfg.model.epsilon;
  p.delta = cfg.model.delta;
  p.n_levels = n_levels;
  if (cfg.model.sub_ohmic) {
    const SubOhmicConfig& so = *cfg.model.sub_ohmic;
    p.modes = discretize_sub_ohmic({so.alpha, so.s, so.omega_c}, so.n_modes);
  } else {
    p.modes = cfg.model.modes;
  }
  return p;
}

std::string format_number(double x) {
  std::ostringstream out;
  out << std::setprecision(15) << x;
  return out.str();
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& hash, const std::vector<std::string>& header)
      : out_(path) {
    require(static_cast<bool>(out_), ErrorCode::resource, "cannot write " + path.string());
    out_ << "# config_hash: " << hash << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::resource, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void write_encoders(const fs::path& dir, const EncoderSet& encs, json& files) {
  fs::create_directories(dir);
  for (const auto& [label, enc] : encs) {
    const fs::path file = dir / (label + ".json");
    write_json(file, to_json(enc));
    files.push_back(file.lexically_relative(dir.parent_path()).generic_string());
  }
}

double max_deviation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<double> sample_times(double t_end, double dt) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor(t_end / dt + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) * dt);
  return out;
}

EncoderSet identity_encoders(const SumOfProducts& h, std::size_t n_qubits) {
  EncoderSet encs;
  for (const auto& dof : h.dofs()) {
    if (dof.kind == DofKind::phonon) encs.emplace(dof.label, identity_encoder(dof, n_qubits));
  }
  return encs;
}

std::vector<std::string> phonon_labels(const SumOfProducts& h) {
  std::vector<std::string> out;
  for (const auto& dof : h.dofs()) {
    if (dof.kind == DofKind::phonon) out.push_back(dof.label);
  }
  return out;
}

MacroOptions macro_options(const ExperimentConfig& cfg, const SumOfProducts& h) {
  MacroOptions mo;
  mo.max_iterations = cfg.solver.max_macro_iter;
  mo.e_tol = cfg.solver.e_tol;
  mo.solve_tol = cfg.solver.solve_tol;
  mo.vqe.gtol = cfg.solver.vqe_gtol;
  mo.vqe.max_iterations = cfg.solver.vqe_max_iter;
  mo.seed = cfg.seed;
  if (cfg.encoder.shared) mo.shared_groups = {phonon_labels(h)};
  return mo;
}

struct HolsteinRun {
  MacroResult macro;
  AnsatzCircuit circuit;
};

HolsteinRun run_holstein_macro(const ExperimentConfig& cfg, const HolsteinParams& p,
                               std::size_t n_qubits) {
  const SumOfProducts h = build_holstein(p);
  const EncoderSet encs = identity_encoders(h, n_qubits);
  HolsteinAnsatzOptions ao;
  ao.n_layers = cfg.solver.layers;
  HolsteinRun run{{}, holstein_ansatz(p, encs, ao)};
  run.macro = macro_iterate(h, run.circuit, encs, macro_options(cfg, h));
  return run;
}

double holstein_binary_energy(const ExperimentConfig& cfg, const HolsteinParams& p,
                              std::size_t n_qubits) {
  HolsteinParams pb = p;
  pb.n_levels = std::size_t{1} << n_qubits;
  const SumOfProducts hb = build_holstein(pb);
  HolsteinAnsatzOptions ao;
  ao.n_layers = cfg.solver.binary_layers;
  const AnsatzCircuit circ = holstein_ansatz(pb, binary_encoders(hb, n_qubits), ao);
  VqeOptions vo;
  vo.gtol = cfg.solver.vqe_gtol;
  vo.max_iterations = cfg.solver.vqe_max_iter;
  return run_binary_baseline(hb, circ, n_qubits, vo).energy;
}

double holstein_exact_energy(const HolsteinParams& p) {
  const SumOfProducts h = build_holstein(p);
  return cached_exact_ground_state(h, holstein_reference(h.dofs()).amplitudes).energy;
}

// Reorders a three-DOF operator from (e, p0, p1) to (p0, e, p1).
SumOfProducts hardware_order(const SumOfProducts& h) {
  const std::vector<std::size_t> new_position{1, 0, 2};
  std::vector<DegreeOfFreedom> dofs(3);
  for (std::size_t k = 0; k < 3; ++k) dofs[new_position[k]] = h.dofs()[k];
  SumOfProducts out(dofs);
  for (const ProductTerm& t : h.terms()) {
    ProductTerm moved;
    moved.coefficient = t.coefficient;
    for (const Factor& f : t.factors) moved.factors.push_back({new_position[f.dof], f.matrix});
    std::sort(moved.factors.begin(), moved.factors.end(),
              [](const Factor& a, const Factor& b) { return a.dof < b.dof; });
    out.add_term(std::move(moved));
  }
  return out;
}

ComplexMatrix pauli_form_dense(const std::vector<std::pair<std::string, double>>& terms) {
  ComplexMatrix out = ComplexMatrix::Zero(8, 8);
  for (const auto& [letters, coef] : terms) out += coef * pauli_string(letters);
  return out;
}

// Permutes a (e, p0, p1) statevector of qubit DOFs to (p0, e, p1).
ComplexVector to_hardware_order(const ComplexVector& psi) {
  ComplexVector out(8);
  for (int e = 0; e < 2; ++e) {
    for (int p0 = 0; p0 < 2; ++p0) {
      for (int p1 = 0; p1 < 2; ++p1) out(4 * p0 + 2 * e + p1) = psi(4 * e + 2 * p0 + p1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment runners. Each fills `summary["results"]` and writes its files.

void run_holstein_vqe(const ExperimentConfig& cfg, const fs::path& dir, const std::string& hash,
                      json& results) {
  const HolsteinParams p = holstein_params(cfg, cfg.model.g, cfg.encoder.n_levels);
  const SumOfProducts h = build_holstein(p);

  std::ofstream jsonl(dir / "records.jsonl");
  CsvWriter csv(dir / "macro.csv", hash,
                {"iteration", "energy", "energy_after_sweep", "residual_norm", "rejected"});
  const EncoderSet encs = identity_encoders(h, cfg.encoder.n_qubits);
  HolsteinAnsatzOptions ao;
  ao.n_layers = cfg.solver.layers;
  const AnsatzCircuit circ = holstein_ansatz(p, encs, ao);
  MacroOptions mo = macro_options(cfg, h);
  mo.on_record = [&](const MacroIterationRecord& r) {
    jsonl << to_json(r).dump() << "\n";
    csv.row({std::to_string(r.iteration), format_number(r.energy), format_number(r.energy_after_sweep),
             format_number(r.residual_norm), std::to_string(r.rejected_updates.size())});
  };
  const MacroResult macro = macro_iterate(h, circ, encs, mo);

  json files = json::array();
  if (!macro.records.empty()) write_encoders(dir / "encoders", macro.records.back().encoders, files);
  results["energy"] = macro.energy();
  results["iterations"] = macro.records.size();
  results["converged"] = macro.converged;
  results["aborted"] = macro.aborted;
  results["encoder_files"] = files;
  if (cfg.solver.exact_reference) results["e_exact"] = holstein_exact_energy(p);
  if (cfg.solver.shots > 0 && !macro.records.empty()) {
    const auto& last = macro.records.back();
    const HybridState phi = evaluate_state(circ, last.theta);
    const SampledValue sv =
        sampled_expectation(phi, encode_hamiltonian(h, last.encoders), cfg.solver.shots, cfg.seed);
    results["sampled_energy"] = sv.mean;
    results["sampled_standard_error"] = sv.standard_error;
  }
  if (macro.aborted) fail(ErrorCode::convergence, "macro-iteration aborted: " + macro.message);
}

void run_holstein_sweep(const ExperimentConfig& cfg, const fs::path& dir, const std::string& hash,
                        json& results) {
  CsvWriter csv(dir / "sweep.csv", hash,
                {"g", "n_levels", "n_l", "e_variational", "e_binary", "e_exact", "iters"});
  json rows = json::array();
  std::vector<std::string> failures;
  for (double g : cfg.sweep.g_values) {
    const HolsteinParams p = holstein_params(cfg, g, cfg.encoder.n_levels);
    const double e_exact = cfg.solver.exact_reference ? holstein_exact_energy(p)
                                                      : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t nq : cfg.sweep.n_qubits) {
      const HolsteinRun run = run_holstein_macro(cfg, p, nq);
      const double e_binary = holstein_binary_energy(cfg, p, nq);
      csv.row({format_number(g), std::to_string(p.n_levels), std::to_string(nq),
               format_number(run.macro.energy()), format_number(e_binary), format_number(e_exact),
               std::to_string(run.macro.records.size())});
      json row = {{"g", g},
                  {"n_l", nq},
                  {"e_variational", run.macro.energy()},
                  {"e_binary", e_binary},
                  {"iters", run.macro.records.size()},
                  {"converged", run.macro.converged}};
      if (cfg.solver.exact_reference) row["e_exact"] = e_exact;
      if (run.macro.aborted) {
        row["aborted"] = run.macro.message;
        failures.push_back("g=" + format_number(g) + " n_l=" + std::to_string(nq));
      }
      rows.push_back(row);
    }
  }
  results["rows"] = rows;
  if (!failures.empty()) {
    std::string joined;
    for (const auto& f : failures) joined += (joined.empty() ? "" : ", ") + f;
    fail(ErrorCode::convergence, "macro-iteration aborted for " + joined);
  }
}

struct SpinRun {
  Trajectory trajectory;
  AnsatzCircuit circuit;
};

SpinRun run_spin_vqd(const ExperimentConfig& cfg, std::size_t n_levels, std::size_t n_qubits,
                     std::size_t layers, bool binary) {
  const SpinBosonParams p = spin_boson_params(cfg, n_levels);
  const SumOfProducts h = build_spin_boson(p);
  EncoderSet encs = binary ? binary_encoders(h, n_qubits) : identity_encoders(h, n_qubits);
  const SumOfProducts he = encode_hamiltonian(h, encs);
  SpinRun run{{}, vha_ansatz(he, spin_boson_initial_state(he.dofs()), phonon_labels(h), layers)};
  DynamicsState s0;
  s0.theta = RealVector::Zero(static_cast<Eigen::Index>(run.circuit.n_params));
  s0.encoders = std::move(encs);
  VqdOptions vo;
  vo.rtol = cfg.solver.rtol;
  vo.atol = cfg.solver.atol;
  vo.split = cfg.solver.split;
  vo.split_dt = cfg.solver.tau;
  vo.qr_threshold = cfg.solver.qr_threshold;
  run.trajectory = vqd_evolve(h, run.circuit, s0, cfg.solver.t_end, cfg.solver.sample_dt, vo);
  return run;
}

std::vector<double> spin_exact(const ExperimentConfig& cfg, const std::vector<double>& times) {
  const SumOfProducts h = build_spin_boson(spin_boson_params(cfg, cfg.encoder.n_levels));
  return cached_spin_trajectory(h, spin_boson_initial_state(h.dofs()), times);
}

void run_sbm_vqd(const ExperimentConfig& cfg, const fs::path& dir, const std::string& hash,
                 json& results) {
  const std::size_t nq = cfg.encoder.n_qubits;
  const SpinRun var = run_spin_vqd(cfg, cfg.encoder.n_levels, nq, cfg.solver.layers, false);
  const SpinRun bin = run_spin_vqd(cfg, std::size_t{1} << nq, nq, cfg.solver.binary_layers, true);
  const std::vector<double> times = sample_times(cfg.solver.t_end, cfg.solver.sample_dt);
  std::vector<double> exact;
  if (cfg.solver.exact_reference) exact = spin_exact(cfg, times);

  const auto sz_var = var.trajectory.series("sz");
  const auto sz_bin = bin.trajectory.series("sz");
  {
    CsvWriter csv(dir / "sbm_vqd.csv", hash, {"time", "sz_variational", "sz_binary", "sz_exact"});
    const std::size_t n = std::min(sz_var.size(), sz_bin.size());
    for (std::size_t k = 0; k < n; ++k) {
      csv.row({format_number(times[k]), format_number(sz_var[k]), format_number(sz_bin[k]),
               exact.empty() ? "nan" : format_number(exact[k])});
    }
  }
  {
    std::ofstream out(dir / "trajectory.csv");
    write_trajectory_csv(out, var.trajectory, {"sz", "energy", "c_drift"}, hash);
  }
  json files = json::array();
  write_encoders(dir / "encoders", var.trajectory.final_state.encoders, files);
  write_json(dir / "checkpoint.json", to_json(var.trajectory.final_state));

  results["n_params"] = var.circuit.n_params;
  results["qr_events"] = var.trajectory.qr_events;
  results["encoder_files"] = files;
  if (!exact.empty()) {
    results["max_deviation_variational"] = max_deviation(sz_var, exact);
    results["max_deviation_binary"] = max_deviation(sz_bin, exact);
  }
  for (const auto* run : {&var, &bin}) {
    if (run->trajectory.truncated) fail(ErrorCode::stiffness, run->trajectory.diagnostic);
  }
}

void run_sbm_trotter(const ExperimentConfig& cfg, const fs::path& dir, const std::string& hash,
                     json& results) {
  const SumOfProducts h = build_spin_boson(spin_boson_params(cfg, cfg.encoder.n_levels));
  const EncoderSet encs = identity_encoders(h, cfg.encoder.n_qubits);
  const SumOfProducts he = encode_hamiltonian(h, encs);
  const Trajectory traj = trotter_evolve_with_encoder(
      h, spin_boson_initial_state(he.dofs()), encs, cfg.solver.t_end, cfg.solver.tau,
      cfg.solver.sample_dt);
  const std::vector<double> times = sample_times(cfg.solver.t_end, cfg.solver.sample_dt);
  std::vector<double> exact;
  if (cfg.solver.exact_reference) exact = spin_exact(cfg, times);
  const auto sz = traj.series("sz");
  {
    std::ofstream out(dir / "trajectory.csv");
    write_trajectory_csv(out, traj, {"sz", "energy", "c_drift"}, hash);
  }
  {
    CsvWriter csv(dir / "sbm_trotter.csv", hash, {"time", "sz_trotter", "sz_exact"});
    for (std::size_t k = 0; k < sz.size(); ++k) {
      csv.row({format_number(times[k]), format_number(sz[k]),
               exact.empty() ? "nan" : format_number(exact[k])});
    }
  }
  json files = json::array();
  write_encoders(dir / "encoders", traj.final_state.encoders, files);
  results["encoder_files"] = files;
  if (!exact.empty()) results["max_deviation"] = max_deviation(sz, exact);
  if (traj.truncated) fail(ErrorCode::stiffness, traj.diagnostic);
}

void run_schmidt(const ExperimentConfig& cfg, const fs::path& dir, const std::string& hash,
                 json& results) {
  CsvWriter csv(dir / "schmidt.csv", hash, {"g", "entropy", "s1", "s2", "s3", "s4"});
  json rows = json::array();
  const auto k = static_cast<Eigen::Index>(std::size_t{1} << cfg.encoder.n_qubits);
  for (double g : cfg.sweep.g_values) {
    const HolsteinParams p = holstein_params(cfg, g, cfg.encoder.n_levels);
    const SumOfProducts h = build_holstein(p);
    const GroundState gs = cached_exact_ground_state(h, holstein_reference(h.dofs()).amplitudes);
    const SchmidtSpectrum sp = schmidt_spectrum(gs.state, {phonon_label(p.n_sites - 1)});
    std::vector<std::string> cells{format_number(g), format_number(sp.entropy)};
    for (Eigen::Index i = 0; i < 4; ++i) {
      cells.push_back(format_number(i < sp.singular_values.size() ? sp.singular_values(i) : 0.0));
    }
    csv.row(cells);
    const double kept = sp.singular_values.head(std::min(k, sp.singular_values.size())).squaredNorm();
    rows.push_back({{"g", g},
                    {"energy", gs.energy},
                    {"entropy", sp.entropy},
                    {"kept_weight", kept},
                    {"entropy_bound", static_cast<double>(k) * std::exp(-sp.entropy)}});
  }
  results["rows"] = rows;
}

void run_hardware(const ExperimentConfig& cfg, const fs::path& dir, const std::string& hash,
                  json& results) {
  const HolsteinParams p = holstein_params(cfg, cfg.model.g, cfg.encoder.n_levels);
  ComplexMatrix c = ComplexMatrix::Identity(static_cast<Eigen::Index>(p.n_levels), 2);
  if (p.n_levels > 2) {
    // Optimize the shared encoder under the single-parameter circuit first.
    const SumOfProducts h = build_holstein(p);
    const EncoderSet encs = identity_encoders(h, 1);
    HolsteinAnsatzOptions ao;
    ao.n_layers = 1;
    ao.shared_displacement = true;
    ao.hopping = false;
    const MacroResult macro = macro_iterate(h, holstein_ansatz(p, encs, ao), encs, macro_options(cfg, h));
    if (macro.aborted) fail(ErrorCode::convergence, "encoder optimization aborted: " + macro.message);
    c = macro.records.back().encoders.at(phonon_label(0)).c;
    results["encoder_energy"] = macro.energy();
  }
  const HardwareHamiltonian hw = compile_hardware_hamiltonian(p, c);

  const auto pauli_json = [](const PauliCoefficients& pc) {
    return json{{"i", pc.i}, {"x", pc.x}, {"y", pc.y}, {"z", pc.z}};
  };
  json terms = json::array();
  for (const auto& [letters, coef] : hw.pauli_terms) terms.push_back({{"pauli", letters}, {"coefficient", coef}});
  write_json(dir / "pauli_hamiltonian.json",
             {{"qubit_order", {"p0", "e", "p1"}},
              {"c1", pauli_json(hw.number)},
              {"c2", pauli_json(hw.displacement)},
              {"terms", terms},
              {"config_hash", hash}});

  CsvWriter csv(dir / "landscape.csv", hash, {"theta", "energy"});
  const LandscapeConfig& ls = cfg.landscape;
  double best_theta = ls.theta_min;
  double best_energy = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ls.points; ++i) {
    const double theta =
        ls.theta_min + (ls.theta_max - ls.theta_min) * static_cast<double>(i) / static_cast<double>(ls.points - 1);
    const double e = hardware_energy(hw, theta) / p.v_hop;
    csv.row({format_number(theta), format_number(e)});
    if (e < best_energy) {
      best_energy = e;
      best_theta = theta;
    }
  }

  // The compiled circuit must prepare the same state as the ansatz.
  HolsteinParams p2 = p;
  p2.n_levels = 2;
  const SumOfProducts h2 = build_holstein(p2);
  HolsteinAnsatzOptions ao;
  ao.n_layers = 1;
  ao.shared_displacement = true;
  ao.hopping = false;
  const AnsatzCircuit circ = holstein_ansatz(p2, binary_encoders(h2, 1), ao);
  double circuit_mismatch = 0.0;
  for (double theta : {-0.9, -0.3, 0.2, 0.6245, 1.1}) {
    RealVector param(1);
    param(0) = -theta;  // e^{i theta n Y} = e^{-theta n (b^dagger - b)}
    const ComplexVector a = to_hardware_order(evaluate_state(circ, param).amplitudes);
    const ComplexVector b = compiled_hardware_state(theta);
    circuit_mismatch = std::max(circuit_mismatch, 1.0 - std::abs(a.dot(b)));
  }

  results["c1"] = pauli_json(hw.number);
  results["c2"] = pauli_json(hw.displacement);
  results["dense_mismatch"] = hw.dense_mismatch;
  results["circuit_mismatch"] = circuit_mismatch;
  results["landscape_argmin"] = best_theta;
  results["landscape_min"] = best_energy;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& [k, text] : kKindNames) {
    if (k == kind) return text;
  }
  return "unknown";
}

bool is_spin_boson(ExperimentKind kind) {
  return kind == ExperimentKind::sbm_vqd || kind == ExperimentKind::sbm_trotter;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  ObjectReader root(j, "");
  const json* kind = root.find("experiment");
  if (kind == nullptr) config_error("experiment", "missing key");
  if (!kind->is_string()) config_error("experiment", "expected a string");
  cfg.experiment = kind_from_string(kind->get<std::string>());
  static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed is read as a count");
  root.read("seed", cfg.seed);
  root.read("output_dir", cfg.output_dir);

  if (const json* m = root.find("model")) {
    ObjectReader r(*m, "model");
    if (!is_spin_boson(cfg.experiment)) {
      r.read("n_sites", cfg.model.n_sites);
      r.read("v_hop", cfg.model.v_hop);
      r.read("omega", cfg.model.omega);
      r.read("g", cfg.model.g);
      r.read("periodic", cfg.model.periodic);
    } else {
      r.read("epsilon", cfg.model.epsilon);
      r.read("delta", cfg.model.delta);
      if (const json* modes = r.find("modes")) {
        if (!modes->is_array()) config_error("model.modes", "expected an array");
        cfg.model.modes.clear();
        for (std::size_t i = 0; i < modes->size(); ++i) {
          ObjectReader mr((*modes)[i], "model.modes[" + std::to_string(i) + "]");
          SpinBosonMode mode;
          mr.read("omega", mode.omega);
          mr.read("g", mode.g);
          mr.finish();
          cfg.model.modes.push_back(mode);
        }
      }
      if (const json* so = r.find("sub_ohmic")) {
        if (!so->is_null()) {
          ObjectReader sr(*so, "model.sub_ohmic");
          SubOhmicConfig sub;
          sr.read("alpha", sub.alpha);
          sr.read("s", sub.s);
          sr.read("omega_c", sub.omega_c);
          sr.read("n_modes", sub.n_modes);
          sr.finish();
          cfg.model.sub_ohmic = sub;
        }
      }
    }
    r.finish();
  }
  if (const json* e = root.find("encoder")) {
    ObjectReader r(*e, "encoder");
    r.read("n_levels", cfg.encoder.n_levels);
    r.read("n_qubits", cfg.encoder.n_qubits);
    r.read("shared", cfg.encoder.shared);
    r.finish();
  }
  if (const json* s = root.find("solver")) {
    ObjectReader r(*s, "solver");
    SolverConfig& sc = cfg.solver;
    r.read("layers", sc.layers);
    r.read("binary_layers", sc.binary_layers);
    r.read("max_macro_iter", sc.max_macro_iter);
    r.read("e_tol", sc.e_tol);
    r.read("solve_tol", sc.solve_tol);
    r.read("vqe_gtol", sc.vqe_gtol);
    r.read("vqe_max_iter", sc.vqe_max_iter);
    r.read("shots", sc.shots);
    r.read("t_end", sc.t_end);
    r.read("sample_dt", sc.sample_dt);
    r.read("tau", sc.tau);
    r.read("rtol", sc.rtol);
    r.read("atol", sc.atol);
    r.read("split", sc.split);
    r.read("qr_threshold", sc.qr_threshold);
    r.read("exact_reference", sc.exact_reference);
    r.finish();
  }
  if (const json* s = root.find("sweep")) {
    ObjectReader r(*s, "sweep");
    r.read("g_values", cfg.sweep.g_values);
    r.read("n_qubits", cfg.sweep.n_qubits);
    r.finish();
  }
  if (const json* s = root.find("landscape")) {
    ObjectReader r(*s, "landscape");
    r.read("theta_min", cfg.landscape.theta_min);
    r.read("theta_max", cfg.landscape.theta_max);
    r.read("points", cfg.landscape.points);
    r.finish();
  }
  root.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config, "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, path.string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(j);
}

json to_json(const ExperimentConfig& cfg) {
  json model;
  if (!is_spin_boson(cfg.experiment)) {
    model = {{"n_sites", cfg.model.n_sites},
             {"v_hop", cfg.model.v_hop},
             {"omega", cfg.model.omega},
             {"g", cfg.model.g},
             {"periodic", cfg.model.periodic}};
  } else {
    json modes = json::array();
    for (const auto& m : cfg.model.modes) modes.push_back({{"omega", m.omega}, {"g", m.g}});
    model = {{"epsilon", cfg.model.epsilon}, {"delta", cfg.model.delta}, {"modes", modes}};
    if (cfg.model.sub_ohmic) {
      const SubOhmicConfig& so = *cfg.model.sub_ohmic;
      model["sub_ohmic"] = {{"alpha", so.alpha}, {"s", so.s}, {"omega_c", so.omega_c}, {"n_modes", so.n_modes}};
    } else {
      model["sub_ohmic"] = nullptr;
    }
  }
  const SolverConfig& s = cfg.solver;
  return {{"experiment", to_string(cfg.experiment)},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir},
          {"model", model},
          {"encoder",
           {{"n_levels", cfg.encoder.n_levels}, {"n_qubits", cfg.encoder.n_qubits}, {"shared", cfg.encoder.shared}}},
          {"solver",
           {{"layers", s.layers},
            {"binary_layers", s.binary_layers},
            {"max_macro_iter", s.max_macro_iter},
            {"e_tol", s.e_tol},
            {"solve_tol", s.solve_tol},
            {"vqe_gtol", s.vqe_gtol},
            {"vqe_max_iter", s.vqe_max_iter},
            {"shots", s.shots},
            {"t_end", s.t_end},
            {"sample_dt", s.sample_dt},
            {"tau", s.tau},
            {"rtol", s.rtol},
            {"atol", s.atol},
            {"split", s.split},
            {"qr_threshold", s.qr_threshold},
            {"exact_reference", s.exact_reference}}},
          {"sweep", {{"g_values", cfg.sweep.g_values}, {"n_qubits", cfg.sweep.n_qubits}}},
          {"landscape",
           {{"theta_min", cfg.landscape.theta_min},
            {"theta_max", cfg.landscape.theta_max},
            {"points", cfg.landscape.points}}}};
}

std::string config_hash(const ExperimentConfig& cfg) { return git_blob_hash(to_json(cfg).dump()); }

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const std::string hash = config_hash(cfg);
  RunReport report;
  report.directory = fs::path(cfg.output_dir) / (std::string(to_string(cfg.experiment)) + "-" + hash.substr(0, 8));
  std::error_code ec;
  fs::create_directories(report.directory, ec);
  require(!ec, ErrorCode::resource, "cannot create " + report.directory.string() + ": " + ec.message());

  json& summary = report.summary;
  summary["experiment"] = to_string(cfg.experiment);
  summary["config"] = to_json(cfg);
  summary["config_hash"] = hash;
  json results = json::object();
  const auto finish = [&](const std::string& status) {
    summary["status"] = status;
    summary["results"] = results;
    summary["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(report.directory / "summary.json", summary);
  };
  try {
    switch (cfg.experiment) {
      case ExperimentKind::holstein_vqe: run_holstein_vqe(cfg, report.directory, hash, results); break;
      case ExperimentKind::holstein_sweep: run_holstein_sweep(cfg, report.directory, hash, results); break;
      case ExperimentKind::sbm_vqd: run_sbm_vqd(cfg, report.directory, hash, results); break;
      case ExperimentKind::sbm_trotter: run_sbm_trotter(cfg, report.directory, hash, results); break;
      case ExperimentKind::schmidt_analysis: run_schmidt(cfg, report.directory, hash, results); break;
      case ExperimentKind::hardware_compile: run_hardware(cfg, report.directory, hash, results); break;
    }
  } catch (const Error& e) {
    results["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    finish("failed");
    throw;
  }
  finish("ok");
  return report;
}

// ---------------------------------------------------------------------------

PauliCoefficients pauli_decompose(const ComplexMatrix& op2) {
  require(op2.rows() == 2 && op2.cols() == 2, ErrorCode::contract_violation,
          "Pauli decomposition needs a 2x2 operator");
  require(is_hermitian(op2, 1e-12), ErrorCode::hermiticity, "operator is not Hermitian");
  PauliCoefficients out;
  out.i = 0.5 * (op2(0, 0) + op2(1, 1)).real();
  out.z = 0.5 * (op2(0, 0) - op2(1, 1)).real();
  out.x = 0.5 * (op2(0, 1) + op2(1, 0)).real();
  out.y = 0.5 * (op2(1, 0) - op2(0, 1)).imag();
  return out;
}

HardwareHamiltonian compile_hardware_hamiltonian(const HolsteinParams& p, const ComplexMatrix& c) {
  require(p.n_sites == 2, ErrorCode::contract_violation, "the hardware fixture has two sites");
  require(c.rows() == static_cast<Eigen::Index>(p.n_levels) && c.cols() == 2,
          ErrorCode::contract_violation, "encoder must map the mode onto one qubit");
  const SumOfProducts h = build_holstein(p);
  EncoderSet encs;
  for (std::size_t j = 0; j < 2; ++j) {
    BasisEncoder enc = identity_encoder(h.dofs()[j + 1], 1);
    enc.c = c;
    check_encoder(enc, 1e-10);
    encs.emplace(enc.label, std::move(enc));
  }
  const BasisEncoder& enc = encs.begin()->second;

  HardwareHamiltonian hw;
  hw.number = pauli_decompose(encode_local_operator(boson_number(p.n_levels), enc));
  hw.displacement = pauli_decompose(
      encode_local_operator(boson_annihilation(p.n_levels) + boson_creation(p.n_levels), enc));

  std::map<std::string, double> terms;
  const auto add = [&terms](const std::string& letters, double coef) { terms[letters] += coef; };
  const double w = p.omega;
  const double gw = p.g * p.omega;
  add("IXI", -p.v_hop);
  const std::pair<char, double> number[] = {
      {'I', hw.number.i}, {'X', hw.number.x}, {'Y', hw.number.y}, {'Z', hw.number.z}};
  const std::pair<char, double> displacement[] = {
      {'I', hw.displacement.i}, {'X', hw.displacement.x}, {'Y', hw.displacement.y}, {'Z', hw.displacement.z}};
  for (const auto& [letter, coef] : number) {
    add(std::string{letter, 'I', 'I'}, w * coef);
    add(std::string{'I', 'I', letter}, w * coef);
  }
  // Electron on site 0 is qubit state |0>: n_0 = (1 + Z)/2, n_1 = (1 - Z)/2.
  for (const auto& [letter, coef] : displacement) {
    add(std::string{letter, 'I', 'I'}, 0.5 * gw * coef);
    add(std::string{letter, 'Z', 'I'}, 0.5 * gw * coef);
    add(std::string{'I', 'I', letter}, 0.5 * gw * coef);
    add(std::string{'I', 'Z', letter}, -0.5 * gw * coef);
  }
  for (const auto& [letters, coef] : terms) {
    if (coef != 0.0) hw.pauli_terms.emplace_back(letters, coef);
  }

  const ComplexMatrix from_terms = build_dense(hardware_order(encode_hamiltonian(h, encs)));
  hw.dense_mismatch = max_abs(from_terms - pauli_form_dense(hw.pauli_terms));
  return hw;
}

ComplexVector compiled_hardware_state(double theta) {
  const std::size_t dims[] = {2, 2, 2};
  const auto rz = [](double angle) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, -0.5 * angle);
    m(1, 1) = std::polar(1.0, 0.5 * angle);
    return m;
  };
  ComplexMatrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard /= std::sqrt(2.0);
  ComplexMatrix cnot = ComplexMatrix::Zero(4, 4);  // control first
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;

  ComplexVector psi = ComplexVector::Zero(8);
  psi(0) = 1.0;
  const auto one = [&](std::size_t q, const ComplexMatrix& u) {
    const std::size_t sites[] = {q};
    apply_on_support(psi, dims, sites, u);
  };
  const auto controlled = [&](std::size_t control, std::size_t target) {
    const std::size_t sites[] = {control, target};
    apply_on_support(psi, dims, sites, cnot);
  };
  constexpr double kQuarter = std::numbers::pi / 2.0;
  one(0, rz(-kQuarter));
  one(1, hadamard);
  one(2, rz(-kQuarter));
  one(0, hadamard);
  one(2, hadamard);
  controlled(1, 0);
  one(0, rz(-theta));
  controlled(1, 0);
  one(0, rz(-theta));
  controlled(1, 2);
  one(2, rz(theta));
  controlled(1, 2);
  one(2, rz(-theta));
  one(0, hadamard);
  one(2, hadamard);
  one(0, rz(kQuarter));
  one(2, rz(kQuarter));
  return psi;
}

double hardware_energy(const HardwareHamiltonian& hw, double theta) {
  const ComplexVector psi = compiled_hardware_state(theta);
  const cplx e = psi.dot(pauli_form_dense(hw.pauli_terms) * psi);
  return e.real();
}

}  // namespace vbse
