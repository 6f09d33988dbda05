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

// Experiment configs and the batch runner behind the `vbse` command.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vbse/circuits.hpp"
#include "vbse/models.hpp"

namespace vbse {

enum class ExperimentKind {
  holstein_vqe,
  holstein_sweep,
  sbm_vqd,
  sbm_trotter,
  schmidt_analysis,
  hardware_compile,
};

const char* to_string(ExperimentKind kind);
bool is_spin_boson(ExperimentKind kind);

struct SubOhmicConfig {
  double alpha = 10.0;
  double s = 0.25;
  double omega_c = 4.0;
  std::size_t n_modes = 8;
};

struct ModelConfig {
  // Holstein
  std::size_t n_sites = 3;
  double v_hop = 1.0;
  double omega = 1.0;
  double g = 1.0;
  bool periodic = true;
  // Spin-boson
  double epsilon = 0.0;
  double delta = 1.0;
  std::vector<SpinBosonMode> modes{{1.0, 3.0}};
  std::optional<SubOhmicConfig> sub_ohmic;  // replaces `modes` when set
};

struct EncoderConfig {
  std::size_t n_levels = 32;
  std::size_t n_qubits = 1;
  bool shared = false;
};

struct SolverConfig {
  std::size_t layers = 3;
  std::size_t binary_layers = 3;
  int max_macro_iter = 10;
  double e_tol = 1e-7;
  double solve_tol = 1e-8;
  double vqe_gtol = 1e-7;
  int vqe_max_iter = 500;
  std::size_t shots = 0;  // 0 means exact expectation values
  double t_end = 5.0;
  double sample_dt = 0.1;
  double tau = 0.01;
  double rtol = 1e-8;
  double atol = 1e-10;
  bool split = false;
  double qr_threshold = 1e-8;
  bool exact_reference = true;
};

struct SweepConfig {
  std::vector<double> g_values{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<std::size_t> n_qubits{1, 2};
};

struct LandscapeConfig {
  double theta_min = -1.5707963267948966;
  double theta_max = 1.5707963267948966;
  std::size_t points = 181;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::holstein_vqe;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  ModelConfig model;
  EncoderConfig encoder;
  SolverConfig solver;
  SweepConfig sweep;
  LandscapeConfig landscape;
};

/// Strict parse: unknown, missing-type and out-of-range keys raise a config
/// error naming the key path. Absent keys take their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Complete config with every default filled in; model keys follow the
/// experiment family.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Git-style blob hash of the canonical config dump.
std::string config_hash(const ExperimentConfig& cfg);

struct RunReport {
  std::filesystem::path directory;
  nlohmann::json summary;
};

/// Runs the configured experiment and writes its CSV, JSON summary and
/// checkpoints under <output_dir>/<experiment>-<hash8>.
RunReport run_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Two-site hardware fixture. Qubit order: phonon 0, electron, phonon 1.

/// Coefficients of a 2x2 operator on I, X, Y, Z.
struct PauliCoefficients {
  double i = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

PauliCoefficients pauli_decompose(const ComplexMatrix& op2);

struct HardwareHamiltonian {
  PauliCoefficients number;        // encoded b^dagger b
  PauliCoefficients displacement;  // encoded b^dagger + b
  std::vector<std::pair<std::string, double>> pauli_terms;  // e.g. ("IXZ", c)
  double dense_mismatch = 0.0;  // max |sum-of-products - Pauli form|
};

/// Encodes the two-site chain with `c` on both modes and expands it in Pauli
/// strings over (phonon 0, electron, phonon 1).
HardwareHamiltonian compile_hardware_hamiltonian(const HolsteinParams& p, const ComplexMatrix& c);

/// State prepared by the four-CNOT circuit of the single-parameter ansatz at
/// `theta`, in the (phonon 0, electron, phonon 1) qubit order.
ComplexVector compiled_hardware_state(double theta);

/// <H> of the compiled Pauli Hamiltonian in the compiled circuit state.
double hardware_energy(const HardwareHamiltonian& hw, double theta);

}  // namespace vbse
