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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vbse/circuits.hpp"
#include "vbse/encoder.hpp"

namespace vbse {

struct VqeOptions {
  double gtol = 1e-7;
  int max_iterations = 500;
};

struct VqeResult {
  RealVector theta;
  double energy = 0.0;
  double gradient_inf = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// Energy and analytic gradient 2 Re<d_k phi|H|phi>.
double energy_and_gradient(const AnsatzCircuit& circ, const SumOfProducts& h_encoded,
                           const RealVector& theta, RealVector& gradient);

/// BFGS on <phi(theta)|H~|phi(theta)> from theta0.
VqeResult vqe_minimize(const AnsatzCircuit& circ, const SumOfProducts& h_encoded,
                       const RealVector& theta0, const VqeOptions& options = {});

struct MacroIterationRecord {
  int iteration = 0;
  double energy = 0.0;  // VQE energy with this iteration's starting encoders
  RealVector theta;
  EncoderSet encoders;  // encoders after this iteration's sweep
  double residual_norm = 0.0;  // max ||(1 - P) G||_inf over modes after the sweep
  double energy_after_sweep = 0.0;
  std::vector<std::string> rejected_updates;  // modes whose solved root raised the energy
};

struct MacroOptions {
  int max_iterations = 10;
  double e_tol = 1e-7;
  VqeOptions vqe;
  EncoderField field = EncoderField::real;
  std::uint64_t seed = 0;
  double solve_tol = 1e-8;
  /// Groups of labels sharing one encoder; modes not listed are solved alone.
  std::vector<std::vector<std::string>> shared_groups;
  /// Called after every recorded iteration.
  std::function<void(const MacroIterationRecord&)> on_record;
};

struct MacroResult {
  std::vector<MacroIterationRecord> records;
  bool converged = false;
  bool aborted = false;
  std::string message;

  double energy() const { return records.empty() ? 0.0 : records.back().energy; }
};

/// Alternates VQE under the current encoded Hamiltonian with a sequential
/// sweep of encoder solves over the encoded modes, until the VQE energy
/// changes by less than e_tol. The circuit stays fixed throughout; theta
/// starts at zero and is warm-started afterwards.
MacroResult macro_iterate(const SumOfProducts& h, const AnsatzCircuit& circ,
                          const EncoderSet& encs0, const MacroOptions& options = {});

/// Gray-code encoders on every phonon DOF (each needs exactly 2^n levels).
EncoderSet binary_encoders(const SumOfProducts& h, std::size_t n_qubits_per_mode);

/// VQE energy with fixed Gray-code encoders. `circ` must be built for those
/// encoders.
VqeResult run_binary_baseline(const SumOfProducts& h, const AnsatzCircuit& circ,
                              std::size_t n_qubits_per_mode, const VqeOptions& options = {});

nlohmann::json to_json(const MacroIterationRecord& record);

}  // namespace vbse
