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

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vbse/circuits.hpp"
#include "vbse/encoder.hpp"

namespace vbse {

/// Circuit parameters and encoders at one instant.
struct DynamicsState {
  double time = 0.0;
  RealVector theta;
  EncoderSet encoders;
};

struct TrajectorySample {
  double time = 0.0;
  std::map<std::string, double> observables;  // "sz" (spin models), "energy", "c_drift"
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<double> qr_events;  // times at which encoders were re-orthonormalized
  DynamicsState final_state;
  HybridState final_wavefunction;
  bool truncated = false;
  std::string diagnostic;

  /// Values of one observable across the samples.
  std::vector<double> series(const std::string& name) const;
  std::vector<double> times() const;
};

/// Writes `# config_hash:` when `config_hash` is non-empty, then the header
/// and one row per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<std::string>& columns,
                          const std::string& config_hash = {});

nlohmann::json to_json(const DynamicsState& state);
DynamicsState dynamics_state_from_json(const nlohmann::json& j);

/// Diagonal shift added to the metric M before solving for dtheta/dt.
inline constexpr double kMetricRegularization = 1e-8;

/// Solves (M + 1e-8) dtheta/dt = V with M = Re J^dagger J and
/// V = Im J^dagger H~ phi. Stiffness error when the solve is not finite.
RealVector theta_eom(const AnsatzCircuit& circ, const RealVector& theta,
                     const SumOfProducts& h_encoded);

struct VqdOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Re-orthonormalize the encoders at a sample boundary when the defect
  /// exceeds this.
  double qr_threshold = 1e-8;
  /// Alternate theta and encoder integration over chunks of `split_dt`
  /// instead of integrating them jointly.
  bool split = false;
  double split_dt = 0.01;
};

/// Integrates the circuit parameters and every encoder in `state0` with
/// RK45. The circuit is fixed; its generators do not follow the encoders.
/// Observables are recorded every `sample_dt` up to `t_end`; the returned
/// encoders are orthonormal within 1e-10. A stiff
/// integrator truncates the trajectory and fills `diagnostic`.
Trajectory vqd_evolve(const SumOfProducts& h, const AnsatzCircuit& circ,
                      const DynamicsState& state0, double t_end, double sample_dt,
                      const VqdOptions& options = {});

/// prod_x exp(-i h~_x tau) applied in term order.
HybridState trotter_step(const HybridState& state, const SumOfProducts& h_encoded, double tau);

enum class EncoderStepper { euler, rk4 };

struct TrotterOptions {
  EncoderStepper stepper = EncoderStepper::rk4;
  /// Abort when one step moves an encoder further than this from orthonormal.
  double max_drift = 1e-4;
};

/// Per step: a Trotter step under the current encoded Hamiltonian, then one
/// substep of the encoder equation of motion with the state frozen, QR, and
/// a rebuild of the encoded Hamiltonian. `state0` lives in the encoded space.
Trajectory trotter_evolve_with_encoder(const SumOfProducts& h, const HybridState& state0,
                                       const EncoderSet& encs0, double t_end, double tau,
                                       double sample_dt, const TrotterOptions& options = {});

}  // namespace vbse
