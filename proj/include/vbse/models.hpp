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

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbse/circuits.hpp"
#include "vbse/encoder.hpp"
#include "vbse/operators.hpp"

namespace vbse {

// ---------------------------------------------------------------------------
// Holstein chain with one electron. DOF order: "e" (site basis), then "p0",
// "p1", ... for the local phonons.

struct HolsteinParams {
  std::size_t n_sites = 3;
  double v_hop = 1.0;
  double omega = 1.0;
  double g = 1.0;
  std::size_t n_levels = 32;
  bool periodic = true;
};

void validate(const HolsteinParams& p);

/// Nearest-neighbour pairs; a periodic chain of two sites has one bond.
std::vector<std::pair<std::size_t, std::size_t>> holstein_bonds(const HolsteinParams& p);

std::string phonon_label(std::size_t j);

SumOfProducts build_holstein(const HolsteinParams& p);

/// Uniform electron superposition times the phonon vacuum, over `dofs`
/// (bare or encoded dimensions).
HybridState holstein_reference(const std::vector<DegreeOfFreedom>& dofs);

struct HolsteinAnsatzOptions {
  std::size_t n_layers = 3;
  /// One displacement angle per layer shared by every site.
  bool shared_displacement = false;
  /// Leave out the hopping rotations (the two-site hardware circuit).
  bool hopping = true;
};

/// Layers of Givens hopping rotations over the bonds followed by displacement
/// rotations n_j (B (b^dagger - b) B^dagger) on each site, acting on the
/// reference state. Generators are encoded with `encs` once.
AnsatzCircuit holstein_ansatz(const HolsteinParams& p, const EncoderSet& encs,
                              const HolsteinAnsatzOptions& options = {});

// ---------------------------------------------------------------------------
// Spin-boson model. DOF order: "s", then "p0", "p1", ...

struct SpinBosonMode {
  double omega = 1.0;
  double g = 0.0;  // coupling c = g * omega
};

struct SpinBosonParams {
  double epsilon = 0.0;
  double delta = 1.0;
  std::vector<SpinBosonMode> modes;
  std::size_t n_levels = 32;
};

void validate(const SpinBosonParams& p);

/// (eps/2) Z + delta X + sum_j g_j w_j Z (b_j + b_j^dagger) + sum_j w_j b_j^dagger b_j.
/// Every term is kept even when its coefficient is zero.
SumOfProducts build_spin_boson(const SpinBosonParams& p);

/// Spin up times the vacuum of every mode, over `dofs`.
HybridState spin_boson_initial_state(const std::vector<DegreeOfFreedom>& dofs);

struct SpectralDensity {
  double alpha = 10.0;
  double s = 0.25;
  double omega_c = 4.0;
};

/// Integral of J(w)/w over (0, inf): (pi/2) alpha Gamma(s) omega_c.
double spectral_weight(const SpectralDensity& sd);

/// Equal-weight quantiles of J(w)/w: w_j solves the normalized cumulative
/// weight = (j - 1/2)/n, c_j^2 = (2/pi) w_j W / n and g_j = c_j / w_j.
std::vector<SpinBosonMode> discretize_sub_ohmic(const SpectralDensity& sd, std::size_t n_modes);

/// Per layer: exp(-i theta h~_x) for every term of `h_encoded`, then the
/// complete Pauli set on each encoded phonon DOF in `encoded_labels`.
AnsatzCircuit vha_ansatz(const SumOfProducts& h_encoded, const HybridState& reference,
                         const std::vector<std::string>& encoded_labels, std::size_t n_layers);

// ---------------------------------------------------------------------------
// Exact oracles.

struct GroundState {
  double energy = 0.0;
  HybridState state;
  double residual = 0.0;
};

/// Dense diagonalization up to 2048 states, restarted Lanczos with full
/// reorthogonalization above. `start` seeds the Krylov space when given.
GroundState exact_ground_state(const SumOfProducts& h,
                               const std::optional<ComplexVector>& start = std::nullopt);

/// exp(-i H t) psi0: eigendecomposition up to 512 states, Krylov above.
HybridState exact_propagate(const SumOfProducts& h, const HybridState& psi0, double t);

/// Observable values along exp(-i H t) psi0 at increasing sample times.
std::vector<double> exact_observable_trajectory(
    const SumOfProducts& h, const HybridState& psi0, const std::vector<double>& times,
    const std::function<double(const HybridState&)>& observable);

/// Krylov propagation of a raw vector (exposed for cross-checks).
ComplexVector krylov_propagate(const TermwiseOperator& op, const ComplexVector& psi, double t,
                               std::size_t krylov_dim = 30, double tol = 1e-11);

/// <Z> on the DOF labelled "s".
double spin_z(const HybridState& state);

// ---------------------------------------------------------------------------
// Disk cache for oracle results, enabled by VBSE_CACHE_DIR.

std::optional<std::string> oracle_cache_dir();

/// Energy and state of the exact ground state, cached by operator content.
GroundState cached_exact_ground_state(const SumOfProducts& h,
                                      const std::optional<ComplexVector>& start = std::nullopt);

/// Cached <Z> trajectory of the spin for exp(-i H t) psi0.
std::vector<double> cached_spin_trajectory(const SumOfProducts& h, const HybridState& psi0,
                                           const std::vector<double>& times);

}  // namespace vbse
