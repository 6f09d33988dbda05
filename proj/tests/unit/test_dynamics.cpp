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
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vbse/dynamics.hpp"
#include "vbse/models.hpp"

using namespace vbse;
using namespace vbse::testing;

namespace {

SpinBosonParams uncoupled(std::size_t n_levels) {
  SpinBosonParams p;
  p.delta = 0.7;
  p.modes = {{1.0, 0.0}};
  p.n_levels = n_levels;
  return p;
}

}  // namespace

TEST_CASE("theta_eom reproduces an exactly representable rotation") {
  const std::vector<DegreeOfFreedom> dofs{{"s", DofKind::spin, 2}};
  ComplexVector up = ComplexVector::Zero(2);
  up(0) = 1.0;
  AnsatzCircuit circ;
  circ.reference = make_state(dofs, up);
  circ.add_gate(Gate({0}, -kI * pauli(PauliKind::X), 0));
  SumOfProducts h(dofs);
  h.add_term(0.9, {{"s", pauli(PauliKind::X)}});
  RealVector theta(1);
  theta(0) = 0.3;
  const RealVector rate = theta_eom(circ, theta, h);
  CHECK(rate(0) == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("VQD follows the uncoupled spin exactly") {
  const SumOfProducts h = build_spin_boson(uncoupled(4));
  EncoderSet encs{{"p0", identity_encoder(h.dofs()[1], 1)}};
  const SumOfProducts he = encode_hamiltonian(h, encs);
  const AnsatzCircuit circ = vha_ansatz(he, spin_boson_initial_state(he.dofs()), {"p0"}, 1);
  DynamicsState s0;
  s0.theta = RealVector::Zero(static_cast<Eigen::Index>(circ.n_params));
  s0.encoders = encs;
  for (const bool split : {false, true}) {
    VqdOptions opts;
    opts.split = split;
    const Trajectory traj = vqd_evolve(h, circ, s0, 2.0, 0.25, opts);
    REQUIRE_FALSE(traj.truncated);
    REQUIRE(traj.samples.size() == 9);
    for (const auto& s : traj.samples) {
      CHECK(std::abs(s.observables.at("sz") - std::cos(2.0 * 0.7 * s.time)) < 1e-6);
      CHECK(s.observables.at("c_drift") < 1e-8);
    }
    for (const auto& [label, enc] : traj.final_state.encoders) CHECK(orthonormality_defect(enc.c) < 1e-10);
  }
}

TEST_CASE("VQD keeps encoders orthonormal under coupling") {
  SpinBosonParams p;
  p.modes = {{1.0, 1.0}};
  p.n_levels = 8;
  const SumOfProducts h = build_spin_boson(p);
  EncoderSet encs{{"p0", identity_encoder(h.dofs()[1], 1)}};
  const SumOfProducts he = encode_hamiltonian(h, encs);
  const AnsatzCircuit circ = vha_ansatz(he, spin_boson_initial_state(he.dofs()), {"p0"}, 2);
  DynamicsState s0;
  s0.theta = RealVector::Zero(static_cast<Eigen::Index>(circ.n_params));
  s0.encoders = encs;
  const Trajectory traj = vqd_evolve(h, circ, s0, 1.0, 0.1);
  REQUIRE_FALSE(traj.truncated);
  for (const auto& s : traj.samples) CHECK(s.observables.at("c_drift") < 1e-6);
  for (const auto& [label, enc] : traj.final_state.encoders) CHECK(orthonormality_defect(enc.c) < 1e-10);
  for (std::size_t k = 1; k < traj.qr_events.size(); ++k) CHECK(traj.qr_events[k] > traj.qr_events[k - 1]);
  const auto exact = exact_observable_trajectory(h, spin_boson_initial_state(h.dofs()), traj.times(), spin_z);
  const auto sz = traj.series("sz");
  for (std::size_t k = 0; k < sz.size(); ++k) CHECK(std::abs(sz[k] - exact[k]) < 0.05);
}

TEST_CASE("a Trotter step of commuting terms is exact") {
  std::mt19937_64 rng(71);
  const std::vector<DegreeOfFreedom> dofs{{"a", DofKind::spin, 2}, {"b", DofKind::spin, 2}};
  SumOfProducts h(dofs);
  h.add_term(0.4, {{"a", pauli(PauliKind::Z)}});
  h.add_term(-1.1, {{"b", pauli(PauliKind::Z)}});
  h.add_term(0.7, {{"a", pauli(PauliKind::Z)}, {"b", pauli(PauliKind::Z)}});
  h.add_term(0.3, {});
  const HybridState psi = random_state(rng, dofs);
  const HybridState out = trotter_step(psi, h, 0.37);
  const ComplexVector exact = exp_hermitian(build_dense(h), -kI * 0.37) * psi.amplitudes;
  CHECK((out.amplitudes - exact).norm() < 1e-13);
}

TEST_CASE("the first-order Trotter step has a second-order local error") {
  std::mt19937_64 rng(72);
  const std::vector<DegreeOfFreedom> dofs{{"a", DofKind::spin, 2}, {"b", DofKind::phonon, 3}};
  SumOfProducts h(dofs);
  h.add_term(1.0, {{"a", pauli(PauliKind::X)}});
  h.add_term(0.8, {{"a", pauli(PauliKind::Z)}, {"b", boson_annihilation(3) + boson_creation(3)}});
  h.add_term(0.5, {{"b", boson_number(3)}});
  const HybridState psi = random_state(rng, dofs);
  const ComplexMatrix dense = build_dense(h);
  const auto error = [&](double tau) {
    return (trotter_step(psi, h, tau).amplitudes - exp_hermitian(dense, -kI * tau) * psi.amplitudes).norm();
  };
  const double ratio = error(0.02) / error(0.01);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("Trotter evolution with encoders matches the uncoupled spin") {
  const SumOfProducts h = build_spin_boson(uncoupled(6));
  const EncoderSet encs{{"p0", identity_encoder(h.dofs()[1], 1)}};
  const SumOfProducts he = encode_hamiltonian(h, encs);
  for (const auto stepper : {EncoderStepper::euler, EncoderStepper::rk4}) {
    TrotterOptions opts;
    opts.stepper = stepper;
    const Trajectory traj =
        trotter_evolve_with_encoder(h, spin_boson_initial_state(he.dofs()), encs, 1.0, 0.01, 0.1, opts);
    REQUIRE_FALSE(traj.truncated);
    REQUIRE(traj.samples.size() == 11);
    for (const auto& s : traj.samples) {
      CHECK(std::abs(s.observables.at("sz") - std::cos(1.4 * s.time)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(trotter_evolve_with_encoder(h, spin_boson_initial_state(he.dofs()), encs, 1.0, 0.03, 0.1),
                  Error);
}

TEST_CASE("trajectories serialize with a hash line and round-trip checkpoints") {
  Trajectory traj;
  traj.samples.push_back({0.0, {{"sz", 1.0}, {"energy", -0.5}}});
  traj.samples.push_back({0.1, {{"sz", 0.9}, {"energy", -0.5}}});
  std::ostringstream out;
  write_trajectory_csv(out, traj, {"sz", "energy"}, "abc123");
  CHECK(out.str().rfind("# config_hash: abc123\ntime,sz,energy\n0,1,-0.5\n", 0) == 0);
  CHECK_THROWS_AS(write_trajectory_csv(out, traj, {"missing"}), Error);

  DynamicsState s;
  s.time = 1.5;
  s.theta = RealVector::LinSpaced(4, -1.0, 1.0);
  s.encoders.emplace("p0", identity_encoder({"p0", DofKind::phonon, 4}, 1));
  const DynamicsState back = dynamics_state_from_json(to_json(s));
  CHECK(back.time == 1.5);
  CHECK((back.theta - s.theta).norm() == 0.0);
  CHECK(max_abs(back.encoders.at("p0").c - s.encoders.at("p0").c) == 0.0);
}
