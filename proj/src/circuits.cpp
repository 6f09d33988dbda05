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

#include "vbse/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vbse/tensor.hpp"

namespace vbse {

std::vector<std::size_t> HybridState::dims() const {
  std::vector<std::size_t> d;
  d.reserve(dofs.size());
  for (const auto& dof : dofs) d.push_back(dof.dim);
  return d;
}

std::size_t HybridState::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i].label == label) return i;
  }
  fail(ErrorCode::contract_violation, "state has no DOF '" + std::string(label) + "'");
}

HybridState make_state(std::vector<DegreeOfFreedom> dofs, ComplexVector amplitudes) {
  HybridState s{std::move(dofs), std::move(amplitudes)};
  const auto d = s.dims();
  require(static_cast<std::size_t>(s.amplitudes.size()) == product(d), ErrorCode::contract_violation,
          "amplitude count does not match DOF dimensions");
  require_finite(s.amplitudes, "state amplitudes");
  require(std::abs(s.amplitudes.norm() - 1.0) <= 1e-10, ErrorCode::state_corruption,
          "state is not normalized");
  return s;
}

HybridState product_state(std::vector<DegreeOfFreedom> dofs, const std::vector<ComplexVector>& locals) {
  require(dofs.size() == locals.size(), ErrorCode::contract_violation,
          "one local vector per DOF is required");
  ComplexVector psi = ComplexVector::Ones(1);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    require(static_cast<std::size_t>(locals[k].size()) == dofs[k].dim, ErrorCode::contract_violation,
            "local vector has the wrong length for '" + dofs[k].label + "'");
    const ComplexVector& v = locals[k];
    ComplexVector next(psi.size() * v.size());
    for (Eigen::Index a = 0; a < psi.size(); ++a) next.segment(a * v.size(), v.size()) = psi(a) * v;
    psi = std::move(next);
  }
  const double n = psi.norm();
  require(n > 0.0, ErrorCode::contract_violation, "product state has zero norm");
  return make_state(std::move(dofs), psi / n);
}

// ---------------------------------------------------------------------------

Gate::Gate(std::vector<std::size_t> support, ComplexMatrix generator, std::size_t parameter,
           std::string name)
    : support_(std::move(support)),
      generator_(std::move(generator)),
      parameter_(parameter),
      name_(std::move(name)) {
  require(generator_.rows() == generator_.cols(), ErrorCode::contract_violation,
          "gate generator must be square");
  require(is_anti_hermitian(generator_, 1e-12), ErrorCode::contract_violation,
          "gate generator must be anti-Hermitian");
  const ComplexMatrix herm = -kI * generator_;
  const EigenDecomposition eig = hermitian_eig(0.5 * (herm + herm.adjoint()));
  phases_ = eig.values;
  vectors_ = eig.vectors;
}

ComplexMatrix Gate::unitary(double theta) const {
  ComplexVector d(phases_.size());
  for (Eigen::Index i = 0; i < phases_.size(); ++i) d(i) = std::exp(kI * (theta * phases_(i)));
  return vectors_ * d.asDiagonal() * vectors_.adjoint();
}

void AnsatzCircuit::add_gate(Gate gate) {
  std::size_t d = 1;
  for (std::size_t s : gate.support()) {
    require(s < reference.dofs.size(), ErrorCode::index_out_of_range, "gate support out of range");
    d *= reference.dofs[s].dim;
  }
  require(static_cast<std::size_t>(gate.generator().rows()) == d, ErrorCode::contract_violation,
          "gate generator does not match its support");
  n_params = std::max(n_params, gate.parameter() + 1);
  gates.push_back(std::move(gate));
}

HybridState evaluate_state(const AnsatzCircuit& circ, const RealVector& theta) {
  require(static_cast<std::size_t>(theta.size()) == circ.n_params, ErrorCode::contract_violation,
          "parameter vector length does not match the circuit");
  HybridState s = circ.reference;
  const auto dims = s.dims();
  for (const Gate& g : circ.gates) {
    apply_on_support(s.amplitudes, dims, g.support(), g.unitary(theta(g.parameter())));
  }
  return s;
}

ComplexMatrix state_jacobian(const AnsatzCircuit& circ, const RealVector& theta) {
  require(static_cast<std::size_t>(theta.size()) == circ.n_params, ErrorCode::contract_violation,
          "parameter vector length does not match the circuit");
  const auto dims = circ.reference.dims();
  const auto n_gates = static_cast<Eigen::Index>(circ.gates.size());
  ComplexVector psi = circ.reference.amplitudes;
  // Column g holds the derivative with respect to gate g's own angle; every
  // later gate is applied to all earlier columns at once.
  RowMajorComplexMatrix block = RowMajorComplexMatrix::Zero(psi.size(), n_gates);
  for (Eigen::Index g = 0; g < n_gates; ++g) {
    const Gate& gate = circ.gates[static_cast<std::size_t>(g)];
    const ComplexMatrix u = gate.unitary(theta(gate.parameter()));
    apply_on_support(psi, dims, gate.support(), u);
    apply_on_support_block(block, dims, gate.support(), u, g);
    ComplexVector column = psi;
    apply_on_support(column, dims, gate.support(), gate.generator());
    block.col(g) = column;
  }
  ComplexMatrix jac = ComplexMatrix::Zero(psi.size(), static_cast<Eigen::Index>(circ.n_params));
  for (Eigen::Index g = 0; g < n_gates; ++g) {
    jac.col(static_cast<Eigen::Index>(circ.gates[static_cast<std::size_t>(g)].parameter())) +=
        block.col(g);
  }
  return jac;
}

double expectation(const HybridState& state, const SumOfProducts& h) {
  require(h.is_square() && h.dims() == state.dims(), ErrorCode::contract_violation,
          "operator and state dimensions differ");
  const cplx e = state.amplitudes.dot(h.apply(state.amplitudes));
  require(std::abs(e.imag()) < 1e-8, ErrorCode::hermiticity,
          "expectation value has an imaginary part");
  return e.real();
}

ComplexMatrix reduced_density_matrix(const HybridState& state, std::string_view label) {
  const std::size_t sites[1] = {state.index_of(label)};
  return reduced_matrix(state.amplitudes, state.dims(), sites);
}

SchmidtSpectrum schmidt_spectrum(const HybridState& state, const std::vector<std::string>& cut) {
  require(!cut.empty() && cut.size() < state.dofs.size(), ErrorCode::contract_violation,
          "Schmidt cut must be a nonempty proper subset");
  std::vector<std::size_t> sites;
  for (const auto& label : cut) sites.push_back(state.index_of(label));
  const ComplexMatrix rho = reduced_matrix(state.amplitudes, state.dims(), sites);
  const EigenDecomposition eig = hermitian_eig(0.5 * (rho + rho.adjoint()));
  SchmidtSpectrum out;
  const Eigen::Index n = eig.values.size();
  out.singular_values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::max(0.0, eig.values(n - 1 - i));
    out.singular_values(i) = std::sqrt(p);
    if (p > 0.0) out.entropy -= p * std::log(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

SamplingPlan::SamplingPlan(const SumOfProducts& h) {
  require(h.is_square(), ErrorCode::contract_violation, "sampling needs a square operator");
  for (const ProductTerm& t : h.terms()) {
    require(std::abs(t.coefficient.imag()) <= 1e-12, ErrorCode::hermiticity,
            "sampled terms need real coefficients");
    TermPlan plan;
    if (t.factors.empty()) {
      plan.constant = t.coefficient.real();
      terms_.push_back(std::move(plan));
      continue;
    }
    ComplexMatrix basis = ComplexMatrix::Identity(1, 1);
    RealVector values = RealVector::Ones(1);
    for (const Factor& f : t.factors) {
      require(is_hermitian(f.matrix, 1e-12), ErrorCode::hermiticity,
              "sampled factors must be Hermitian");
      const EigenDecomposition eig = hermitian_eig(f.matrix);
      plan.support.push_back(f.dof);
      basis = kron(basis, eig.vectors);
      RealVector next(values.size() * eig.values.size());
      for (Eigen::Index a = 0; a < values.size(); ++a) {
        next.segment(a * eig.values.size(), eig.values.size()) = values(a) * eig.values;
      }
      values = std::move(next);
    }
    plan.basis = std::move(basis);
    plan.values = t.coefficient.real() * values;
    terms_.push_back(std::move(plan));
  }
}

SampledValue SamplingPlan::sample(const HybridState& state, std::size_t shots,
                                  std::uint64_t seed) const {
  require(shots >= 1, ErrorCode::contract_violation, "shots must be at least 1");
  std::mt19937_64 rng(seed);
  const auto dims = state.dims();
  SampledValue out;
  double variance_sum = 0.0;
  for (const TermPlan& plan : terms_) {
    if (plan.support.empty()) {
      out.mean += plan.constant;
      continue;
    }
    const ComplexMatrix rho = reduced_matrix(state.amplitudes, dims, plan.support);
    const RealVector p = (plan.basis.adjoint() * rho * plan.basis).diagonal().real();
    std::vector<double> weights(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) weights[static_cast<std::size_t>(i)] = std::max(0.0, p(i));
    std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < shots; ++s) {
      const double v = plan.values(static_cast<Eigen::Index>(dist(rng)));
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(shots);
    const double var = shots > 1 ? std::max(0.0, (sum_sq - shots * mean * mean) / (shots - 1.0)) : 0.0;
    out.mean += mean;
    variance_sum += var;
  }
  out.standard_error = std::sqrt(variance_sum / static_cast<double>(shots));
  return out;
}

SampledValue sampled_expectation(const HybridState& state, const SumOfProducts& h,
                                 std::size_t shots, std::uint64_t seed) {
  return SamplingPlan(h).sample(state, shots, seed);
}

nlohmann::json statevector_to_json(const HybridState& state) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    out.push_back(state.amplitudes(i).real());
    out.push_back(state.amplitudes(i).imag());
  }
  return out;
}

ComplexVector statevector_from_json(const nlohmann::json& j) {
  require(j.is_array() && j.size() % 2 == 0, ErrorCode::contract_violation,
          "statevector must be an interleaved re/im array");
  ComplexVector v(static_cast<Eigen::Index>(j.size() / 2));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto k = static_cast<std::size_t>(2 * i);
    v(i) = cplx(j[k].get<double>(), j[k + 1].get<double>());
  }
  return v;
}

}  // namespace vbse
