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
#include <string>
#include <vector>

#include "json.hpp"
#include "vbse/operators.hpp"

namespace vbse {

/// Normalized statevector over an ordered list of DOFs.
struct HybridState {
  std::vector<DegreeOfFreedom> dofs;
  ComplexVector amplitudes;

  std::vector<std::size_t> dims() const;
  std::size_t index_of(std::string_view label) const;
};

/// Builds a state and checks length and norm (within 1e-10).
HybridState make_state(std::vector<DegreeOfFreedom> dofs, ComplexVector amplitudes);

/// Product of the given local vectors, one per DOF, normalized.
HybridState product_state(std::vector<DegreeOfFreedom> dofs,
                          const std::vector<ComplexVector>& locals);

/// exp(theta * generator) on `support`. The generator must be anti-Hermitian;
/// its spectrum is cached so repeated exponentials are cheap.
class Gate {
 public:
  Gate(std::vector<std::size_t> support, ComplexMatrix generator, std::size_t parameter,
       std::string name = {});

  const std::vector<std::size_t>& support() const { return support_; }
  const ComplexMatrix& generator() const { return generator_; }
  std::size_t parameter() const { return parameter_; }
  const std::string& name() const { return name_; }

  ComplexMatrix unitary(double theta) const;

 private:
  std::vector<std::size_t> support_;
  ComplexMatrix generator_;
  std::size_t parameter_;
  std::string name_;
  RealVector phases_;       // generator = i * V diag(phases) V^dagger
  ComplexMatrix vectors_;
};

/// state(theta) = U_last ... U_first |reference>. Several gates may share one
/// parameter index.
struct AnsatzCircuit {
  HybridState reference;
  std::vector<Gate> gates;
  std::size_t n_params = 0;

  void add_gate(Gate gate);
};

HybridState evaluate_state(const AnsatzCircuit& circ, const RealVector& theta);

/// Columns are d|phi>/d theta_k.
ComplexMatrix state_jacobian(const AnsatzCircuit& circ, const RealVector& theta);

/// <phi|H|phi>; Hermiticity error when the imaginary part reaches 1e-8.
double expectation(const HybridState& state, const SumOfProducts& h);

ComplexMatrix reduced_density_matrix(const HybridState& state, std::string_view label);

struct SchmidtSpectrum {
  RealVector singular_values;  // descending
  double entropy = 0.0;
};

SchmidtSpectrum schmidt_spectrum(const HybridState& state, const std::vector<std::string>& cut);

struct SampledValue {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Per-term measurement in each term's product eigenbasis, `shots` draws per
/// term, driven by a seeded generator.
class SamplingPlan {
 public:
  explicit SamplingPlan(const SumOfProducts& h);
  SampledValue sample(const HybridState& state, std::size_t shots, std::uint64_t seed) const;

 private:
  struct TermPlan {
    std::vector<std::size_t> support;
    ComplexMatrix basis;  // columns are product eigenvectors
    RealVector values;    // coefficient times product eigenvalues
    double constant = 0.0;
  };
  std::vector<TermPlan> terms_;
};

SampledValue sampled_expectation(const HybridState& state, const SumOfProducts& h,
                                 std::size_t shots, std::uint64_t seed);

/// Flat [re0, im0, re1, im1, ...].
nlohmann::json statevector_to_json(const HybridState& state);
ComplexVector statevector_from_json(const nlohmann::json& j);

}  // namespace vbse
