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

#include "vbse/ground.hpp"

#include <algorithm>
#include <cmath>

namespace vbse {

double energy_and_gradient(const AnsatzCircuit& circ, const SumOfProducts& h_encoded,
                           const RealVector& theta, RealVector& gradient) {
  const HybridState phi = evaluate_state(circ, theta);
  const ComplexVector h_phi = h_encoded.apply(phi.amplitudes);
  const cplx e = phi.amplitudes.dot(h_phi);
  require(std::abs(e.imag()) < 1e-8, ErrorCode::hermiticity,
          "expectation value has an imaginary part");
  const ComplexMatrix jac = state_jacobian(circ, theta);
  gradient = 2.0 * (jac.adjoint() * h_phi).real();
  return e.real();
}

VqeResult vqe_minimize(const AnsatzCircuit& circ, const SumOfProducts& h_encoded,
                       const RealVector& theta0, const VqeOptions& options) {
  require(static_cast<std::size_t>(theta0.size()) == circ.n_params, ErrorCode::contract_violation,
          "initial parameters do not match the circuit");
  const ObjectiveWithGradient objective = [&](const RealVector& x, RealVector& grad) {
    return energy_and_gradient(circ, h_encoded, x, grad);
  };
  const MinimizeReport report = minimize_bfgs(objective, theta0, options.gtol, options.max_iterations);
  VqeResult out;
  out.theta = report.x;
  out.energy = report.value;
  out.gradient_inf = report.gradient.size() > 0 ? report.gradient.cwiseAbs().maxCoeff() : 0.0;
  out.iterations = report.iterations;
  out.converged = report.converged;
  out.line_search_failed = report.line_search_failed;
  return out;
}

namespace {

std::vector<std::string> group_for(const MacroOptions& options, const std::string& label) {
  for (const auto& group : options.shared_groups) {
    if (std::find(group.begin(), group.end(), label) != group.end()) return group;
  }
  return {};
}

double max_residual(const HybridState& phi, const SumOfProducts& h, const EncoderSet& encs) {
  const SumOfProducts he = encode_hamiltonian(h, encs);
  double worst = 0.0;
  for (const auto& [label, enc] : encs) {
    const CompactTables tables = compact_tables(phi, h, he, h.index_of(label));
    worst = std::max(worst, max_abs(static_residual(g_from_tables(tables, enc.c), enc)));
  }
  return worst;
}

}  // namespace

MacroResult macro_iterate(const SumOfProducts& h, const AnsatzCircuit& circ,
                          const EncoderSet& encs0, const MacroOptions& options) {
  require(options.max_iterations >= 1, ErrorCode::contract_violation,
          "need at least one macro-iteration");
  require(options.e_tol > 0.0, ErrorCode::contract_violation, "energy tolerance must be positive");
  for (const auto& [label, enc] : encs0) check_encoder(enc);

  MacroResult result;
  EncoderSet encs = encs0;
  RealVector theta = RealVector::Zero(static_cast<Eigen::Index>(circ.n_params));
  for (int it = 1; it <= options.max_iterations; ++it) {
    const SumOfProducts he = encode_hamiltonian(h, encs);
    const VqeResult vqe = vqe_minimize(circ, he, theta, options.vqe);
    theta = vqe.theta;
    const HybridState phi = evaluate_state(circ, theta);

    MacroIterationRecord record;
    record.iteration = it;
    record.energy = vqe.energy;
    record.theta = theta;

    double energy = vqe.energy;
    std::vector<std::string> done;
    for (const auto& [label, unused] : encs0) {
      if (std::find(done.begin(), done.end(), label) != done.end()) continue;
      EncoderSolveOptions solve;
      solve.tol = options.solve_tol;
      solve.field = options.field;
      solve.seed = options.seed + 1000003ULL * static_cast<std::uint64_t>(it) +
                   static_cast<std::uint64_t>(done.size());
      solve.shared_labels = group_for(options, label);
      const std::vector<std::string> members =
          solve.shared_labels.empty() ? std::vector<std::string>{label} : solve.shared_labels;
      done.insert(done.end(), members.begin(), members.end());
      EncoderSolveResult solved;
      try {
        solved = solve_encoder(phi, h, encs, label, solve);
      } catch (const EncoderSolveError& e) {
        record.encoders = encs;
        record.energy_after_sweep = energy;
        record.residual_norm = max_residual(phi, h, encs);
        result.records.push_back(record);
        if (options.on_record) options.on_record(record);
        result.aborted = true;
        result.message = e.what();
        return result;
      }
      // Sequential sweep: a root that raises the energy is not adopted.
      if (solved.energy <= energy + 1e-10) {
        for (const auto& m : members) {
          encs.at(m).c = solved.encoder.c;
        }
        energy = std::min(energy, solved.energy);
      } else {
        record.rejected_updates.push_back(label);
      }
    }
    record.encoders = encs;
    record.energy_after_sweep = expectation(phi, encode_hamiltonian(h, encs));
    record.residual_norm = max_residual(phi, h, encs);
    result.records.push_back(record);
    if (options.on_record) options.on_record(record);
    if (it > 1) {
      const double delta = std::abs(result.records[result.records.size() - 1].energy -
                                    result.records[result.records.size() - 2].energy);
      // A rejected or idle sweep repeats the previous VQE energy exactly, so
      // the sweep itself must also have stopped moving the energy.
      const double sweep_gain = std::abs(record.energy_after_sweep - record.energy);
      if (delta < options.e_tol && sweep_gain < options.e_tol) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

EncoderSet binary_encoders(const SumOfProducts& h, std::size_t n_qubits_per_mode) {
  EncoderSet encs;
  for (const auto& dof : h.dofs()) {
    if (dof.kind == DofKind::phonon) encs.emplace(dof.label, gray_encoder(dof, n_qubits_per_mode));
  }
  return encs;
}

VqeResult run_binary_baseline(const SumOfProducts& h, const AnsatzCircuit& circ,
                              std::size_t n_qubits_per_mode, const VqeOptions& options) {
  const SumOfProducts he = encode_hamiltonian(h, binary_encoders(h, n_qubits_per_mode));
  require(he.dims() == circ.reference.dims(), ErrorCode::contract_violation,
          "circuit does not match the binary-encoded space");
  return vqe_minimize(circ, he, RealVector::Zero(static_cast<Eigen::Index>(circ.n_params)), options);
}

nlohmann::json to_json(const MacroIterationRecord& record) {
  nlohmann::json encs = nlohmann::json::object();
  for (const auto& [label, enc] : record.encoders) encs[label] = to_json(enc);
  return {{"iteration", record.iteration},
          {"energy", record.energy},
          {"energy_after_sweep", record.energy_after_sweep},
          {"theta", std::vector<double>(record.theta.data(), record.theta.data() + record.theta.size())},
          {"residual_norm", record.residual_norm},
          {"rejected_updates", record.rejected_updates},
          {"encoders", encs}};
}

}  // namespace vbse
