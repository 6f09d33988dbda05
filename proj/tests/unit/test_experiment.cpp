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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vbse/experiment.hpp"

using namespace vbse;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error_message(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a minimal config takes the documented defaults") {
  const ExperimentConfig cfg = config_from_json({{"experiment", "holstein_vqe"}});
  CHECK(cfg.experiment == ExperimentKind::holstein_vqe);
  CHECK(cfg.seed == 0);
  CHECK(cfg.model.n_sites == 3);
  CHECK(cfg.model.g == 1.0);
  CHECK(cfg.encoder.n_levels == 32);
  CHECK(cfg.encoder.n_qubits == 1);
  CHECK(cfg.solver.layers == 3);
  CHECK(cfg.solver.shots == 0);
}

TEST_CASE("config errors name the offending key path") {
  CHECK(config_error_message({{"experiment", "holstein_vqe"}, {"model", {{"g", "three"}}}})
            .find("model.g") != std::string::npos);
  CHECK(config_error_message({{"experiment", "holstein_vqe"}, {"model", {{"gee", 1.0}}}})
            .find("model.gee") != std::string::npos);
  CHECK(config_error_message({{"experiment", "holstein_vqe"}, {"extra", 1}}).find("extra") != std::string::npos);
  CHECK(config_error_message(json::object()).find("experiment") != std::string::npos);
  CHECK(config_error_message({{"experiment", "nope"}}).find("experiment") != std::string::npos);
  CHECK(config_error_message({{"experiment", "holstein_vqe"}, {"encoder", {{"n_levels", 1}}}})
            .find("encoder.n_levels") != std::string::npos);
  CHECK(config_error_message({{"experiment", "holstein_vqe"}, {"solver", {{"layers", -2}}}})
            .find("solver.layers") != std::string::npos);
  CHECK(config_error_message({{"experiment", "sbm_vqd"}, {"model", {{"modes", {{{"omega", 1.0}, {"x", 2}}}}}}})
            .find("model.modes[0].x") != std::string::npos);
  CHECK(config_error_message({{"experiment", "hardware_compile"}, {"model", {{"n_sites", 3}}},
                              {"encoder", {{"shared", true}}}})
            .find("model.n_sites") != std::string::npos);
  // Spin-boson keys do not belong to a Holstein config.
  CHECK(config_error_message({{"experiment", "holstein_vqe"}, {"model", {{"delta", 1.0}}}})
            .find("model.delta") != std::string::npos);
}

TEST_CASE("emitted configs re-parse to the same config and hash") {
  for (const char* kind : {"holstein_vqe", "holstein_sweep", "sbm_vqd", "sbm_trotter", "schmidt_analysis"}) {
    const ExperimentConfig cfg = config_from_json({{"experiment", kind}, {"seed", 17}});
    const json emitted = to_json(cfg);
    const ExperimentConfig back = config_from_json(emitted);
    CHECK(to_json(back) == emitted);
    CHECK(config_hash(back) == config_hash(cfg));
  }
  ExperimentConfig sub = config_from_json(
      {{"experiment", "sbm_vqd"}, {"model", {{"sub_ohmic", {{"alpha", 2.0}, {"n_modes", 4}}}}}});
  REQUIRE(sub.model.sub_ohmic.has_value());
  CHECK(config_from_json(to_json(sub)).model.sub_ohmic->n_modes == 4);
  ExperimentConfig a = config_from_json({{"experiment", "holstein_vqe"}});
  ExperimentConfig b = a;
  b.model.g = 1.0000001;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 40);
}

TEST_CASE("Pauli decomposition of the number operator in the identity encoding") {
  ComplexMatrix f = ComplexMatrix::Zero(2, 2);
  f(1, 1) = 1.0;
  const PauliCoefficients c = pauli_decompose(f);
  CHECK(c.i == 0.5);
  CHECK(c.z == -0.5);
  CHECK(c.x == 0.0);
  CHECK(c.y == 0.0);
  std::mt19937_64 rng(81);
  const ComplexMatrix h = vbse::testing::random_hermitian(rng, 2);
  const PauliCoefficients r = pauli_decompose(h);
  const ComplexMatrix back = r.i * pauli(PauliKind::I) + r.x * pauli(PauliKind::X) +
                             r.y * pauli(PauliKind::Y) + r.z * pauli(PauliKind::Z);
  CHECK(max_abs(back - h) < 1e-15);
}

TEST_CASE("the hardware fixture compiles exactly and prepares the ansatz state") {
  HolsteinParams p;
  p.n_sites = 2;
  p.n_levels = 2;
  p.g = 3.0;
  const HardwareHamiltonian hw = compile_hardware_hamiltonian(p, ComplexMatrix::Identity(2, 2));
  CHECK(hw.dense_mismatch <= 1e-12);
  CHECK(hw.number.i == doctest::Approx(0.5));
  CHECK(hw.number.z == doctest::Approx(-0.5));
  CHECK(hw.displacement.x == doctest::Approx(1.0));
  for (double theta : {-1.0, 0.0, 0.4, 0.9}) {
    CHECK(std::abs(compiled_hardware_state(theta).norm() - 1.0) < 1e-14);
    // Closed form of the two-level landscape at g = 3.
    const double closed = -std::cos(2.0 * theta) - 3.0 * std::sin(2.0 * theta);
    CHECK(hardware_energy(hw, theta) / p.v_hop == doctest::Approx(closed).epsilon(1e-12));
  }
  HolsteinParams three = p;
  three.n_sites = 3;
  CHECK_THROWS_AS(compile_hardware_hamiltonian(three, ComplexMatrix::Identity(2, 2)), Error);
}

TEST_CASE("runs write hashed artifacts and are bit-reproducible") {
  const fs::path out = fs::temp_directory_path() / "vbse_experiment_test";
  fs::remove_all(out);
  const json j = {{"experiment", "holstein_vqe"},
                  {"seed", 3},
                  {"output_dir", out.string()},
                  {"model", {{"n_sites", 2}, {"g", 1.0}}},
                  {"encoder", {{"n_levels", 4}}},
                  {"solver", {{"layers", 1}, {"max_macro_iter", 3}}}};
  const ExperimentConfig cfg = config_from_json(j);
  const RunReport first = run_experiment(cfg);
  const std::string hash = config_hash(cfg);
  CHECK(first.directory.filename().string().find(hash.substr(0, 8)) != std::string::npos);
  const std::string csv = read_file(first.directory / "macro.csv");
  CHECK(csv.rfind("# config_hash: " + hash + "\niteration,energy,energy_after_sweep,residual_norm,rejected\n", 0) == 0);
  const json summary = json::parse(read_file(first.directory / "summary.json"));
  CHECK(summary.at("config_hash") == hash);
  CHECK(summary.at("config") == to_json(cfg));
  CHECK(summary.at("status") == "ok");
  CHECK(summary.contains("wall_time_s"));
  CHECK(fs::exists(first.directory / "encoders" / "p0.json"));

  const RunReport second = run_experiment(cfg);
  CHECK(second.directory == first.directory);
  CHECK(read_file(second.directory / "macro.csv") == csv);
  CHECK(read_file(second.directory / "records.jsonl") == read_file(first.directory / "records.jsonl"));

  ExperimentConfig other = cfg;
  other.seed = 4;
  CHECK(run_experiment(other).directory != first.directory);
  fs::remove_all(out);
}

TEST_CASE("hardware and Schmidt runs emit their tables") {
  const fs::path out = fs::temp_directory_path() / "vbse_experiment_tables";
  fs::remove_all(out);
  const RunReport hw = run_experiment(config_from_json({{"experiment", "hardware_compile"},
                                                        {"output_dir", out.string()},
                                                        {"model", {{"n_sites", 2}, {"g", 3.0}}},
                                                        {"encoder", {{"n_levels", 2}, {"shared", true}}},
                                                        {"landscape", {{"points", 101}}}}));
  const json& r = hw.summary.at("results");
  CHECK(r.at("dense_mismatch").get<double>() <= 1e-12);
  CHECK(r.at("circuit_mismatch").get<double>() <= 1e-12);
  CHECK(r.at("landscape_argmin").get<double>() > 0.0);
  CHECK(r.at("landscape_argmin").get<double>() < 1.0);
  CHECK(fs::exists(hw.directory / "landscape.csv"));
  CHECK(fs::exists(hw.directory / "pauli_hamiltonian.json"));

  const RunReport sc = run_experiment(config_from_json({{"experiment", "schmidt_analysis"},
                                                        {"output_dir", out.string()},
                                                        {"encoder", {{"n_levels", 6}}},
                                                        {"sweep", {{"g_values", {0.5, 1.0}}}}}));
  const std::string csv = read_file(sc.directory / "schmidt.csv");
  CHECK(csv.find("\ng,entropy,s1,s2,s3,s4\n") != std::string::npos);
  CHECK(sc.summary.at("results").at("rows").size() == 2);
  fs::remove_all(out);
}
