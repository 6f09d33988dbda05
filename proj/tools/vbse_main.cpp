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

// Command-line front end: run, validate and compile-hardware.

#include <exception>
#include <iostream>
#include <new>
#include <string>

#include "CLI11.hpp"
#include "vbse/errors.hpp"
#include "vbse/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitResource = 4;
constexpr int kExitInternal = 1;

int exit_code_for(vbse::ErrorCode code) {
  switch (code) {
    case vbse::ErrorCode::config: return kExitConfig;
    case vbse::ErrorCode::convergence:
    case vbse::ErrorCode::stiffness: return kExitConvergence;
    case vbse::ErrorCode::resource:
    case vbse::ErrorCode::capacity: return kExitResource;
    default: return kExitInternal;
  }
}

int report_error(const std::string& code, const std::string& message, int exit_code) {
  const nlohmann::json report = {
      {"status", "error"}, {"code", code}, {"message", message}, {"exit_code", exit_code}};
  std::cerr << report.dump(2) << "\n";
  return exit_code;
}

int run(const std::string& path, bool hardware_only) {
  const vbse::ExperimentConfig cfg = vbse::parse_config(path);
  if (hardware_only && cfg.experiment != vbse::ExperimentKind::hardware_compile) {
    vbse::fail(vbse::ErrorCode::config, "experiment: compile-hardware needs \"hardware_compile\"");
  }
  const vbse::RunReport report = vbse::run_experiment(cfg);
  nlohmann::json out = report.summary;
  out["directory"] = report.directory.string();
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int validate(const std::string& path) {
  const vbse::ExperimentConfig cfg = vbse::parse_config(path);
  const nlohmann::json out = {{"status", "valid"},
                              {"config_hash", vbse::config_hash(cfg)},
                              {"config", vbse::to_json(cfg)}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational basis state encoder simulator"};
  app.require_subcommand(1);
  std::string config_path;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "Config JSON")->required();
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a config file and print it with defaults");
  validate_cmd->add_option("config", config_path, "Config JSON")->required();
  CLI::App* hardware_cmd =
      app.add_subcommand("compile-hardware", "Compile the two-site fixture to Pauli strings");
  hardware_cmd->add_option("config", config_path, "Config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return run(config_path, false);
    if (*validate_cmd) return validate(config_path);
    return run(config_path, true);
  } catch (const vbse::Error& e) {
    return report_error(vbse::to_string(e.code()), e.what(), exit_code_for(e.code()));
  } catch (const std::bad_alloc&) {
    return report_error("resource", "out of memory", kExitResource);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitInternal);
  }
}
