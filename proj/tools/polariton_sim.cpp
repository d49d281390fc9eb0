// Copyright 2026 The polariton-sim Authors
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

// polariton-sim command line: runs one experiment and writes its CSV table
// and key=value metadata sidecar.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polsim/errors.hpp"
#include "polsim/scenarios.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int run_command(const std::string& experiment, const std::string& out_dir, const std::vector<std::string>& sets,
                const std::string& fock, const std::string& harmonics, int workers, bool check,
                const std::string& config_path) {
  polsim::ExperimentConfig config = polsim::ExperimentConfig::defaults(experiment);
  if (!config_path.empty()) config.apply_file(config_path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw polsim::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!fock.empty()) config.set("n_fock", fock);
  if (!harmonics.empty()) {
    if (!config.has("n_harmonics")) {
      throw polsim::ConfigError("--harmonics only applies to two-tone experiments");
    }
    config.set("n_harmonics", harmonics);
  }
  if (workers < 1) throw polsim::ConfigError("--workers must be >= 1");

  const polsim::RunOptions options{workers};
  polsim::RunResult result = polsim::run(config, options);
  if (check) {
    const auto report = polsim::convergence_check(config, result, options);
    result.provenance.emplace_back("convergence.status", report.pass ? "PASS" : "FAIL");
    result.provenance.emplace_back("convergence.n_fock_check", std::to_string(report.n_fock_check));
    result.provenance.emplace_back("convergence.n_harmonics_check", std::to_string(report.n_harmonics_check));
    for (const auto& [name, change] : report.changes) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", change);
      result.provenance.emplace_back("convergence.change." + name, buf);
    }
    std::cout << "convergence " << (report.pass ? "PASS" : "FAIL") << " (max relative change "
              << report.worst << ")\n";
  }
  polsim::write_outputs(result, out_dir);
  std::cout << "wrote " << out_dir << "/" << experiment << ".csv and " << experiment << ".meta.txt\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven-dissipative molecule-cavity simulations", "polariton-sim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", polsim::kVersion);

  std::string experiment, out_dir, fock, harmonics, config_path;
  std::vector<std::string> sets;
  int workers = 1;
  bool check = false;
  CLI::App* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--experiment", experiment, "fig2a..fig2f, fig3, fig4a, fig4b or custom")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--set", sets, "override key=value (repeatable)");
  run->add_option("--fock", fock, "Fock-space cutoff n_fock");
  run->add_option("--harmonics", harmonics, "harmonic truncation N or auto");
  run->add_option("--workers", workers, "worker threads for sweeps");
  run->add_flag("--check-convergence", check, "rerun at refined numerics and report");
  run->add_option("--config", config_path, "key=value configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return run_command(experiment, out_dir, sets, fock, harmonics, workers, check, config_path);
  } catch (const polsim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
