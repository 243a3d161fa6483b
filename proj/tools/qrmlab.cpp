// Copyright 2026 The qrmlab Authors
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

// qrmlab run <config> [--out DIR] [--threads N]
// qrmlab check <config>
// qrmlab assumptions <config>
//
// Exit codes: 0 ok, 1 other failure, 2 bad config or usage,
// 3 assumption failure, 4 numerical degeneracy.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "qrmlab/cli/config.hpp"
#include "qrmlab/cli/output.hpp"
#include "qrmlab/cli/scenario.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kAssumption = 3, kDegenerate = 4 };

int guarded(const std::string& source, const std::function<void()>& body) {
  using namespace qrmlab;
  try {
    body();
    return kOk;
  } catch (const cli::ConfigError& e) {
    std::cerr << "qrmlab: config error: " << e.located(source) << "\n";
    return kConfig;
  } catch (const AssumptionError& e) {
    std::cerr << "qrmlab: assumption " << e.which() << " failed: " << e.what() << "\n";
    return kAssumption;
  } catch (const PositivityError& e) {
    std::cerr << "qrmlab: assumption Pos failed: " << e.what() << "\n";
    return kAssumption;
  } catch (const DegeneracyError& e) {
    std::cerr << "qrmlab: numerical degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "qrmlab: error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qrmlab;
  CLI::App app{"qrmlab: quantum reset model scenarios"};
  app.set_version_flag("--version", std::string("qrmlab ") + QRMLAB_VERSION);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write its output files");
  run->add_option("config", config, "Scenario config (YAML)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.path)");
  run->add_option("--threads", threads, "Worker threads (default: $QRMLAB_THREADS or cores)")
      ->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "Validate a config without running it");
  check->add_option("config", config, "Scenario config (YAML)")->required();

  auto* assume =
      app.add_subcommand("assumptions", "Print the AssumptionReport of a tripartite config");
  assume->add_option("config", config, "Scenario config (YAML)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*run) {
    return guarded(config, [&] {
      const cli::ScenarioConfig cfg = cli::load_config_file(config);
      cli::Plan plan = cli::make_plan(cfg);
      const unsigned n = threads > 0 ? threads : cli::default_threads();
      const cli::Table t = cli::run_plan(std::move(plan), n);
      const auto [data, meta] =
          cli::write_outputs(t, out_dir.empty() ? cfg.output.path : out_dir, cfg.output.format);
      for (const auto& w : t.warnings) std::cerr << "qrmlab: warning: " << w << "\n";
      std::cout << data.string() << "\n" << meta.string() << "\n";
    });
  }
  if (*check) {
    return guarded(config, [&] {
      const cli::ScenarioConfig cfg = cli::load_config_file(config);
      (void)cli::make_plan(cfg);
      std::cout << config << ": ok (" << cli::to_string(cfg.kind) << ", " << cfg.points()
                << " grid points)\n";
    });
  }
  return guarded(config, [&] {
    const cli::ScenarioConfig cfg = cli::load_config_file(config);
    std::cout << cli::assumptions_json(cfg).dump(2) << "\n";
  });
}
