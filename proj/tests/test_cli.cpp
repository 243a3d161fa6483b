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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qrmlab/cli/config.hpp"
#include "qrmlab/cli/output.hpp"
#include "qrmlab/cli/scenario.hpp"

namespace qrmlab::cli {
namespace {

const char* kQubitGrid = R"(scenario: single_qubit_ep_grid
parameters:
  epsilon: 1
  delta: 0.7
  reservoirs:
    - {name: A, gamma: 1}
    - {name: B, gamma: 1/2}
    - {name: C, gamma: 1/3, t: 0.8}
  lambdas: gamma_ratio
grid:
  - {name: t_A, min: 0.6, max: 0.9, points: 4}
  - {name: t_B, min: 0.6, max: 0.9, points: 3}
output: {name: small}
)";

const char* kChain = R"(scenario: tripartite_flux_sweep
parameters:
  model: three_qubit
  e_A: 0.08
  e_C: 0.05
  e_B: 0.1
  U: 0.1
  J_alpha: 0.05
  J_beta: 0.1
  gamma_A: 0.7
  gamma_B: 0.6
  t_A: 0.6
  lambda: 0.5
grid:
  - {name: t_B, min: 0.3, max: 0.9, points: 4}
  - {name: g, min: 0.01, max: 0.05, points: 3}
)";

// Line and column of the ConfigError thrown for `text`.
std::pair<int, int> error_position(const std::string& text) {
  try {
    make_plan(parse_config(text));
  } catch (const ConfigError& e) {
    return {e.line(), e.column()};
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return {-1, -1};
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

TEST(Config, ParsesAValidFile) {
  const ScenarioConfig cfg = parse_config(kQubitGrid);
  EXPECT_EQ(cfg.kind, ScenarioKind::single_qubit_ep_grid);
  ASSERT_EQ(cfg.grid.size(), 2u);
  EXPECT_EQ(cfg.grid[0].values.size(), 4u);
  EXPECT_DOUBLE_EQ(cfg.grid[1].values[1], 0.75);
  EXPECT_EQ(cfg.output.format, OutputFormat::csv);
  EXPECT_EQ(cfg.name(), "small");
}

TEST(Config, FractionsAreNumbers) {
  EXPECT_DOUBLE_EQ(detail::parse_number(YAML::Load("1/2"), "x"), 0.5);
  EXPECT_DOUBLE_EQ(detail::parse_number(YAML::Load("-3/4"), "x"), -0.75);
  EXPECT_DOUBLE_EQ(detail::parse_number(YAML::Load("1e-3"), "x"), 1e-3);
  EXPECT_THROW(detail::parse_number(YAML::Load("1/0"), "x"), ConfigError);
  EXPECT_THROW(detail::parse_number(YAML::Load("abc"), "x"), ConfigError);
  EXPECT_THROW(detail::parse_number(YAML::Load("2x"), "x"), ConfigError);
  EXPECT_THROW(detail::parse_number(YAML::Load("[1, 2]"), "x"), ConfigError);
  EXPECT_THROW(detail::parse_number(YAML::Load(".inf"), "x"), ConfigError);
}

TEST(Config, SyntaxErrorIsLocated) {
  const auto [line, col] = error_position("scenario: lemma46_grid\nparameters: {a: [1, 2}\n");
  EXPECT_EQ(line, 2);
  EXPECT_GT(col, 0);
}

TEST(Config, UnknownTopLevelKeyIsLocated) {
  const std::string text = std::string(kQubitGrid) + "colour: blue\n";
  EXPECT_EQ(error_position(text), std::make_pair(14, 1));
}

TEST(Config, UnknownParameterIsLocated) {
  const auto [line, col] = error_position(replace(kQubitGrid, "  delta: 0.7\n",
                                                  "  delta: 0.7\n  detla: 0.7\n"));
  EXPECT_EQ(line, 5);
  EXPECT_EQ(col, 3);
}

TEST(Config, UnknownScenario) {
  EXPECT_EQ(error_position("scenario: fig9\n").first, 1);
}

TEST(Config, EmptyAndMissingScenario) {
  EXPECT_THROW(parse_config(""), ConfigError);
  EXPECT_THROW(parse_config("parameters: {}\n"), ConfigError);
}

TEST(Config, AxisValidation) {
  const std::string base = kQubitGrid;
  const std::string axis = "  - {name: t_B, min: 0.6, max: 0.9, points: 3}\n";
  for (const std::string bad :
       {"  - {name: t_B, min: 0.9, max: 0.6, points: 3}\n",
        "  - {name: t_B, min: 0.6, max: 0.9, points: 1}\n",
        "  - {name: t_B, min: 0.6, max: 0.9, points: 2.5}\n",
        "  - {name: t_B, min: 0, max: 0.9, points: 3, scale: log}\n",
        "  - {name: t_B, min: 0.6, max: 0.9, points: 3, scale: cubic}\n",
        "  - {name: t_B, values: [0.6, 0.7], min: 0.6}\n",
        "  - {name: t_B, values: [0.6]}\n",
        "  - {min: 0.6, max: 0.9, points: 3}\n",
        "  - {name: t_A, min: 0.6, max: 0.9, points: 3}\n",
        "  - {name: q, min: 0.6, max: 0.9, points: 3}\n",
        "  - {name: t_B, min: 0.6, max: 0.9, points: 3}\n  - {name: delta, min: 0, max: 1, "
        "points: 2}\n"}) {
    const auto [line, col] = error_position(replace(base, axis, bad));
    EXPECT_GT(line, 0) << bad;
    EXPECT_GT(col, 0) << bad;
  }
}

TEST(Config, AxisWithValueList) {
  const ScenarioConfig cfg =
      parse_config(replace(kQubitGrid, "  - {name: t_B, min: 0.6, max: 0.9, points: 3}\n",
                           "  - {name: t_B, values: [0.7, 1/2 , 0.9]}\n"));
  EXPECT_EQ(cfg.grid[1].scale, "list");
  EXPECT_DOUBLE_EQ(cfg.grid[1].values[1], 0.5);
}

TEST(Config, OutputValidation) {
  EXPECT_THROW(parse_config(replace(kQubitGrid, "{name: small}", "{format: xml}")),
               ConfigError);
  EXPECT_THROW(parse_config(replace(kQubitGrid, "{name: small}", "{name: a/b}")),
               ConfigError);
  EXPECT_THROW(parse_config(replace(kQubitGrid, "{name: small}", "{file: x}")), ConfigError);
}

TEST(Config, LocatedMessage) {
  const ConfigError e("bad", 3, 7);
  EXPECT_EQ(e.located("a.yaml"), "a.yaml:3:7: bad");
  EXPECT_EQ(ConfigError("bad").located("a.yaml"), "a.yaml: bad");
}

TEST(Output, FormatDouble) {
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Output, CsvLayout) {
  const Table t = run_scenario(parse_config(kQubitGrid));
  const std::string csv = format_csv(t);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, std::string("# qrmlab ") + QRMLAB_VERSION);
  std::getline(in, line);
  EXPECT_EQ(line, "# scenario: single_qubit_ep_grid");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# parameters: {", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "# axis: t_A linear 4 points [0.59999999999999998, 0.90000000000000002]");
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t_A,t_B,ep,sigma_A,sigma_B,sigma_C,flux_A", 0), 0u) << line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);
  // t_B varies fastest
  EXPECT_DOUBLE_EQ(t.rows[1][0], 0.6);
  EXPECT_DOUBLE_EQ(t.rows[1][1], 0.75);
}

TEST(Output, MetaAndJson) {
  const Table t = run_scenario(parse_config(kQubitGrid));
  const json meta = json::parse(format_meta(t, OutputFormat::csv));
  EXPECT_EQ(meta["data_file"], "small.csv");
  EXPECT_EQ(meta["rows"], 12);
  EXPECT_EQ(meta["columns"][0], "t_A");
  EXPECT_EQ(meta["grid"][1]["points"], 3);
  const json doc = json::parse(format_json(t));
  EXPECT_EQ(doc["rows"].size(), 12u);
  EXPECT_DOUBLE_EQ(doc["rows"][5][2].get<double>(), t.rows[5][2]);
}

TEST(Output, WriteOutputs) {
  const auto dir = std::filesystem::temp_directory_path() / "qrmlab_test_cli_out";
  std::filesystem::remove_all(dir);
  const Table t = run_scenario(parse_config(kQubitGrid));
  const auto [data, meta] = write_outputs(t, dir, OutputFormat::csv);
  EXPECT_EQ(data.filename(), "small.csv");
  EXPECT_EQ(meta.filename(), "small.meta.json");
  std::ifstream in(data, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), format_csv(t));
  std::filesystem::remove_all(dir);
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  for (const char* text : {kQubitGrid, kChain}) {
    const ScenarioConfig cfg = parse_config(text);
    const Table one = run_scenario(cfg, 1), three = run_scenario(cfg, 3);
    EXPECT_EQ(format_csv(one), format_csv(three));
    EXPECT_EQ(format_json(one), format_json(three));
    EXPECT_EQ(format_meta(one, OutputFormat::csv), format_meta(three, OutputFormat::csv));
  }
}

TEST(Run, EpColumnsAreNonnegative) {
  const Table t = run_scenario(parse_config(kQubitGrid));
  for (const auto& r : t.rows)
    for (std::size_t c = 2; c < 6; ++c) EXPECT_GE(r[c], -1e-12);
}

TEST(Run, FluxSignInChainSweep) {
  const Table t = run_scenario(parse_config(kChain));
  for (const auto& r : t.rows) {
    // t_B, g, phi_A, ...
    if (std::abs(r[0] - 0.6) > 1e-9) EXPECT_EQ(r[2] > 0, r[0] < 0.6);
  }
}

TEST(Run, NegativeEpIsAVerificationError) {
  Plan plan;
  AxisSpec x;
  x.name = "x";
  x.values = {0.0, 1.0, 2.0};
  plan.table.axes = {x};
  plan.table.columns = {"x", "ep"};
  plan.ep_columns = {"ep"};
  plan.eval = [](const Knobs& k) { return PointResult{{k.at("x") == 1.0 ? -1e-6 : 0.0}, {}}; };
  EXPECT_THROW(run_plan(plan, 2), VerificationError);
  plan.eval = [](const Knobs&) { return PointResult{{-1e-11}, {}}; };
  EXPECT_NO_THROW(run_plan(plan, 2));
}

TEST(Run, LowestFailingPointWins) {
  Plan plan;
  AxisSpec x;
  x.name = "x";
  x.values = {0, 1, 2, 3, 4, 5, 6, 7};
  plan.table.axes = {x};
  plan.table.columns = {"x", "y"};
  plan.eval = [](const Knobs& k) -> PointResult {
    if (k.at("x") >= 3) throw ContractError("point " + std::to_string(int(k.at("x"))));
    return {{0.0}, {}};
  };
  for (unsigned threads : {1u, 4u}) {
    try {
      run_plan(plan, threads);
      ADD_FAILURE();
    } catch (const ContractError& e) {
      EXPECT_STREQ(e.what(), "point 3");
    }
  }
}

TEST(Run, DegenerateChainIsAnAssumptionError) {
  const std::string text = replace(replace(kChain, "e_C: 0.05", "e_C: 0"), "U: 0.1", "U: 0");
  EXPECT_THROW(run_scenario(parse_config(text)), AssumptionError);
}

TEST(Run, ResolventGridSkipsZeroMu) {
  const ScenarioConfig cfg = parse_config(R"(scenario: lemma46_grid
parameters:
  delta: 0.7
  reservoirs: [{name: A, gamma: 1, t: 0.9}]
grid:
  - {name: lambda, values: [-1, 0.5, 2]}
  - {name: mu, values: [-1, 0, 1]}
)");
  const Table t = run_scenario(cfg);
  ASSERT_EQ(t.rows.size(), 9u);
  for (const auto& r : t.rows) {
    if (r[1] == 0.0)
      EXPECT_TRUE(std::isnan(r[3]));
    else
      EXPECT_GE(r[3], -1e-10);
  }
}

TEST(Assumptions, ChainReport) {
  const json ok = assumptions_json(parse_config(kChain));
  EXPECT_EQ(ok["all"], true);
  EXPECT_TRUE(ok["first_failure"].is_null());
  EXPECT_EQ(ok["Coup"]["kernel_dimension"], 1);
  const std::string text = replace(replace(kChain, "e_C: 0.05", "e_C: 0"), "U: 0.1", "U: 0");
  const json bad = assumptions_json(parse_config(text));
  EXPECT_EQ(bad["all"], false);
  EXPECT_EQ(bad["expansion_defined"], false);
  EXPECT_THROW(assumptions_json(parse_config(kQubitGrid)), ConfigError);
}

}  // namespace
}  // namespace qrmlab::cli
