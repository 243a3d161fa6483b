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

#ifndef QRMLAB_CLI_CONFIG_HPP
#define QRMLAB_CLI_CONFIG_HPP

// Scenario configuration files (YAML). Layout:
//
//   scenario: single_qubit_ep_grid
//   seed: 7                      # only random draws use it
//   parameters: { ... }          # scenario specific
//   grid:
//     - {name: t_A, min: 0.55, max: 0.95, points: 41}
//     - {name: g, min: 1e-3, max: 1e-2, points: 10, scale: log}
//     - {name: t_B, values: [0.6, 0.7, 0.8, 0.9]}
//   output: {path: out, format: csv, name: fig1a}
//
// Numbers may be written as fractions, "1/3", to keep ratios exact.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qrmlab/errors.hpp"
#include "qrmlab/fit.hpp"

namespace qrmlab::cli {

// Bad configuration. line/column are 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line = 0, int column = 0)
      : Error(msg), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

  // "file:line:col: message"
  std::string located(const std::string& source) const {
    std::string s = source;
    if (line_ > 0) s += ":" + std::to_string(line_) + ":" + std::to_string(column_);
    return s + ": " + what();
  }

 private:
  int line_, column_;
};

inline ConfigError config_error(const YAML::Node& at, const std::string& msg) {
  const YAML::Mark m = at.Mark();
  if (m.is_null()) return ConfigError(msg);
  return ConfigError(msg, m.line + 1, m.column + 1);
}

enum class ScenarioKind {
  single_qubit_ep_grid,
  affine_lambda_grid,
  lemma46_grid,
  tripartite_trace_distance,
  tripartite_ep_remainder,
  tripartite_flux_sweep,
  assumptions_report,
  custom_system,
};

inline const std::vector<std::pair<ScenarioKind, std::string>>& scenario_names() {
  static const std::vector<std::pair<ScenarioKind, std::string>> names{
      {ScenarioKind::single_qubit_ep_grid, "single_qubit_ep_grid"},
      {ScenarioKind::affine_lambda_grid, "affine_lambda_grid"},
      {ScenarioKind::lemma46_grid, "lemma46_grid"},
      {ScenarioKind::tripartite_trace_distance, "tripartite_trace_distance"},
      {ScenarioKind::tripartite_ep_remainder, "tripartite_ep_remainder"},
      {ScenarioKind::tripartite_flux_sweep, "tripartite_flux_sweep"},
      {ScenarioKind::assumptions_report, "assumptions_report"},
      {ScenarioKind::custom_system, "custom_system"},
  };
  return names;
}

inline std::string to_string(ScenarioKind k) {
  for (const auto& [kind, name] : scenario_names())
    if (kind == k) return name;
  return "unknown";
}

inline bool is_tripartite(ScenarioKind k) {
  return k == ScenarioKind::tripartite_trace_distance ||
         k == ScenarioKind::tripartite_ep_remainder ||
         k == ScenarioKind::tripartite_flux_sweep || k == ScenarioKind::assumptions_report;
}

enum class OutputFormat { csv, json };

struct AxisSpec {
  std::string name;
  std::vector<double> values;
  std::string scale = "linear";  // linear, log or list
  double min = 0.0, max = 0.0;
  YAML::Mark mark;  // where the axis was declared, for diagnostics
};

struct OutputSpec {
  std::string path = ".";
  OutputFormat format = OutputFormat::csv;
  std::string name;  // file stem, defaults to the scenario name
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::single_qubit_ep_grid;
  YAML::Node parameters;  // a map, possibly empty
  std::vector<AxisSpec> grid;
  OutputSpec output;
  std::uint64_t seed = 1;
  std::string source = "<config>";

  std::string name() const { return output.name.empty() ? to_string(kind) : output.name; }
  std::size_t points() const {
    std::size_t n = 1;
    for (const auto& a : grid) n *= a.values.size();
    return n;
  }
};

// ---------------------------------------------------------------------------
// Scalar reading helpers

namespace detail {

inline double parse_number(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) throw config_error(n, what + ": expected a number");
  const std::string s = n.Scalar();
  auto to_double = [&](const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      throw config_error(n, what + ": '" + s + "' is not a number");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) throw config_error(n, what + ": '" + s + "' is not a number");
    return v;
  };
  const auto slash = s.find('/');
  double v = 0.0;
  if (slash == std::string::npos) {
    v = to_double(s);
  } else {
    const double den = to_double(s.substr(slash + 1));
    if (den == 0.0) throw config_error(n, what + ": zero denominator");
    v = to_double(s.substr(0, slash)) / den;
  }
  if (!std::isfinite(v)) throw config_error(n, what + ": must be finite");
  return v;
}

inline long parse_integer(const YAML::Node& n, const std::string& what) {
  const double v = parse_number(n, what);
  if (v != std::floor(v) || std::abs(v) > 1e15)
    throw config_error(n, what + ": expected an integer");
  return static_cast<long>(v);
}

inline std::string parse_string(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) throw config_error(n, what + ": expected a string");
  return n.Scalar();
}

// Rejects keys outside `allowed`.
inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!map.IsMap()) throw config_error(map, where + ": expected a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw config_error(kv.first, where + ": unknown key '" + key + "' (expected one of: " +
                                       list + ")");
    }
  }
}

inline AxisSpec parse_axis(const YAML::Node& n, std::size_t index) {
  const std::string where = "grid[" + std::to_string(index) + "]";
  check_keys(n, {"name", "min", "max", "points", "scale", "values"}, where);
  AxisSpec a;
  a.mark = n.Mark();
  if (!n["name"]) throw config_error(n, where + ": missing 'name'");
  a.name = parse_string(n["name"], where + ".name");
  if (n["values"]) {
    if (n["min"] || n["max"] || n["points"] || n["scale"])
      throw config_error(n, where + ": give either 'values' or min/max/points, not both");
    const YAML::Node v = n["values"];
    if (!v.IsSequence()) throw config_error(v, where + ".values: expected a list");
    for (std::size_t i = 0; i < v.size(); ++i)
      a.values.push_back(parse_number(v[i], where + ".values"));
    if (a.values.size() < 2) throw config_error(v, where + ": at least 2 points per axis");
    a.scale = "list";
    a.min = a.values.front();
    a.max = a.values.back();
    return a;
  }
  for (const char* key : {"min", "max", "points"})
    if (!n[key]) throw config_error(n, where + ": missing '" + key + "'");
  a.min = parse_number(n["min"], where + ".min");
  a.max = parse_number(n["max"], where + ".max");
  const long pts = parse_integer(n["points"], where + ".points");
  if (pts < 2) throw config_error(n["points"], where + ": at least 2 points per axis");
  if (pts > 100000) throw config_error(n["points"], where + ": too many points");
  if (!(a.min < a.max)) throw config_error(n, where + ": need min < max");
  if (n["scale"]) a.scale = parse_string(n["scale"], where + ".scale");
  if (a.scale == "linear") {
    a.values = linspace(a.min, a.max, static_cast<int>(pts));
  } else if (a.scale == "log") {
    if (!(a.min > 0.0)) throw config_error(n["min"], where + ": log scale needs min > 0");
    a.values = logspace(a.min, a.max, static_cast<int>(pts));
  } else {
    throw config_error(n["scale"], where + ".scale: expected 'linear' or 'log'");
  }
  return a;
}

}  // namespace detail

// Parses configuration text. `source` only labels diagnostics.
inline ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty configuration");
  detail::check_keys(root, {"scenario", "parameters", "grid", "output", "seed"}, "config");

  ScenarioConfig cfg;
  cfg.source = source;
  if (!root["scenario"]) throw config_error(root, "config: missing 'scenario'");
  const std::string kind = detail::parse_string(root["scenario"], "scenario");
  bool found = false;
  for (const auto& [k, name] : scenario_names())
    if (name == kind) {
      cfg.kind = k;
      found = true;
    }
  if (!found) throw config_error(root["scenario"], "scenario: unknown scenario '" + kind + "'");

  cfg.parameters = root["parameters"] ? root["parameters"] : YAML::Node(YAML::NodeType::Map);
  if (!cfg.parameters.IsMap())
    throw config_error(cfg.parameters, "parameters: expected a mapping");

  if (root["grid"]) {
    const YAML::Node g = root["grid"];
    if (!g.IsSequence()) throw config_error(g, "grid: expected a list of axes");
    if (g.size() > 2) throw config_error(g, "grid: at most 2 axes");
    for (std::size_t i = 0; i < g.size(); ++i) cfg.grid.push_back(detail::parse_axis(g[i], i));
    if (cfg.grid.size() == 2 && cfg.grid[0].name == cfg.grid[1].name)
      throw config_error(g[1], "grid: axis '" + cfg.grid[1].name + "' given twice");
  }

  if (root["output"]) {
    const YAML::Node o = root["output"];
    detail::check_keys(o, {"path", "format", "name"}, "output");
    if (o["path"]) cfg.output.path = detail::parse_string(o["path"], "output.path");
    if (o["name"]) {
      cfg.output.name = detail::parse_string(o["name"], "output.name");
      if (cfg.output.name.empty() || cfg.output.name.find('/') != std::string::npos)
        throw config_error(o["name"], "output.name: must be a plain file stem");
    }
    if (o["format"]) {
      const std::string f = detail::parse_string(o["format"], "output.format");
      if (f == "csv")
        cfg.output.format = OutputFormat::csv;
      else if (f == "json")
        cfg.output.format = OutputFormat::json;
      else
        throw config_error(o["format"], "output.format: expected 'csv' or 'json'");
    }
  }

  if (root["seed"]) {
    const long s = detail::parse_integer(root["seed"], "seed");
    if (s < 0) throw config_error(root["seed"], "seed: must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace qrmlab::cli

#endif  // QRMLAB_CLI_CONFIG_HPP
