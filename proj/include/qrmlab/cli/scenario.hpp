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

#ifndef QRMLAB_CLI_SCENARIO_HPP
#define QRMLAB_CLI_SCENARIO_HPP

// Turns a ScenarioConfig into a table: one row per grid point, first the
// axis values, then the observables. Every scenario resolves its parameters
// into named scalar "knobs"; a grid axis overrides the knob of the same name.

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "qrmlab/affine.hpp"
#include "qrmlab/cli/config.hpp"
#include "qrmlab/entropy.hpp"
#include "qrmlab/fit.hpp"
#include "qrmlab/models.hpp"
#include "qrmlab/qrm.hpp"
#include "qrmlab/random.hpp"
#include "qrmlab/tripartite.hpp"

#ifndef QRMLAB_VERSION
#define QRMLAB_VERSION "0.1.0"
#endif

namespace qrmlab::cli {

using json = nlohmann::ordered_json;

// Emitted EP values below this are treated as a bug, not as noise.
inline constexpr double kEpFloor = -1e-10;

struct Table {
  std::string scenario;
  std::string name;
  std::string version = QRMLAB_VERSION;
  json parameters = json::object();
  std::vector<AxisSpec> axes;
  std::vector<std::string> columns;  // axis names first
  std::vector<std::vector<double>> rows;
  json reference_loci = json::array();
  json summary = json::object();
  std::vector<std::string> warnings;
  std::optional<std::uint64_t> seed;  // set when random draws were made
};

using Knobs = std::map<std::string, double>;

struct PointResult {
  std::vector<double> values;
  std::vector<std::string> warnings;
};

struct Plan {
  Table table;  // rows and summary still empty
  std::vector<std::string> ep_columns;
  std::function<PointResult(const Knobs&)> eval;
  std::function<json(const Table&)> summarize;
  Knobs base;
};

namespace detail {

inline const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reads a parameter block and complains about keys nobody asked for.
class ParamBlock {
 public:
  ParamBlock(YAML::Node node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.IsMap()) throw config_error(node_, where_ + ": expected a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string& key) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) throw config_error(node_, where_ + ": missing '" + key + "'");
    return n;
  }

  double number(const std::string& key) { return parse_number(get(key), where_ + "." + key); }

  std::optional<double> maybe_number(const std::string& key) {
    used_.insert(key);
    if (!node_[key]) return std::nullopt;
    return parse_number(node_[key], where_ + "." + key);
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key))
        throw config_error(kv.first, where_ + ": unknown parameter '" + key + "'");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string where_;
  std::set<std::string> used_;
};

inline ConfigError axis_error(const AxisSpec& a, const std::string& msg) {
  if (a.mark.is_null()) return ConfigError(msg);
  return ConfigError(msg, a.mark.line + 1, a.mark.column + 1);
}

inline bool is_axis(const ScenarioConfig& cfg, const std::string& name) {
  for (const auto& a : cfg.grid)
    if (a.name == name) return true;
  return false;
}

// Every axis must name one of `allowed`.
inline void check_axes(const ScenarioConfig& cfg, const std::vector<std::string>& allowed) {
  for (const auto& a : cfg.grid)
    if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end()) {
      std::string list;
      for (const auto& s : allowed) list += (list.empty() ? "" : ", ") + s;
      throw axis_error(a, "grid: axis '" + a.name + "' is not a parameter of " +
                              to_string(cfg.kind) + " (one of: " + list + ")");
    }
}

// A numeric knob that is required unless a grid axis supplies it.
inline void read_knob(ParamBlock& p, const ScenarioConfig& cfg, Knobs& k,
                      const std::string& key, std::optional<double> fallback = std::nullopt) {
  if (auto v = p.maybe_number(key)) {
    if (is_axis(cfg, key))
      throw config_error(p.get(key), "parameters." + key + ": also given as a grid axis");
    k[key] = *v;
  } else if (is_axis(cfg, key)) {
    k[key] = kNaN;  // filled per grid point
  } else if (fallback) {
    k[key] = *fallback;
  } else {
    throw config_error(p.node(), "parameters: missing '" + key + "'");
  }
}

inline json knob_json(const ScenarioConfig& cfg, const Knobs& k, const std::string& key) {
  if (is_axis(cfg, key)) return "grid";
  return k.at(key);
}

inline std::string default_name(std::size_t j) {
  if (j < 26) return std::string(1, static_cast<char>('A' + j));
  return "R" + std::to_string(j);
}

// Axis values of grid point `index`; the first axis varies slowest.
inline std::vector<double> grid_point(const std::vector<AxisSpec>& axes, std::size_t index) {
  std::vector<double> v(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t n = axes[a].values.size();
    v[a] = axes[a].values[index % n];
    index /= n;
  }
  return v;
}

inline std::size_t column_index(const Table& t, const std::string& c) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), c);
  if (it == t.columns.end()) throw ContractError("no column '" + c + "'");
  return static_cast<std::size_t>(it - t.columns.begin());
}

// Location of the smallest finite value of column c.
inline json min_location(const Table& t, const std::string& c) {
  const std::size_t ci = column_index(t, c);
  std::size_t best = t.rows.size();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double v = t.rows[i][ci];
    if (!std::isfinite(v)) continue;
    if (best == t.rows.size() || v < t.rows[best][ci]) best = i;
  }
  json out = json::object();
  if (best == t.rows.size()) return out;
  out["value"] = t.rows[best][ci];
  json at = json::object();
  for (std::size_t a = 0; a < t.axes.size(); ++a) at[t.axes[a].name] = t.rows[best][a];
  out["at"] = at;
  return out;
}

// Groups rows by every axis except `along`; per group reports the fitted
// power of `fit_col` against `along` and the relative spread of each of
// `flat_cols`.
inline json slices(const Table& t, const std::string& along, const std::string& fit_col,
                   const std::vector<std::string>& flat_cols) {
  json out = json::array();
  std::size_t ai = t.axes.size();
  for (std::size_t a = 0; a < t.axes.size(); ++a)
    if (t.axes[a].name == along) ai = a;
  if (ai == t.axes.size()) return out;
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  std::vector<std::vector<double>> order;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::vector<double> key;
    for (std::size_t a = 0; a < t.axes.size(); ++a)
      if (a != ai) key.push_back(t.rows[i][a]);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(i);
  }
  for (const auto& key : order) {
    const auto& idx = groups[key];
    json s = json::object();
    std::size_t k = 0;
    for (std::size_t a = 0; a < t.axes.size(); ++a)
      if (a != ai) s[t.axes[a].name] = key[k++];
    std::vector<double> xs, ys;
    const std::size_t fc = column_index(t, fit_col);
    for (std::size_t i : idx) {
      xs.push_back(t.rows[i][ai]);
      ys.push_back(t.rows[i][fc]);
    }
    const bool fittable = std::all_of(ys.begin(), ys.end(), [](double y) {
      return std::isfinite(y) && y != 0.0;
    });
    if (fittable) s["exponent_" + fit_col] = fit_power_law(xs, ys);
    for (const auto& c : flat_cols) {
      const std::size_t cc = column_index(t, c);
      std::vector<double> v;
      for (std::size_t i : idx) v.push_back(t.rows[i][cc]);
      const bool ok = std::all_of(v.begin(), v.end(), [](double y) { return std::isfinite(y); });
      double mean = 0.0;
      for (double y : v) mean += y;
      if (ok && mean != 0.0) s["spread_" + c] = relative_spread(v);
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrices in configs: a list of rows, entries either a number or [re, im].

inline Operator parse_matrix(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence() || n.size() == 0)
    throw config_error(n, what + ": expected a non-empty list of rows");
  const std::size_t d = n.size();
  Operator m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const YAML::Node row = n[i];
    if (!row.IsSequence() || row.size() != d)
      throw config_error(row, what + ": row " + std::to_string(i) + " must have " +
                                  std::to_string(d) + " entries");
    for (std::size_t j = 0; j < d; ++j) {
      const YAML::Node e = row[j];
      cplx v;
      if (e.IsSequence()) {
        if (e.size() != 2) throw config_error(e, what + ": complex entries are [re, im]");
        v = cplx(parse_number(e[0], what), parse_number(e[1], what));
      } else {
        v = parse_number(e, what);
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return m;
}

inline json matrix_json(const Operator& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Single qubit with several reservoirs: single_qubit_ep_grid,
// affine_lambda_grid and lemma46_grid share the parameter block.

struct QubitSetup {
  std::vector<std::string> names;
  enum class Lambdas { gamma_ratio, fixed, free } mode = Lambdas::gamma_ratio;
  std::vector<double> fixed;  // mode fixed
};

inline QubitSetup read_qubit(ParamBlock& p, const ScenarioConfig& cfg, Knobs& k,
                             bool affine, bool with_lambdas) {
  QubitSetup q;
  read_knob(p, cfg, k, "epsilon", 1.0);
  read_knob(p, cfg, k, "delta");
  const YAML::Node rs = p.get("reservoirs");
  if (!rs.IsSequence() || rs.size() == 0)
    throw config_error(rs, "parameters.reservoirs: expected a non-empty list");
  for (std::size_t j = 0; j < rs.size(); ++j) {
    ParamBlock r(rs[j], "parameters.reservoirs[" + std::to_string(j) + "]");
    std::string name = default_name(j);
    if (r.has("name")) name = parse_string(r.get("name"), "reservoir name");
    if (std::find(q.names.begin(), q.names.end(), name) != q.names.end())
      throw config_error(rs[j], "parameters.reservoirs: duplicate name '" + name + "'");
    q.names.push_back(name);
    for (const char* f : {"t", "gamma"}) {
      const std::string key = std::string(f) + "_" + name;
      if (auto v = r.maybe_number(f)) {
        if (is_axis(cfg, key))
          throw config_error(r.get(f), "reservoir " + name + ": " + f + " also given as axis");
        k[key] = *v;
      } else if (is_axis(cfg, key)) {
        k[key] = kNaN;
      } else {
        throw config_error(rs[j], "reservoir " + name + ": missing '" + f + "'");
      }
    }
    r.finish();
  }

  const std::size_t n = q.names.size();
  if (!with_lambdas) return q;
  if (affine) {
    // the last reservoir takes 1 - (sum of the others)
    q.mode = QubitSetup::Lambdas::free;
    std::vector<double> given;
    if (p.has("lambdas")) {
      const YAML::Node l = p.get("lambdas");
      if (!l.IsSequence() || (l.size() != n && l.size() + 1 != n))
        throw config_error(l, "parameters.lambdas: expected " + std::to_string(n - 1) +
                                  " or " + std::to_string(n) + " values");
      for (std::size_t j = 0; j < l.size(); ++j)
        given.push_back(parse_number(l[j], "parameters.lambdas"));
      if (given.size() == n) {
        double s = 0.0;
        for (double x : given) s += x;
        if (std::abs(s - 1.0) > 1e-12)
          throw config_error(l, "parameters.lambdas: must sum to 1");
      }
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const std::string key = "lambda_" + q.names[j];
      if (is_axis(cfg, key)) {
        if (!given.empty())
          throw config_error(p.get("lambdas"), "parameters.lambdas: " + key +
                                                   " is a grid axis; drop it from the list");
        k[key] = kNaN;
      } else if (!given.empty()) {
        k[key] = given[j];
      } else {
        // gamma ratio at the configured rates
        double big = 0.0;
        for (const auto& nm : q.names) big += k.at("gamma_" + nm);
        if (!std::isfinite(big))
          throw config_error(p.node(), "parameters: give lambdas when a rate is a grid axis");
        k[key] = k.at("gamma_" + q.names[j]) / big;
      }
    }
  } else if (p.has("lambdas")) {
    const YAML::Node l = p.get("lambdas");
    if (l.IsScalar() && l.Scalar() == "gamma_ratio") return q;
    if (!l.IsSequence() || l.size() != n)
      throw config_error(l, "parameters.lambdas: expected 'gamma_ratio' or " +
                                std::to_string(n) + " values");
    q.mode = QubitSetup::Lambdas::fixed;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      q.fixed.push_back(parse_number(l[j], "parameters.lambdas"));
      s += q.fixed.back();
    }
    if (std::abs(s - 1.0) > 1e-12) throw config_error(l, "parameters.lambdas: must sum to 1");
  }
  return q;
}

inline SingleQubitParams qubit_params(const QubitSetup& q, const Knobs& k) {
  SingleQubitParams p;
  p.epsilon = k.at("epsilon");
  p.delta = k.at("delta");
  for (const auto& nm : q.names) p.reservoirs.push_back({k.at("t_" + nm), k.at("gamma_" + nm)});
  if (q.mode == QubitSetup::Lambdas::fixed) {
    p.lambdas = q.fixed;
  } else if (q.mode == QubitSetup::Lambdas::free) {
    std::vector<double> l;
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < q.names.size(); ++j) {
      l.push_back(k.at("lambda_" + q.names[j]));
      s += l.back();
    }
    l.push_back(1.0 - s);
    p.lambdas = l;
  }
  return p;
}

inline json qubit_echo(const QubitSetup& q, const ScenarioConfig& cfg, const Knobs& k,
                       bool with_lambdas) {
  json e = json::object();
  e["epsilon"] = knob_json(cfg, k, "epsilon");
  e["delta"] = knob_json(cfg, k, "delta");
  json rs = json::array();
  for (const auto& nm : q.names)
    rs.push_back({{"name", nm},
                  {"t", knob_json(cfg, k, "t_" + nm)},
                  {"gamma", knob_json(cfg, k, "gamma_" + nm)}});
  e["reservoirs"] = rs;
  if (!with_lambdas) return e;
  if (q.mode == QubitSetup::Lambdas::gamma_ratio) {
    e["lambdas"] = "gamma_ratio";
  } else if (q.mode == QubitSetup::Lambdas::fixed) {
    e["lambdas"] = q.fixed;
  } else {
    json l = json::array();
    for (std::size_t j = 0; j + 1 < q.names.size(); ++j)
      l.push_back(knob_json(cfg, k, "lambda_" + q.names[j]));
    l.push_back("1 - sum of the others");
    e["lambdas"] = l;
  }
  return e;
}

// EP, sigma_j and fluxes at the steady state, one entry per configured
// reservoir (a reservoir with gamma = 0 contributes zeros).
inline std::vector<double> qubit_ep_row(const SingleQubitParams& p) {
  const QrmSystem sys = build_single_qubit(p);
  const AffineSplit split = build_single_qubit_split(p);
  const EpReport rep = sigma_components(sys, split);
  const std::size_t n = p.reservoirs.size();
  std::vector<double> sig(n, 0.0), flux(n, 0.0);
  std::size_t c = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (p.reservoirs[j].gamma > 0.0) {
      sig[j] = rep.per_reservoir[c];
      flux[j] = rep.fluxes[c];
      ++c;
    }
  std::vector<double> row{rep.total};
  row.insert(row.end(), sig.begin(), sig.end());
  row.insert(row.end(), flux.begin(), flux.end());
  return row;
}

inline Plan plan_qubit(const ScenarioConfig& cfg) {
  const bool affine = cfg.kind == ScenarioKind::affine_lambda_grid;
  Plan plan;
  ParamBlock p(cfg.parameters, "parameters");
  const QubitSetup q = read_qubit(p, cfg, plan.base, affine, true);
  p.finish();

  std::vector<std::string> allowed{"epsilon", "delta"};
  for (const auto& nm : q.names) {
    allowed.push_back("t_" + nm);
    allowed.push_back("gamma_" + nm);
  }
  if (affine)
    for (std::size_t j = 0; j + 1 < q.names.size(); ++j) allowed.push_back("lambda_" + q.names[j]);
  check_axes(cfg, allowed);

  Table& t = plan.table;
  t.parameters = qubit_echo(q, cfg, plan.base, true);
  t.columns.push_back("ep");
  plan.ep_columns.push_back("ep");
  for (const auto& nm : q.names) {
    t.columns.push_back("sigma_" + nm);
    plan.ep_columns.push_back("sigma_" + nm);
  }
  for (const auto& nm : q.names) t.columns.push_back("flux_" + nm);

  // where the EP should vanish
  if (affine) {
    double big = 0.0;
    bool fixed_rates = true;
    for (const auto& nm : q.names) {
      big += plan.base.at("gamma_" + nm);
      fixed_rates = fixed_rates && !is_axis(cfg, "gamma_" + nm);
    }
    if (fixed_rates)
      for (const auto& a : cfg.grid)
        if (a.name.rfind("lambda_", 0) == 0)
          t.reference_loci.push_back(
              {{"kind", "line"},
               {"axis", a.name},
               {"value", plan.base.at("gamma_" + a.name.substr(7)) / big},
               {"note", "lambda_j = gamma_j / Gamma"}});
  } else {
    std::vector<std::string> t_axes;
    for (const auto& a : cfg.grid)
      if (a.name.rfind("t_", 0) == 0) t_axes.push_back(a.name);
    if (t_axes.size() == 2) {
      t.reference_loci.push_back({{"kind", "diagonal"}, {"axes", t_axes}});
      // a point where every reset state agrees, if the fixed ones agree
      std::optional<double> common;
      bool agree = true;
      for (const auto& nm : q.names) {
        if (is_axis(cfg, "t_" + nm)) continue;
        const double v = plan.base.at("t_" + nm);
        if (common && *common != v) agree = false;
        common = v;
      }
      if (agree && common)
        t.reference_loci.push_back({{"kind", "point"},
                                    {t_axes[0], *common},
                                    {t_axes[1], *common},
                                    {"note", "all reset states equal"}});
    }
  }

  plan.eval = [q](const Knobs& k) { return PointResult{qubit_ep_row(qubit_params(q, k)), {}}; };
  plan.summarize = [](const Table& tb) {
    json s = json::object();
    s["min_ep"] = min_location(tb, "ep");
    return s;
  };
  return plan;
}

inline Plan plan_lemma46(const ScenarioConfig& cfg) {
  Plan plan;
  ParamBlock p(cfg.parameters, "parameters");
  const QubitSetup q = read_qubit(p, cfg, plan.base, false, false);
  read_knob(p, cfg, plan.base, "lambda");
  read_knob(p, cfg, plan.base, "mu");
  p.finish();
  std::vector<std::string> allowed{"lambda", "mu", "epsilon", "delta"};
  for (const auto& nm : q.names) {
    allowed.push_back("t_" + nm);
    allowed.push_back("gamma_" + nm);
  }
  check_axes(cfg, allowed);

  Table& t = plan.table;
  t.parameters = qubit_echo(q, cfg, plan.base, false);
  t.parameters["lambda"] = knob_json(cfg, plan.base, "lambda");
  t.parameters["mu"] = knob_json(cfg, plan.base, "mu");
  // gap = S(rho(mu)) + S(rho(mu)|rho(lambda)) - S(rho(lambda)),
  // signed = (1 - lambda/mu) gap
  t.columns = {"gap", "signed"};
  if (is_axis(cfg, "lambda") && is_axis(cfg, "mu")) {
    t.reference_loci.push_back(
        {{"kind", "diagonal"}, {"axes", {"lambda", "mu"}}, {"note", "gap vanishes"}});
    t.reference_loci.push_back({{"kind", "line"}, {"axis", "lambda"}, {"value", 0.0}});
  }

  plan.eval = [q](const Knobs& k) {
    PointResult r;
    const double lambda = k.at("lambda"), mu = k.at("mu");
    if (mu == 0.0) {
      r.values = {kNaN, kNaN};
      r.warnings.push_back("points with mu = 0 are undefined and emitted as nan");
      return r;
    }
    const QrmSystem sys = build_single_qubit(qubit_params(q, k));
    const double gap = resolvent_entropy_gap(sys, lambda, mu);
    r.values = {gap, (1.0 - lambda / mu) * gap};
    return r;
  };
  plan.summarize = [](const Table& tb) {
    json s = json::object();
    s["min_signed"] = min_location(tb, "signed");
    return s;
  };
  return plan;
}

// ---------------------------------------------------------------------------
// Three-qubit chain (the only tripartite model with a config schema).

inline const std::vector<std::string>& three_qubit_keys() {
  static const std::vector<std::string> keys{"e_A", "e_C", "e_B",   "U",      "J_alpha", "J_beta",
                                             "t_A", "t_B", "gamma_A", "gamma_B", "g"};
  return keys;
}

inline ThreeQubitParams three_qubit_params(const Knobs& k) {
  ThreeQubitParams p;
  p.e_a = k.at("e_A");
  p.e_c = k.at("e_C");
  p.e_b = k.at("e_B");
  p.u = k.at("U");
  p.j_alpha = k.at("J_alpha");
  p.j_beta = k.at("J_beta");
  p.t_a = k.at("t_A");
  p.t_b = k.at("t_B");
  p.gamma_a = k.at("gamma_A");
  p.gamma_b = k.at("gamma_B");
  p.g = k.at("g");
  return p;
}

// Throws AssumptionError naming the first failure among what the scenario
// uses. A Bohr-frequency coincidence alone only produces a warning: the
// expansion divides by eigenvalue differences, not Bohr differences.
inline std::vector<std::string> require_assumptions(const TripartiteQrm& s, bool with_sharp,
                                                    const std::string& where) {
  const AssumptionReport rep = check_assumptions(s);
  const std::string fail = rep.first_failure(false, with_sharp);
  if (!fail.empty()) {
    std::string detail = "violated at " + where;
    if (fail.rfind("Spec", 0) == 0) detail += " (averaged spectrum degenerate)";
    if (fail.rfind("Coup", 0) == 0) detail += " (Phi_D kernel is not one dimensional)";
    if (fail == "Pos") detail += " (leading-order state not faithful)";
    throw AssumptionError(fail, detail);
  }
  std::vector<std::string> warn;
  const std::vector<std::pair<const SpecCheck*, std::string>> specs{
      {&rep.spec_htau, "Spec(Hbar^tau)"},
      {&rep.spec_htau_a, "Spec(Hbar^tau_A)"},
      {&rep.spec_htau_b, "Spec(Hbar^tau_B)"}};
  for (std::size_t i = 0; i < (with_sharp ? 3u : 1u); ++i)
    if (!specs[i].first->ok)
      warn.push_back(specs[i].second + ": Bohr frequencies coincide at " + where +
                     "; spectrum is simple so the expansion is still computed");
  return warn;
}

// Describes the grid point for diagnostics. g and lambda are left out: the
// assumptions do not depend on them.
inline std::string knob_point(const Knobs& k, const std::vector<AxisSpec>& axes) {
  std::string s;
  char buf[64];
  for (const auto& a : axes) {
    if (a.name == "g" || a.name == "lambda") continue;
    std::snprintf(buf, sizeof buf, "%s=%.10g", a.name.c_str(), k.at(a.name));
    s += (s.empty() ? "" : ", ") + std::string(buf);
  }
  return s.empty() ? "the configured parameters" : s;
}

inline Plan plan_tripartite(const ScenarioConfig& cfg) {
  Plan plan;
  ParamBlock p(cfg.parameters, "parameters");
  if (p.has("model")) {
    const std::string m = parse_string(p.get("model"), "parameters.model");
    if (m != "three_qubit")
      throw config_error(p.get("model"), "parameters.model: only 'three_qubit' is supported");
  }
  const bool report = cfg.kind == ScenarioKind::assumptions_report;
  const bool has_lambda = cfg.kind == ScenarioKind::tripartite_ep_remainder ||
                          cfg.kind == ScenarioKind::tripartite_flux_sweep;
  for (const auto& key : three_qubit_keys())
    read_knob(p, cfg, plan.base, key, report && key == "g" ? std::optional<double>(0.0)
                                                           : std::nullopt);
  if (has_lambda) read_knob(p, cfg, plan.base, "lambda", 0.5);
  p.finish();

  std::vector<std::string> allowed = three_qubit_keys();
  if (has_lambda) allowed.push_back("lambda");
  check_axes(cfg, allowed);
  if (!report) {
    const YAML::Node gnode = cfg.parameters["g"];
    if (!is_axis(cfg, "g") && !(plan.base.at("g") > 0.0))
      throw config_error(gnode, "parameters.g: coupling must be > 0");
    for (const auto& a : cfg.grid)
      if (a.name == "g" && !(a.min > 0.0)) throw axis_error(a, "grid: coupling g must be > 0");
  }

  Table& t = plan.table;
  t.parameters["model"] = "three_qubit";
  for (const auto& key : allowed) t.parameters[key] = knob_json(cfg, plan.base, key);
  const std::vector<AxisSpec> axes = cfg.grid;

  switch (cfg.kind) {
    case ScenarioKind::tripartite_trace_distance:
      t.columns = {"trace_distance", "trace_distance_over_g2"};
      plan.eval = [axes](const Knobs& k) {
        const ThreeQubitParams p = three_qubit_params(k);
        const TripartiteQrm s = build_three_qubit(p);
        PointResult r;
        r.warnings = require_assumptions(s, false, knob_point(k, axes));
        const PerturbativeSolution sol = perturbative_solution(s, 1e-9, false);
        const double td = trace_distance(exact_steady_state(s), sol.rho0 + p.g * sol.rho1);
        r.values = {td, td / (p.g * p.g)};
        return r;
      };
      plan.summarize = [](const Table& tb) {
        return json{{"slices", slices(tb, "g", "trace_distance", {"trace_distance_over_g2"})}};
      };
      break;
    case ScenarioKind::tripartite_ep_remainder:
      t.columns = {"ep", "sigma2", "ep_minus_g2_sigma2_over_g2", "remainder_over_g4",
                   "commutator_norm"};
      plan.ep_columns = {"ep", "sigma2"};
      plan.eval = [axes](const Knobs& k) {
        const ThreeQubitParams p = three_qubit_params(k);
        const TripartiteQrm s = build_three_qubit(p);
        const double lambda = k.at("lambda");
        PointResult r;
        r.warnings = require_assumptions(s, true, knob_point(k, axes));
        const PerturbativeSolution sol = perturbative_solution(s);
        const double s2 = second_order_ep(s, sol, {}).sigma2(lambda);
        const double ep = exact_entropy_production(s, lambda, exact_steady_state(s)).total;
        const double g2 = p.g * p.g;
        r.values = {ep, s2, (ep - g2 * s2) / g2, (ep - g2 * s2) / (g2 * g2),
                    op_norm(commutator(s.h, sol.rho0))};
        return r;
      };
      plan.summarize = [](const Table& tb) {
        return json{{"slices", slices(tb, "g", "ep", {"remainder_over_g4"})}};
      };
      break;
    case ScenarioKind::tripartite_flux_sweep:
      t.columns = {"phi_A", "phi_B", "ep", "phi_A_leading", "phi_A_remainder_over_g4"};
      plan.ep_columns = {"ep"};
      if (is_axis(cfg, "t_B") && !is_axis(cfg, "t_A"))
        t.reference_loci.push_back({{"kind", "line"},
                                    {"axis", "t_B"},
                                    {"value", plan.base.at("t_A")},
                                    {"note", "flux changes sign at t_A = t_B"}});
      plan.eval = [axes](const Knobs& k) {
        const ThreeQubitParams p = three_qubit_params(k);
        const TripartiteQrm s = build_three_qubit(p);
        PointResult r;
        r.warnings = require_assumptions(s, false, knob_point(k, axes));
        const PerturbativeSolution sol = perturbative_solution(s, 1e-9, false);
        const EpReport rep = exact_entropy_production(s, k.at("lambda"), exact_steady_state(s));
        // phi^# = tr(L^#(rho) ln rho^#), the opposite sign of EpReport::fluxes
        const double phi_a = -rep.fluxes[0], phi_b = -rep.fluxes[1];
        const double lead = three_qubit_flux_leading(p, sol.rho1).first;
        const double g2 = p.g * p.g;
        r.values = {phi_a, phi_b, rep.total, lead, (phi_a - g2 * lead) / (g2 * g2)};
        return r;
      };
      plan.summarize = [](const Table& tb) {
        return json{{"slices", slices(tb, "g", "phi_A", {"phi_A_remainder_over_g4"})}};
      };
      break;
    default: {
      t.columns = {"all",
                   "spec_htau",        "spec_htau_A",        "spec_htau_B",
                   "min_gap",          "min_gap_A",          "min_gap_B",
                   "min_bohr_sep",     "min_bohr_sep_A",     "min_bohr_sep_B",
                   "coup_kernel_dim",  "coup_kernel_dim_A",  "coup_kernel_dim_B",
                   "pos_min_tau_A",    "pos_min_tau_B",      "pos_min_rho0_C",
                   "pos_min_rho0_CB",  "pos_min_rho0_AC"};
      plan.eval = [](const Knobs& k) {
        const AssumptionReport a = check_assumptions(build_three_qubit(three_qubit_params(k)));
        auto b = [](bool x) { return x ? 1.0 : 0.0; };
        return PointResult{{b(a.all()), b(a.spec_htau.ok), b(a.spec_htau_a.ok),
                            b(a.spec_htau_b.ok), a.spec_htau.min_gap, a.spec_htau_a.min_gap,
                            a.spec_htau_b.min_gap, a.spec_htau.min_bohr_separation,
                            a.spec_htau_a.min_bohr_separation,
                            a.spec_htau_b.min_bohr_separation,
                            static_cast<double>(a.coup.kernel_dimension),
                            static_cast<double>(a.coup_a.kernel_dimension),
                            static_cast<double>(a.coup_b.kernel_dimension), a.pos.min_tau_a,
                            a.pos.min_tau_b, a.pos.min_rho0_c, a.pos.min_rho0_cb,
                            a.pos.min_rho0_ac},
                           {}};
      };
      plan.summarize = [](const Table& tb) {
        const std::size_t c = column_index(tb, "all");
        std::size_t bad = 0;
        for (const auto& r : tb.rows) bad += r[c] == 0.0;
        return json{{"points_failing", bad}};
      };
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Arbitrary QRM, from matrices in the config or drawn at random.

struct CustomSetup {
  Operator h;
  std::vector<std::string> names;
  std::vector<Operator> taus;
  std::optional<std::vector<double>> lambdas;
  Operator rho_init;
};

inline Plan plan_custom(const ScenarioConfig& cfg) {
  Plan plan;
  ParamBlock p(cfg.parameters, "parameters");
  CustomSetup c;
  Knobs& k = plan.base;
  const bool random = p.has("random");
  if (random) {
    if (p.has("h") || p.has("channels"))
      throw config_error(p.get("random"), "parameters: give either 'random' or h/channels");
    ParamBlock r(p.get("random"), "parameters.random");
    const long d = parse_integer(r.get("dim"), "parameters.random.dim");
    const long nc = parse_integer(r.get("channels"), "parameters.random.channels");
    const double scale = r.maybe_number("h_scale").value_or(1.0);
    r.finish();
    if (d < 2 || d > 8) throw config_error(r.get("dim"), "parameters.random.dim: 2..8");
    if (nc < 1 || nc > 8)
      throw config_error(r.get("channels"), "parameters.random.channels: 1..8");
    Rng rng(cfg.seed);
    c.h = random_hermitian(static_cast<int>(d), rng, scale);
    for (long j = 0; j < nc; ++j) {
      c.names.push_back(default_name(static_cast<std::size_t>(j)));
      c.taus.push_back(random_density_matrix(static_cast<int>(d), rng));
      k["gamma_" + c.names.back()] = random_uniform(rng, 0.5, 2.0);
    }
    plan.table.seed = cfg.seed;
  } else {
    c.h = parse_matrix(p.get("h"), "parameters.h");
    const YAML::Node ch = p.get("channels");
    if (!ch.IsSequence() || ch.size() == 0)
      throw config_error(ch, "parameters.channels: expected a non-empty list");
    for (std::size_t j = 0; j < ch.size(); ++j) {
      ParamBlock b(ch[j], "parameters.channels[" + std::to_string(j) + "]");
      std::string name = default_name(j);
      if (b.has("name")) name = parse_string(b.get("name"), "channel name");
      if (std::find(c.names.begin(), c.names.end(), name) != c.names.end())
        throw config_error(ch[j], "parameters.channels: duplicate name '" + name + "'");
      c.names.push_back(name);
      c.taus.push_back(parse_matrix(b.get("tau"), "channel " + name + ".tau"));
      const std::string key = "gamma_" + name;
      if (auto v = b.maybe_number("gamma")) {
        k[key] = *v;
      } else if (is_axis(cfg, key)) {
        k[key] = kNaN;
      } else {
        throw config_error(ch[j], "channel " + name + ": missing 'gamma'");
      }
      b.finish();
    }
    QrmSystem probe{c.h, {}};
    for (std::size_t j = 0; j < c.taus.size(); ++j) probe.channels.push_back({c.taus[j], 1.0});
    try {
      validate(probe);
    } catch (const Error& e) {
      throw config_error(p.node(), std::string("parameters: ") + e.what());
    }
  }
  if (p.has("lambdas")) {
    const YAML::Node l = p.get("lambdas");
    if (!(l.IsScalar() && l.Scalar() == "gamma_ratio")) {
      if (!l.IsSequence() || l.size() != c.names.size())
        throw config_error(l, "parameters.lambdas: one value per channel");
      std::vector<double> v;
      double s = 0.0;
      for (std::size_t j = 0; j < l.size(); ++j) {
        v.push_back(parse_number(l[j], "parameters.lambdas"));
        s += v.back();
      }
      if (std::abs(s - 1.0) > 1e-12) throw config_error(l, "parameters.lambdas: must sum to 1");
      c.lambdas = v;
    }
  }
  const int d = static_cast<int>(c.h.rows());
  if (p.has("rho_init")) {
    c.rho_init = parse_matrix(p.get("rho_init"), "parameters.rho_init");
    if (c.rho_init.rows() != d || !is_density_matrix(c.rho_init, 1e-10))
      throw config_error(p.get("rho_init"), "parameters.rho_init: not a density matrix");
  } else {
    c.rho_init = identity(d) / static_cast<double>(d);
  }
  read_knob(p, cfg, k, "h_scale", 1.0);
  const bool timed = p.has("time") || is_axis(cfg, "time");
  if (timed) read_knob(p, cfg, k, "time");
  p.finish();

  std::vector<std::string> allowed{"h_scale", "time"};
  for (const auto& nm : c.names) allowed.push_back("gamma_" + nm);
  check_axes(cfg, allowed);

  Table& t = plan.table;
  t.parameters["h"] = matrix_json(c.h);
  json chans = json::array();
  for (std::size_t j = 0; j < c.names.size(); ++j)
    chans.push_back({{"name", c.names[j]},
                     {"tau", matrix_json(c.taus[j])},
                     {"gamma", knob_json(cfg, k, "gamma_" + c.names[j])}});
  t.parameters["channels"] = chans;
  t.parameters["lambdas"] = c.lambdas ? json(*c.lambdas) : json("gamma_ratio");
  t.parameters["h_scale"] = knob_json(cfg, k, "h_scale");
  if (timed) {
    t.parameters["time"] = knob_json(cfg, k, "time");
    t.parameters["rho_init"] = matrix_json(c.rho_init);
  } else {
    t.parameters["state"] = "steady";
  }

  t.columns.push_back("ep");
  plan.ep_columns.push_back("ep");
  for (const auto& nm : c.names) {
    t.columns.push_back("sigma_" + nm);
    plan.ep_columns.push_back("sigma_" + nm);
  }
  for (const auto& nm : c.names) t.columns.push_back("flux_" + nm);
  t.columns.push_back("entropy");
  t.columns.push_back("trace_distance_to_steady");

  plan.eval = [c, timed](const Knobs& kk) {
    QrmSystem sys;
    sys.h = kk.at("h_scale") * c.h;
    for (std::size_t j = 0; j < c.names.size(); ++j)
      sys.channels.push_back({c.taus[j], kk.at("gamma_" + c.names[j])});
    AffineSplit split = c.lambdas ? AffineSplit{*c.lambdas, false} : gamma_ratio_split(sys);
    const Operator steady = steady_state(sys);
    const Operator rho = timed ? propagate(sys, c.rho_init, kk.at("time")) : steady;
    const EpReport rep =
        entropy_production(split_generators(sys, split), rho, split_steady_states(sys, split));
    std::vector<double> row{rep.total};
    row.insert(row.end(), rep.per_reservoir.begin(), rep.per_reservoir.end());
    row.insert(row.end(), rep.fluxes.begin(), rep.fluxes.end());
    row.push_back(von_neumann_entropy(rho));
    row.push_back(trace_distance(rho, steady));
    return PointResult{row, {}};
  };
  plan.summarize = [](const Table& tb) { return json{{"min_ep", min_location(tb, "ep")}}; };
  return plan;
}

}  // namespace detail

// Validates the configuration and prepares the evaluation. Throws
// ConfigError for anything wrong in the file.
inline Plan make_plan(const ScenarioConfig& cfg) {
  Plan plan;
  switch (cfg.kind) {
    case ScenarioKind::single_qubit_ep_grid:
    case ScenarioKind::affine_lambda_grid:
      plan = detail::plan_qubit(cfg);
      break;
    case ScenarioKind::lemma46_grid:
      plan = detail::plan_lemma46(cfg);
      break;
    case ScenarioKind::custom_system:
      plan = detail::plan_custom(cfg);
      break;
    default:
      plan = detail::plan_tripartite(cfg);
  }
  Table& t = plan.table;
  t.scenario = to_string(cfg.kind);
  t.name = cfg.name();
  t.axes = cfg.grid;
  std::vector<std::string> cols;
  for (const auto& a : cfg.grid) cols.push_back(a.name);
  cols.insert(cols.end(), t.columns.begin(), t.columns.end());
  t.columns = cols;
  return plan;
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("QRMLAB_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates every grid point. Points run concurrently, results land at
// their grid index, so the table never depends on scheduling. On failure the
// error of the lowest failing index is rethrown.
inline Table run_plan(Plan plan, unsigned threads = 1) {
  Table& t = plan.table;
  const std::size_t n = [&] {
    std::size_t m = 1;
    for (const auto& a : t.axes) m *= a.values.size();
    return m;
  }();
  std::vector<PointResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        Knobs k = plan.base;
        const std::vector<double> pt = detail::grid_point(t.axes, i);
        for (std::size_t a = 0; a < pt.size(); ++a) k[t.axes[a].name] = pt[a];
        results[i] = plan.eval(k);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // Indices below a failing one were all handed out before it, so this is
  // the same error whatever the thread count.
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row = detail::grid_point(t.axes, i);
    row.insert(row.end(), results[i].values.begin(), results[i].values.end());
    if (row.size() != t.columns.size())
      throw VerificationError("run_plan: row width does not match the columns");
    t.rows.push_back(std::move(row));
    for (const auto& w : results[i].warnings)
      if (seen.insert(w).second) t.warnings.push_back(w);
  }
  for (const auto& c : plan.ep_columns) {
    const std::size_t ci = detail::column_index(t, c);
    for (const auto& r : t.rows)
      if (r[ci] < kEpFloor) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.3e", r[ci]);
        throw VerificationError("run_plan: negative entropy production in column '" + c +
                                "': " + buf);
      }
  }
  if (plan.summarize) t.summary = plan.summarize(t);
  return t;
}

inline Table run_scenario(const ScenarioConfig& cfg, unsigned threads = 1) {
  return run_plan(make_plan(cfg), threads);
}

// The AssumptionReport of a tripartite configuration at its base parameters
// (grid axes take their first value).
inline json assumptions_json(const ScenarioConfig& cfg) {
  if (!is_tripartite(cfg.kind))
    throw ConfigError("assumptions: scenario '" + to_string(cfg.kind) +
                      "' has no tripartite system");
  Plan plan = make_plan(cfg);
  Knobs k = plan.base;
  for (const auto& a : cfg.grid) k[a.name] = a.values.front();
  const TripartiteQrm s = build_three_qubit(detail::three_qubit_params(k));
  const AssumptionReport r = check_assumptions(s);
  auto spec = [](const SpecCheck& c) {
    return json{{"ok", c.ok},
                {"simple_spectrum", c.simple},
                {"min_gap", c.min_gap},
                {"min_bohr_separation", c.min_bohr_separation}};
  };
  auto coup = [](const CoupCheck& c) {
    return json{{"ok", c.ok}, {"kernel_dimension", c.kernel_dimension}};
  };
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json pos{{"ok", r.pos.ok},
           {"min_tau_A", num(r.pos.min_tau_a)},
           {"min_tau_B", num(r.pos.min_tau_b)},
           {"min_rho0_C", num(r.pos.min_rho0_c)},
           {"min_rho0_CB", num(r.pos.min_rho0_cb)},
           {"min_rho0_AC", num(r.pos.min_rho0_ac)}};
  json at = json::object();
  for (const auto& a : cfg.grid) at[a.name] = a.values.front();
  const std::string ff = r.first_failure();
  return json{{"scenario", to_string(cfg.kind)},
              {"at", at},
              {"all", r.all()},
              {"first_failure", ff.empty() ? json(nullptr) : json(ff)},
              {"expansion_defined", r.first_failure(false, true).empty()},
              {"Spec(Hbar^tau)", spec(r.spec_htau)},
              {"Spec(Hbar^tau_A)", spec(r.spec_htau_a)},
              {"Spec(Hbar^tau_B)", spec(r.spec_htau_b)},
              {"Coup", coup(r.coup)},
              {"Coup^A", coup(r.coup_a)},
              {"Coup^B", coup(r.coup_b)},
              {"Pos", pos}};
}

}  // namespace qrmlab::cli

#endif  // QRMLAB_CLI_SCENARIO_HPP
