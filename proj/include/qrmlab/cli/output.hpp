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

#ifndef QRMLAB_CLI_OUTPUT_HPP
#define QRMLAB_CLI_OUTPUT_HPP

// Serialization of a result Table.
//
// CSV: '#' header lines (tool version, scenario, parameters as one line of
// JSON, grid axes), then the column names, then one row per grid point.
// Floats use 17 significant digits; nan and inf/-inf are spelled out.
// JSON: the same content as one document, non-finite numbers as strings.
// Meta: <name>.meta.json with parameters, axes, columns, reference loci,
// summary and warnings. Nothing time or machine dependent is written.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "qrmlab/cli/scenario.hpp"

namespace qrmlab::cli {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

namespace detail {

inline json axes_json(const Table& t) {
  json axes = json::array();
  for (const auto& a : t.axes) {
    json j{{"name", a.name}, {"scale", a.scale}, {"points", a.values.size()}};
    if (a.scale != "list") {
      j["min"] = a.min;
      j["max"] = a.max;
    } else {
      j["values"] = a.values;
    }
    axes.push_back(j);
  }
  return axes;
}

inline json header_json(const Table& t) {
  json h{{"tool", "qrmlab"}, {"version", t.version}, {"scenario", t.scenario}};
  if (t.seed) h["seed"] = *t.seed;
  h["parameters"] = t.parameters;
  h["grid"] = axes_json(t);
  return h;
}

}  // namespace detail

inline std::string format_csv(const Table& t) {
  std::string out;
  out += "# qrmlab " + t.version + "\n";
  out += "# scenario: " + t.scenario + "\n";
  if (t.seed) out += "# seed: " + std::to_string(*t.seed) + "\n";
  out += "# parameters: " + t.parameters.dump() + "\n";
  for (const auto& a : t.axes) {
    out += "# axis: " + a.name + " " + a.scale + " " + std::to_string(a.values.size()) +
           " points";
    if (a.scale != "list") out += " [" + format_double(a.min) + ", " + format_double(a.max) + "]";
    out += "\n";
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + format_double(r[c]);
    out += "\n";
  }
  return out;
}

inline std::string format_json(const Table& t) {
  json doc = detail::header_json(t);
  doc["columns"] = t.columns;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (double v : r) row.push_back(number_json(v));
    rows.push_back(row);
  }
  doc["rows"] = rows;
  return doc.dump(1) + "\n";
}

inline std::string format_meta(const Table& t, OutputFormat data_format) {
  json m = detail::header_json(t);
  m["data_file"] = t.name + (data_format == OutputFormat::csv ? ".csv" : ".json");
  m["columns"] = t.columns;
  m["rows"] = t.rows.size();
  m["units"] = "energies, rates and times in units of epsilon";
  m["reference_loci"] = t.reference_loci;
  m["summary"] = t.summary;
  m["warnings"] = t.warnings;
  return m.dump(2) + "\n";
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

// Writes the data file and the meta file into dir; returns both paths.
inline std::pair<std::filesystem::path, std::filesystem::path> write_outputs(
    const Table& t, const std::filesystem::path& dir, OutputFormat format) {
  std::filesystem::create_directories(dir);
  const auto data = dir / (t.name + (format == OutputFormat::csv ? ".csv" : ".json"));
  const auto meta = dir / (t.name + ".meta.json");
  write_file(data, format == OutputFormat::csv ? format_csv(t) : format_json(t));
  write_file(meta, format_meta(t, format));
  return {data, meta};
}

}  // namespace qrmlab::cli

#endif  // QRMLAB_CLI_OUTPUT_HPP
