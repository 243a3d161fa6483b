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

#ifndef QRMLAB_FIT_HPP
#define QRMLAB_FIT_HPP

#include <cmath>
#include <vector>

#include "qrmlab/errors.hpp"

namespace qrmlab {

// Least-squares slope of ln|y| against ln|x|, i.e. p in y ~ C x^p.
inline double fit_power_law(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ContractError("fit_power_law: need at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0 || ys[i] == 0.0)
      throw ContractError("fit_power_law: zero sample");
    const double lx = std::log(std::abs(xs[i])), ly = std::log(std::abs(ys[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ContractError("fit_power_law: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

// (max - min) / |mean|, the spread used for plateau checks.
inline double relative_spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double lo = v[0], hi = v[0], sum = 0.0;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  }
  const double mean = sum / static_cast<double>(v.size());
  return (hi - lo) / std::abs(mean);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(i == n - 1 ? hi : lo + (hi - lo) * i / static_cast<double>(n - 1));
  return out;
}

inline std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (double e : linspace(std::log10(lo), std::log10(hi), n))
    out.push_back(std::pow(10.0, e));
  // keep the end points exact
  if (n > 0) out.front() = lo;
  if (n > 1) out.back() = hi;
  return out;
}

}  // namespace qrmlab

#endif  // QRMLAB_FIT_HPP
