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

#ifndef QRMLAB_RANDOM_HPP
#define QRMLAB_RANDOM_HPP

#include <cstdint>
#include <random>

#include "qrmlab/matops.hpp"

namespace qrmlab {

// Seeded draws for random systems. mt19937_64 keeps sequences identical
// across runs on one toolchain, which is all the CLI promises.
using Rng = std::mt19937_64;

inline Operator random_ginibre(int d, Rng& rng) {
  std::normal_distribution<double> nd;
  Operator x(d, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(nd(rng), nd(rng));
  return x;
}

inline Operator random_hermitian(int d, Rng& rng, double scale = 1.0) {
  return scale * hermitian_part(random_ginibre(d, rng));
}

// Full-rank density matrix with eigenvalues bounded away from zero by
// roughly min_weight / d.
inline Operator random_density_matrix(int d, Rng& rng, double min_weight = 0.05) {
  const Operator g = random_ginibre(d, rng);
  Operator rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - min_weight) * rho + min_weight * identity(d) / static_cast<double>(d);
  return hermitian_part(rho);
}

inline double random_uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace qrmlab

#endif  // QRMLAB_RANDOM_HPP
