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

#ifndef QRMLAB_AFFINE_HPP
#define QRMLAB_AFFINE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "qrmlab/entropy.hpp"
#include "qrmlab/qrm.hpp"

namespace qrmlab {

// Share lambda_j of the Hamiltonian handed to channel j:
//   L_j(rho) = -i[lambda_j H, rho] + gamma_j (tau_j tr(rho) - rho).
// The shares sum to one unless db_exploration is set, which lifts the
// constraint for detailed-balance studies.
struct AffineSplit {
  std::vector<double> lambdas;
  bool db_exploration = false;
};

inline AffineSplit gamma_ratio_split(const QrmSystem& sys) {
  const double big_gamma = recombine(sys).gamma_total;
  AffineSplit s;
  for (const auto& c : sys.channels) s.lambdas.push_back(c.gamma / big_gamma);
  return s;
}

inline void validate(const QrmSystem& sys, const AffineSplit& split) {
  if (split.lambdas.size() != sys.channels.size())
    throw DimensionError("AffineSplit: one lambda per channel expected");
  double sum = 0.0;
  for (double l : split.lambdas) {
    if (!std::isfinite(l)) throw ContractError("AffineSplit: non-finite lambda");
    sum += l;
  }
  if (!split.db_exploration && std::abs(sum - 1.0) > 1e-12)
    throw ContractError("AffineSplit: lambdas sum to " + std::to_string(sum) +
                        ", expected 1");
}

inline Operator split_generator_apply(const QrmSystem& sys, const AffineSplit& split,
                                      std::size_t j, const Operator& rho) {
  const ResetChannel& c = sys.channels.at(j);
  return -kI * split.lambdas.at(j) * commutator(sys.h, rho) +
         c.gamma * (c.tau * rho.trace() - rho);
}

inline std::vector<LinearMap> split_generators(const QrmSystem& sys,
                                               const AffineSplit& split) {
  std::vector<LinearMap> out;
  for (std::size_t j = 0; j < sys.channels.size(); ++j)
    out.push_back([&sys, &split, j](const Operator& x) {
      return split_generator_apply(sys, split, j, x);
    });
  return out;
}

// rho_j+ = gamma_j (i lambda_j [H, .] + gamma_j)^{-1}(tau_j).
inline Operator split_steady_state(const QrmSystem& sys, const AffineSplit& split,
                                   std::size_t j) {
  const ResetChannel& c = sys.channels.at(j);
  const Eigen::VectorXd ev = hermitian_eigenvalues(c.tau);
  if (ev.minCoeff() <= 1e-12 * ev.maxCoeff())
    throw ContractError("split_steady_state: tau_" + std::to_string(j) +
                        " is singular");
  return project_psd(rho_map(split.lambdas.at(j) * sys.h / c.gamma, c.tau));
}

inline std::vector<Operator> split_steady_states(const QrmSystem& sys,
                                                 const AffineSplit& split) {
  std::vector<Operator> out;
  for (std::size_t j = 0; j < sys.channels.size(); ++j)
    out.push_back(split_steady_state(sys, split, j));
  return out;
}

// Individual EPs at the global steady state.
inline EpReport sigma_components(const QrmSystem& sys, const AffineSplit& split) {
  validate(sys);
  validate(sys, split);
  return entropy_production(split_generators(sys, split), steady_state(sys),
                            split_steady_states(sys, split));
}

// Qubit model H = [[0, d/2], [d/2, e]] with diagonal tau_j only.
inline double kappa(const QrmSystem& sys, const AffineSplit& split, std::size_t j) {
  const Operator& h = sys.h;
  const Operator& tau = sys.channels.at(j).tau;
  const double tiny = 1e-14 * std::max(1.0, max_abs(h));
  if (h.rows() != 2 || std::abs(h(0, 0)) > tiny ||
      std::abs(h(0, 1).imag()) > tiny || std::abs(h(1, 1).imag()) > tiny ||
      std::abs(tau(0, 1)) > 1e-14)
    throw ContractError("kappa: needs the real qubit model with diagonal reset state");
  const double eps = h(1, 1).real();
  const double delta = 2.0 * h(0, 1).real();
  const double lam = split.lambdas.at(j);
  const double gam = sys.channels[j].gamma;
  const double t = tau(0, 0).real();
  const double a = eps * eps * lam * lam + gam * gam;
  return std::sqrt(a * (1.0 - 2.0 * t) * (1.0 - 2.0 * t) /
                   (a + lam * lam * delta * delta));
}

// With rho(x) = (x i[H, .] + 1)^{-1}(T):
//   S(rho(mu)) + S(rho(mu)|rho(lambda)) - S(rho(lambda)).
// Multiplied by (1 - lambda/mu) it is nonnegative.
inline double resolvent_entropy_gap(const QrmSystem& sys, double lambda, double mu) {
  if (mu == 0.0) throw ContractError("resolvent_entropy_gap: mu must be nonzero");
  validate(sys);
  const Operator t = recombine(sys).t;
  const Eigen::VectorXd ev = hermitian_eigenvalues(t);
  if (ev.minCoeff() <= 1e-12 * ev.maxCoeff())
    throw ContractError("resolvent_entropy_gap: T is singular");
  const Operator rl = project_psd(rho_map(lambda * sys.h, t));
  const Operator rm = project_psd(rho_map(mu * sys.h, t));
  return von_neumann_entropy(rm) + relative_entropy(rm, rl).value() -
         von_neumann_entropy(rl);
}

}  // namespace qrmlab

#endif  // QRMLAB_AFFINE_HPP
