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

#ifndef QRMLAB_MODELS_HPP
#define QRMLAB_MODELS_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "qrmlab/affine.hpp"
#include "qrmlab/qrm.hpp"
#include "qrmlab/tripartite.hpp"

namespace qrmlab {

// ---------------------------------------------------------------------------
// Single qubit, H = [[0, delta/2], [delta/2, epsilon]], diagonal resets
// tau_j = diag(t_j, 1 - t_j). All energies in units of epsilon in practice.

struct QubitReservoir {
  double t = 0.5;
  double gamma = 0.0;
};

struct SingleQubitParams {
  double epsilon = 1.0;
  double delta = 0.0;
  std::vector<QubitReservoir> reservoirs;
  std::optional<std::vector<double>> lambdas;  // default gamma_j / Gamma
};

inline Operator qubit_reset_state(double t) {
  Operator tau = Operator::Zero(2, 2);
  tau(0, 0) = t;
  tau(1, 1) = 1.0 - t;
  return tau;
}

inline void validate(const SingleQubitParams& p) {
  if (!std::isfinite(p.epsilon) || !std::isfinite(p.delta))
    throw ContractError("SingleQubitParams: non-finite energy");
  if (p.reservoirs.empty()) throw ContractError("SingleQubitParams: no reservoir");
  bool any = false;
  for (const auto& r : p.reservoirs) {
    if (!(r.t > 0.0 && r.t < 1.0) || r.t == 0.5)
      throw ContractError("SingleQubitParams: t must lie in (0,1) minus {1/2}");
    if (!(r.gamma >= 0.0) || !std::isfinite(r.gamma))
      throw ContractError("SingleQubitParams: gamma must be >= 0");
    any = any || r.gamma > 0.0;
  }
  if (!any) throw ContractError("SingleQubitParams: all rates vanish");
  if (p.lambdas && p.lambdas->size() != p.reservoirs.size())
    throw ContractError("SingleQubitParams: one lambda per reservoir");
}

// Reservoirs with gamma = 0 are dropped; that is how the two-reservoir
// model is obtained from three.
inline QrmSystem build_single_qubit(const SingleQubitParams& p) {
  validate(p);
  QrmSystem sys;
  sys.h = Operator::Zero(2, 2);
  sys.h(0, 1) = sys.h(1, 0) = p.delta / 2.0;
  sys.h(1, 1) = p.epsilon;
  for (const auto& r : p.reservoirs)
    if (r.gamma > 0.0) sys.channels.push_back({qubit_reset_state(r.t), r.gamma});
  return sys;
}

// Split matching build_single_qubit's channel list.
inline AffineSplit build_single_qubit_split(const SingleQubitParams& p) {
  validate(p);
  double big_gamma = 0.0;
  for (const auto& r : p.reservoirs) big_gamma += r.gamma;
  AffineSplit s;
  for (std::size_t j = 0; j < p.reservoirs.size(); ++j) {
    if (p.reservoirs[j].gamma <= 0.0) {
      if (p.lambdas && (*p.lambdas)[j] != 0.0)
        throw ContractError("SingleQubitParams: a dropped reservoir must have lambda 0");
      continue;
    }
    s.lambdas.push_back(p.lambdas ? (*p.lambdas)[j] : p.reservoirs[j].gamma / big_gamma);
  }
  return s;
}

// Closed forms below transcribe the qubit model's matrices. They are kept
// independent of the generic path on purpose so the two can check each other.

// Global steady state with Gamma and the averaged population tbar.
inline Operator qubit_steady_state_closed_form(const SingleQubitParams& p) {
  validate(p);
  double big_gamma = 0.0, tbar = 0.0;
  for (const auto& r : p.reservoirs) {
    big_gamma += r.gamma;
    tbar += r.gamma * r.t;
  }
  tbar /= big_gamma;
  const double e = p.epsilon, d = p.delta;
  const double den = e * e + d * d + big_gamma * big_gamma;
  const double p00 = ((e * e + big_gamma * big_gamma) * tbar + d * d / 2.0) / den;
  Operator rho(2, 2);
  rho(0, 0) = p00;
  rho(1, 1) = 1.0 - p00;
  rho(0, 1) = d / 2.0 * cplx(e, -big_gamma) * (1.0 - 2.0 * tbar) / den;
  rho(1, 0) = d / 2.0 * cplx(e, big_gamma) * (1.0 - 2.0 * tbar) / den;
  return rho;
}

// Individual steady state of reservoir j with share lambda.
inline Operator qubit_split_state_closed_form(const SingleQubitParams& p, std::size_t j,
                                              double lambda) {
  validate(p);
  const double e = p.epsilon, d = p.delta;
  const double t = p.reservoirs.at(j).t, g = p.reservoirs[j].gamma;
  const double den = g * g + lambda * lambda * (e * e + d * d);
  const double p00 = (g * g * t + lambda * lambda * (e * e * t + d * d / 2.0)) / den;
  Operator rho(2, 2);
  rho(0, 0) = p00;
  rho(1, 1) = 1.0 - p00;
  rho(0, 1) = lambda * d / 2.0 * cplx(e * lambda, -g) * (1.0 - 2.0 * t) / den;
  rho(1, 0) = lambda * d / 2.0 * cplx(e * lambda, g) * (1.0 - 2.0 * t) / den;
  return rho;
}

// sigma_j at the steady state when every reservoir resets to the same tau.
// The prefactor is gamma_j (gamma_j - lambda_j Gamma)^2; this is what the
// generic computation gives for any gamma_j.
inline double qubit_equal_reset_sigma_closed_form(const SingleQubitParams& p,
                                                  std::size_t j, double lambda) {
  validate(p);
  double big_gamma = 0.0;
  for (const auto& r : p.reservoirs) big_gamma += r.gamma;
  const double e = p.epsilon, d = p.delta;
  const double g = p.reservoirs.at(j).gamma, t = p.reservoirs[j].t;
  const double a = e * e * lambda * lambda + g * g;
  const double k = std::sqrt(a * (1.0 - 2.0 * t) * (1.0 - 2.0 * t) / (a + lambda * lambda * d * d));
  const double pref = g - lambda * big_gamma;
  return g * pref * pref * k * d * d / 2.0 * (std::log(1.0 + k) - std::log(1.0 - k)) /
         (a * (e * e + big_gamma * big_gamma + d * d));
}

// One reservoir, delta = 0, diagonal initial state diag(p00, 1 - p00):
// sigma(rho(t)) = gamma e^{-gamma t} (p00 - t_A)
//                 [ln(rho00(t) / rho11(t)) - ln(t_A / (1 - t_A))].
inline double qubit_relaxation_ep_closed_form(double t_a, double gamma, double p00,
                                              double time) {
  const double decay = std::exp(-gamma * time);
  const double r00 = p00 * decay + t_a * (1.0 - decay);
  return gamma * decay * (p00 - t_a) *
         (std::log(r00 / (1.0 - r00)) - std::log(t_a / (1.0 - t_a)));
}

// ---------------------------------------------------------------------------
// Three-qubit chain A - C - B with resets on both ends.

struct ThreeQubitParams {
  double e_a = 0.08, e_c = 0.05, e_b = 0.1;
  double u = 0.1;
  double j_alpha = 0.05, j_beta = 0.1;
  double t_a = 0.95, t_b = 0.6;
  double gamma_a = 0.7, gamma_b = 0.6;
  double g = 0.0;
};

inline void validate(const ThreeQubitParams& p) {
  for (double v : {p.e_a, p.e_c, p.e_b, p.u, p.j_alpha, p.j_beta, p.g})
    if (!std::isfinite(v)) throw ContractError("ThreeQubitParams: non-finite value");
  if (!(p.t_a > 0.0 && p.t_a < 1.0) || !(p.t_b > 0.0 && p.t_b < 1.0))
    throw ContractError("ThreeQubitParams: t_A, t_B must lie in (0,1)");
  if (!(p.gamma_a > 0.0) || !(p.gamma_b > 0.0))
    throw ContractError("ThreeQubitParams: rates must be positive");
}

inline Operator three_qubit_hamiltonian(const ThreeQubitParams& p) {
  const Operator i2 = identity(2);
  Operator n = Operator::Zero(2, 2);
  n(1, 1) = 1.0;
  // two-qubit pieces on |ab>: projector on |11> and the hopping |01><10| + h.c.
  Operator p11 = Operator::Zero(4, 4);
  p11(3, 3) = 1.0;
  Operator hop = Operator::Zero(4, 4);
  hop(1, 2) = hop(2, 1) = 1.0;
  return p.e_a * kron(n, i2, i2) + p.e_c * kron(i2, n, i2) + p.e_b * kron(i2, i2, n) +
         p.u * (kron(p11, i2) + kron(i2, p11)) + p.j_alpha * kron(hop, i2) +
         p.j_beta * kron(i2, hop);
}

inline TripartiteQrm build_three_qubit(const ThreeQubitParams& p) {
  validate(p);
  TripartiteQrm s;
  s.dims = FactorDims{{2, 2, 2}};
  s.tau_a = qubit_reset_state(p.t_a);
  s.tau_b = qubit_reset_state(p.t_b);
  s.gamma_a = p.gamma_a;
  s.gamma_b = p.gamma_b;
  s.h = three_qubit_hamiltonian(p);
  s.g = p.g;
  return s;
}

inline double three_qubit_prefactor(const ThreeQubitParams& p) {
  return p.j_alpha * p.j_beta * (p.t_a - p.t_b) /
         (p.j_alpha * p.j_alpha * p.gamma_b + p.j_beta * p.j_beta * p.gamma_a);
}

inline Operator three_qubit_rho_c0_closed_form(const ThreeQubitParams& p) {
  const double ja2 = p.j_alpha * p.j_alpha, jb2 = p.j_beta * p.j_beta;
  const double den = ja2 * p.gamma_b + jb2 * p.gamma_a;
  Operator r = Operator::Zero(2, 2);
  r(0, 0) = (ja2 * p.t_a * p.gamma_b + jb2 * p.t_b * p.gamma_a) / den;
  r(1, 1) = (ja2 * (1.0 - p.t_a) * p.gamma_b + jb2 * (1.0 - p.t_b) * p.gamma_a) / den;
  return r;
}

inline Operator three_qubit_rho1_closed_form(const ThreeQubitParams& p) {
  Operator r = Operator::Zero(8, 8);
  r(1, 2) = kI * p.j_alpha * p.t_a;
  r(2, 4) = kI * p.j_beta * p.t_b;
  r(3, 5) = kI * p.j_beta * (1.0 - p.t_b);
  r(5, 6) = kI * p.j_alpha * (1.0 - p.t_a);
  return three_qubit_prefactor(p) * (r + r.adjoint()).eval();
}

inline Operator three_qubit_commutator_h_rho0(const ThreeQubitParams& p) {
  Operator c = Operator::Zero(8, 8);
  c(1, 2) = -p.j_alpha * p.t_a * p.gamma_b;
  c(2, 4) = -p.j_beta * p.t_b * p.gamma_a;
  c(3, 5) = -p.j_beta * (1.0 - p.t_b) * p.gamma_a;
  c(5, 6) = -p.j_alpha * (1.0 - p.t_a) * p.gamma_b;
  return three_qubit_prefactor(p) * (c - c.transpose()).eval();
}

// Entropy fluxes phi^# = tr(L^#(rho_g) ln rho^#) with rho^# = tau_#^{(x)3};
// they reduce to gamma_# tr((tau_# - reduced state of #) ln tau_#) and sum
// to the EP. Sign: phi^# = -EpReport::fluxes[#].
inline std::pair<double, double> three_qubit_fluxes(const ThreeQubitParams& p,
                                                    const Operator& rho_g) {
  const Operator ta = qubit_reset_state(p.t_a), tb = qubit_reset_state(p.t_b);
  const FactorDims fd{{2, 2, 2}};
  const Operator ra = partial_trace(rho_g, fd, {0});
  const Operator rb = partial_trace(rho_g, fd, {2});
  const double phi_a = p.gamma_a * ((ta - ra) * log_psd(ta)).trace().real();
  const double phi_b = p.gamma_b * ((tb - rb) * log_psd(tb)).trace().real();
  return {phi_a, phi_b};
}

inline std::pair<double, double> three_qubit_fluxes(const ThreeQubitParams& p) {
  return three_qubit_fluxes(p, exact_steady_state(build_three_qubit(p)));
}

// g^2 coefficients of the fluxes: tr(i[H, rho1] (ln tau_A (x) 1)) and the B
// analogue, with rho1 from the generic expansion.
inline std::pair<double, double> three_qubit_flux_leading(const ThreeQubitParams& p,
                                                          const Operator& rho1) {
  const Operator h = three_qubit_hamiltonian(p);
  const Operator ic = kI * commutator(h, rho1);
  const Operator la = kron(log_psd(qubit_reset_state(p.t_a)), identity(4));
  const Operator lb = kron(identity(4), log_psd(qubit_reset_state(p.t_b)));
  return {(ic * la).trace().real(), (ic * lb).trace().real()};
}

// The exact individual steady states of this model, for every coupling.
inline std::array<Operator, 2> three_qubit_partial_states(const ThreeQubitParams& p) {
  const Operator ta = qubit_reset_state(p.t_a), tb = qubit_reset_state(p.t_b);
  return {kron(ta, ta, ta), kron(tb, tb, tb)};
}

}  // namespace qrmlab

#endif  // QRMLAB_MODELS_HPP
