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

#ifndef QRMLAB_QRM_HPP
#define QRMLAB_QRM_HPP

#include <cmath>
#include <string>
#include <vector>

#include "qrmlab/matops.hpp"

namespace qrmlab {

// One reservoir: reset to tau at rate gamma.
struct ResetChannel {
  Operator tau;
  double gamma = 0.0;
};

// Reset model generator
//   L(rho) = -i[H, rho] + sum_j gamma_j (tau_j tr(rho) - rho).
struct QrmSystem {
  Operator h;
  std::vector<ResetChannel> channels;

  int dim() const { return static_cast<int>(h.rows()); }
};

// All channels folded into one: Gamma = sum gamma_j, T = sum gamma_j tau_j / Gamma.
struct Recombined {
  double gamma_total = 0.0;
  Operator t;
};

inline void validate(const QrmSystem& sys) {
  if (sys.channels.empty()) throw ContractError("QrmSystem: no reset channels");
  require_hermitian(sys.h, "QrmSystem.h");
  for (std::size_t j = 0; j < sys.channels.size(); ++j) {
    const auto& c = sys.channels[j];
    const std::string tag = "QrmSystem.channels[" + std::to_string(j) + "]";
    if (c.tau.rows() != sys.h.rows() || c.tau.cols() != sys.h.cols())
      throw DimensionError(tag + ": tau dimension differs from h");
    if (!(c.gamma > 0.0) || !std::isfinite(c.gamma))
      throw ContractError(tag + ": gamma must be positive");
    if (!is_density_matrix(c.tau, 1e-10))
      throw ContractError(tag + ": tau is not a density matrix");
  }
}

inline Recombined recombine(const QrmSystem& sys) {
  Recombined rc;
  rc.t = Operator::Zero(sys.dim(), sys.dim());
  for (const auto& c : sys.channels) {
    rc.gamma_total += c.gamma;
    rc.t += c.gamma * c.tau;
  }
  rc.t /= rc.gamma_total;
  return rc;
}

inline Operator apply_generator(const QrmSystem& sys, const Recombined& rc,
                                const Operator& rho) {
  return -kI * commutator(sys.h, rho) +
         rc.gamma_total * (rc.t * rho.trace() - rho);
}

inline Operator apply_generator(const QrmSystem& sys, const Operator& rho) {
  if (rho.rows() != sys.h.rows())
    throw DimensionError("apply_generator: dimension mismatch");
  return apply_generator(sys, recombine(sys), rho);
}

inline Superoperator generator_superoperator(const QrmSystem& sys) {
  const Recombined rc = recombine(sys);
  return vectorize_map(
      [&](const Operator& x) { return apply_generator(sys, rc, x); },
      sys.dim());
}

namespace detail {

// Eigenbasis of h with clustered eigenvalues replaced by their cluster mean,
// so degenerate pairs give exactly zero Bohr frequency.
inline EigenBasis clustered_basis(const Operator& h) {
  EigenBasis eb = hermitian_eigen(h);
  for (const auto& grp : cluster_indices(eb.values, default_cluster_tol(eb.values))) {
    double mean = 0.0;
    for (int i : grp) mean += eb.values(i);
    mean /= static_cast<double>(grp.size());
    for (int i : grp) eb.values(i) = mean;
  }
  return eb;
}

}  // namespace detail

// rho_H(T) = (i[h, .] + 1)^{-1}(T).
inline Operator rho_map(const Operator& h, const Operator& t) {
  if (t.rows() != h.rows()) throw DimensionError("rho_map: dimension mismatch");
  const EigenBasis eb = detail::clustered_basis(h);
  Operator x = eb.vectors.adjoint() * t * eb.vectors;
  for (Eigen::Index m = 0; m < x.rows(); ++m)
    for (Eigen::Index n = 0; n < x.cols(); ++n)
      x(m, n) /= kI * (eb.values(m) - eb.values(n)) + 1.0;
  return eb.vectors * x * eb.vectors.adjoint();
}

inline Operator steady_state(const QrmSystem& sys) {
  validate(sys);
  const Recombined rc = recombine(sys);
  return project_psd(rho_map(sys.h / rc.gamma_total, rc.t));
}

inline Operator propagate(const QrmSystem& sys, const Operator& rho0, double t) {
  if (!(t >= 0.0)) throw ContractError("propagate: negative time");
  if (rho0.rows() != sys.h.rows())
    throw DimensionError("propagate: dimension mismatch");
  validate(sys);
  const Recombined rc = recombine(sys);
  const Operator rho_ss = rho_map(sys.h / rc.gamma_total, rc.t);
  const cplx tr0 = rho0.trace();
  const EigenBasis eb = detail::clustered_basis(sys.h);
  Operator x = eb.vectors.adjoint() * (rho0 - tr0 * rho_ss) * eb.vectors;
  for (Eigen::Index m = 0; m < x.rows(); ++m)
    for (Eigen::Index n = 0; n < x.cols(); ++n)
      x(m, n) *= std::exp(-t * (kI * (eb.values(m) - eb.values(n)) +
                                rc.gamma_total));
  return eb.vectors * x * eb.vectors.adjoint() + tr0 * rho_ss;
}

namespace detail {

// Greedy multiset match; returns the worst distance of a predicted value to
// its partner.
inline double multiset_distance(const std::vector<cplx>& predicted,
                                const std::vector<cplx>& computed) {
  if (predicted.size() != computed.size()) return INFINITY;
  std::vector<bool> used(computed.size(), false);
  double worst = 0.0;
  for (const cplx& p : predicted) {
    std::size_t best = computed.size();
    double bd = INFINITY;
    for (std::size_t k = 0; k < computed.size(); ++k)
      if (!used[k] && std::abs(computed[k] - p) < bd) {
        bd = std::abs(computed[k] - p);
        best = k;
      }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

}  // namespace detail

// Eigenvalues of the vectorised generator, sorted by (real, imag). Throws
// VerificationError unless they equal {0, -Gamma, -Gamma - i(e_j - e_k)}.
inline std::vector<cplx> generator_spectrum(const QrmSystem& sys,
                                            double tol = 1e-8) {
  validate(sys);
  const Superoperator s = generator_superoperator(sys);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(s.matrix, false);
  std::vector<cplx> computed(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(computed.begin(), computed.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  const double big_gamma = recombine(sys).gamma_total;
  const Eigen::VectorXd e = hermitian_eigenvalues(sys.h);
  const int d = sys.dim();
  std::vector<cplx> predicted{0.0};
  for (int j = 0; j < d - 1; ++j) predicted.emplace_back(-big_gamma, 0.0);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      if (j != k) predicted.push_back(-big_gamma - kI * (e(j) - e(k)));

  const double dist = detail::multiset_distance(predicted, computed);
  if (!(dist <= tol))
    throw VerificationError("generator_spectrum: deviation " +
                            std::to_string(dist) + " from the reset-model law");
  return computed;
}

struct ChoiReport {
  double min_choi_eigenvalue = 0.0;
  double trace_preservation_residual = 0.0;
};

inline ChoiReport choi_cptp_check(const Operator& h) {
  require_hermitian(h, "choi_cptp_check");
  const int d = static_cast<int>(h.rows());
  Operator choi = Operator::Zero(d * d, d * d);
  ChoiReport rep;
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) {
      Operator e = Operator::Zero(d, d);
      e(m, n) = 1.0;
      const Operator y = rho_map(h, e);
      choi.block(m * d, n * d, d, d) = y;
      rep.trace_preservation_residual = std::max(
          rep.trace_preservation_residual, std::abs(y.trace() - e.trace()));
    }
  rep.min_choi_eigenvalue = hermitian_eigenvalues(choi).minCoeff();
  return rep;
}

// Heisenberg picture: i[H, x] + Gamma(I tr(T x) - x).
inline Operator adjoint_apply(const QrmSystem& sys, const Operator& x) {
  if (x.rows() != sys.h.rows())
    throw DimensionError("adjoint_apply: dimension mismatch");
  const Recombined rc = recombine(sys);
  return kI * commutator(sys.h, x) +
         rc.gamma_total * (identity(sys.dim()) * (rc.t * x).trace() - x);
}

// For reset models detailed balance is equivalent to [T, H] = 0.
inline bool detailed_balance(const QrmSystem& sys, double tol = 1e-10) {
  validate(sys);
  const Recombined rc = recombine(sys);
  if (hermitian_eigenvalues(rc.t).minCoeff() <= 1e-12)
    throw ContractError("detailed_balance: T is not positive definite");
  return op_norm(commutator(rc.t, sys.h)) <=
         tol * op_norm(rc.t) * op_norm(sys.h);
}

}  // namespace qrmlab

#endif  // QRMLAB_QRM_HPP
