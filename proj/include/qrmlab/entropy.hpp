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

#ifndef QRMLAB_ENTROPY_HPP
#define QRMLAB_ENTROPY_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "qrmlab/matops.hpp"
#include "qrmlab/qrm.hpp"

namespace qrmlab {

// Real number or +infinity. Relative entropy is +inf off the support
// condition; that has to survive a text round trip, so it is a flag and not
// an IEEE overflow.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_infinite() const { return inf_; }
  double value() const {
    return inf_ ? std::numeric_limits<double>::infinity() : v_;
  }

  std::string to_string() const {
    if (inf_) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v_);
    return buf;
  }

  static ExtendedReal parse(const std::string& s) {
    if (s == "inf" || s == "+inf") return infinity();
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ContractError("ExtendedReal: trailing characters in '" + s + "'");
    return finite(v);
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }

 private:
  ExtendedReal(double v, bool inf) : v_(v), inf_(inf) {}
  double v_;
  bool inf_;
};

namespace detail {

inline double kernel_threshold(const Eigen::VectorXd& ev, double kernel_tol) {
  return kernel_tol >= 0.0 ? kernel_tol : 1e-12 * std::max(ev.maxCoeff(), 0.0);
}

inline void require_density(const Operator& rho, const char* what) {
  if (!is_density_matrix(rho, 1e-8))
    throw ContractError(std::string(what) + ": not a density matrix");
}

}  // namespace detail

// kernel_tol < 0 selects 1e-12 * largest eigenvalue.
inline double von_neumann_entropy(const Operator& rho, double kernel_tol = -1.0) {
  detail::require_density(rho, "von_neumann_entropy");
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho);
  const double kt = detail::kernel_threshold(ev, kernel_tol);
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > kt) s -= ev(i) * std::log(ev(i));
  return std::max(s, 0.0);
}

// S(mu|nu) = tr(mu (ln mu - ln nu)), +inf unless ker nu is inside ker mu.
inline ExtendedReal relative_entropy(const Operator& mu, const Operator& nu,
                                     double kernel_tol = -1.0) {
  detail::require_density(mu, "relative_entropy(mu)");
  detail::require_density(nu, "relative_entropy(nu)");
  const EigenBasis em = hermitian_eigen(mu);
  const EigenBasis en = hermitian_eigen(nu);
  const double ktm = detail::kernel_threshold(em.values, kernel_tol);
  const double ktn = detail::kernel_threshold(en.values, kernel_tol);

  double mu_log_mu = 0.0;
  for (Eigen::Index i = 0; i < em.values.size(); ++i)
    if (em.values(i) > ktm) mu_log_mu += em.values(i) * std::log(em.values(i));

  double mu_log_nu = 0.0;
  for (Eigen::Index i = 0; i < en.values.size(); ++i) {
    const auto v = en.vectors.col(i);
    const double w = (v.adjoint() * mu * v)(0, 0).real();
    if (en.values(i) > ktn)
      mu_log_nu += w * std::log(en.values(i));
    else if (w > ktm)
      return ExtendedReal::infinity();
  }
  return ExtendedReal::finite(mu_log_mu - mu_log_nu);
}

struct EpReport {
  double total = 0.0;
  std::vector<double> per_reservoir;  // sigma_j
  std::vector<double> fluxes;         // -tr(L_j(rho) ln rho_j+)
  double balance_residual = 0.0;
};

namespace detail {

inline Operator faithful_log(const Operator& rho, const char* what) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho);
  if (ev.minCoeff() <= 1e-12 * ev.maxCoeff())
    throw ContractError(std::string(what) + ": state is not faithful");
  return log_psd(rho);
}

inline double re_trace_product(const Operator& a, const Operator& b) {
  // tr(a b) without forming the product
  return (a.transpose().cwiseProduct(b)).sum().real();
}

}  // namespace detail

// sigma_j = tr(L_j(rho)(ln rho_j+ - ln rho)), flux_j = -tr(L_j(rho) ln rho_j+).
inline EpReport entropy_production(const std::vector<LinearMap>& generators,
                                   const Operator& rho,
                                   const std::vector<Operator>& steady_states) {
  if (generators.size() != steady_states.size())
    throw DimensionError("entropy_production: one steady state per generator");
  detail::require_density(rho, "entropy_production(rho)");
  const Operator log_rho = detail::faithful_log(rho, "entropy_production(rho)");

  EpReport rep;
  Operator l_total = Operator::Zero(rho.rows(), rho.cols());
  double flux_sum = 0.0;
  for (std::size_t j = 0; j < generators.size(); ++j) {
    const Operator log_j =
        detail::faithful_log(steady_states[j], "entropy_production(rho_j+)");
    const Operator lj = generators[j](rho);
    l_total += lj;
    const double a = detail::re_trace_product(lj, log_j);
    const double b = detail::re_trace_product(lj, log_rho);
    rep.per_reservoir.push_back(a - b);
    rep.fluxes.push_back(-a);
    rep.total += a - b;
    flux_sum += a;
  }
  // dS/dt = -tr(L(rho)(ln rho + 1)); the trace part vanishes for trace
  // preserving L but is kept so the residual also sees trace leaks.
  const double dsdt = -detail::re_trace_product(l_total, log_rho) -
                      l_total.trace().real();
  rep.balance_residual = std::abs(dsdt - rep.total + flux_sum);
  return rep;
}

// At the global steady state sum_j L_j(rho+) = 0, so the ln rho term drops:
// sigma = sum_j tr(L_j(rho+) ln rho_j+). Better conditioned when rho+ is
// nearly singular or only known to ~1e-12.
inline double steady_entropy_production(const std::vector<LinearMap>& generators,
                                        const Operator& rho_ss,
                                        const std::vector<Operator>& steady_states) {
  if (generators.size() != steady_states.size())
    throw DimensionError("steady_entropy_production: one steady state per generator");
  double s = 0.0;
  for (std::size_t j = 0; j < generators.size(); ++j)
    s += detail::re_trace_product(
        generators[j](rho_ss),
        detail::faithful_log(steady_states[j], "steady_entropy_production"));
  return s;
}

// sigma_L(rho) = tr(L(rho)(ln rho+ - ln rho)) for the unsplit generator.
inline double ep_single(const QrmSystem& sys, const Operator& rho) {
  detail::require_density(rho, "ep_single");
  const Operator lr = apply_generator(sys, rho);
  const Operator diff = detail::faithful_log(steady_state(sys), "ep_single(rho+)") -
                        detail::faithful_log(rho, "ep_single(rho)");
  return detail::re_trace_product(lr, diff);
}

}  // namespace qrmlab

#endif  // QRMLAB_ENTROPY_HPP
