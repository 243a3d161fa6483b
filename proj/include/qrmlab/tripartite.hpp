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

#ifndef QRMLAB_TRIPARTITE_HPP
#define QRMLAB_TRIPARTITE_HPP

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qrmlab/entropy.hpp"
#include "qrmlab/matops.hpp"

namespace qrmlab {

// Space H_A (x) H_C (x) H_B, A most significant. Reservoirs act on the two
// ends only; H couples everything with strength g:
//   L_g = D_A + D_B - i g [H, .].
struct TripartiteQrm {
  FactorDims dims;  // (n_A, n_C, n_B)
  Operator tau_a, tau_b;
  double gamma_a = 0.0, gamma_b = 0.0;
  Operator h;
  double g = 0.0;

  int na() const { return dims.dims.at(0); }
  int nc() const { return dims.dims.at(1); }
  int nb() const { return dims.dims.at(2); }
  int dim() const { return dims.total(); }
};

// Which end(s) a dissipator, reduction or expansion refers to.
enum class Which { A, B, Both };

inline const char* to_string(Which w) {
  switch (w) {
    case Which::A: return "A";
    case Which::B: return "B";
    default: return "AB";
  }
}

inline void validate(const TripartiteQrm& sys) {
  if (sys.dims.dims.size() != 3) throw DimensionError("TripartiteQrm: need (n_A, n_C, n_B)");
  for (int d : sys.dims.dims)
    if (d < 1) throw DimensionError("TripartiteQrm: factor dimension < 1");
  if (sys.h.rows() != sys.dim() || sys.h.cols() != sys.dim())
    throw DimensionError("TripartiteQrm: h does not act on n_A n_C n_B");
  require_hermitian(sys.h, "TripartiteQrm.h");
  if (sys.tau_a.rows() != sys.na() || sys.tau_b.rows() != sys.nb())
    throw DimensionError("TripartiteQrm: reset state dimension");
  if (!is_density_matrix(sys.tau_a, 1e-10) || !is_density_matrix(sys.tau_b, 1e-10))
    throw ContractError("TripartiteQrm: reset states must be density matrices");
  if (!(sys.gamma_a > 0.0) || !(sys.gamma_b > 0.0))
    throw ContractError("TripartiteQrm: rates must be positive");
  if (!std::isfinite(sys.g)) throw ContractError("TripartiteQrm: g not finite");
}

inline Operator trace_out_a(const TripartiteQrm& s, const Operator& x) {
  return partial_trace(x, s.dims, {1, 2});
}
inline Operator trace_out_b(const TripartiteQrm& s, const Operator& x) {
  return partial_trace(x, s.dims, {0, 1});
}
inline Operator trace_out_ab(const TripartiteQrm& s, const Operator& x) {
  return partial_trace(x, s.dims, {1});
}

// D_A(rho) = gamma_A (tau_A (x) tr_A rho - rho), D_B likewise on the right.
inline Operator dissipator_apply(const TripartiteQrm& s, Which w, const Operator& rho) {
  if (rho.rows() != s.dim()) throw DimensionError("dissipator_apply: dimension mismatch");
  Operator out = Operator::Zero(rho.rows(), rho.cols());
  if (w != Which::B) out += s.gamma_a * (kron(s.tau_a, trace_out_a(s, rho)) - rho);
  if (w != Which::A) out += s.gamma_b * (kron(trace_out_b(s, rho), s.tau_b) - rho);
  return out;
}

inline Operator generator_apply(const TripartiteQrm& s, const Operator& rho) {
  return dissipator_apply(s, Which::Both, rho) - kI * s.g * commutator(s.h, rho);
}

// Generator seen by one reservoir alone, with its share `coupling` of H.
inline Operator partial_generator_apply(const TripartiteQrm& s, Which w,
                                        double coupling, const Operator& rho) {
  if (w == Which::Both) throw ContractError("partial_generator_apply: pick A or B");
  return dissipator_apply(s, w, rho) - kI * coupling * commutator(s.h, rho);
}

namespace detail {

inline void require_reduced_zero(const Operator& red, const Operator& x,
                                 const char* what) {
  if (max_abs(red) > 1e-10 * std::max(1.0, max_abs(x)))
    throw ContractError(std::string(what) + ": argument has nonzero partial trace");
}

}  // namespace detail

// Inverse of L_0 = D_A + D_B on {x : tr_AB x = 0}.
inline Operator l0_inverse(const TripartiteQrm& s, const Operator& x) {
  detail::require_reduced_zero(trace_out_ab(s, x), x, "l0_inverse");
  const double ga = s.gamma_a, gb = s.gamma_b;
  return -(x + (ga / gb) * kron(s.tau_a, trace_out_a(s, x)) +
           (gb / ga) * kron(trace_out_b(s, x), s.tau_b)) /
         (ga + gb);
}

// Inverse of D_A (or D_B) on {x : tr_A x = 0}: there it is just -gamma_A.
inline Operator partial_dissipator_inverse(const TripartiteQrm& s, Which w,
                                           const Operator& x) {
  if (w == Which::Both) throw ContractError("partial_dissipator_inverse: pick A or B");
  if (w == Which::A) {
    detail::require_reduced_zero(trace_out_a(s, x), x, "partial_dissipator_inverse");
    return -x / s.gamma_a;
  }
  detail::require_reduced_zero(trace_out_b(s, x), x, "partial_dissipator_inverse");
  return -x / s.gamma_b;
}

namespace detail {

// The expansion around the kernel of D_A + D_B, D_A or D_B follows one
// pattern. Kernel elements are embed(X) for X on the surviving factors,
// reduce() is the matching partial trace.
inline std::vector<int> kept_factors(Which w) {
  switch (w) {
    case Which::A: return {1, 2};
    case Which::B: return {0, 1};
    default: return {1};
  }
}

inline int reduced_dim(const TripartiteQrm& s, Which w) {
  switch (w) {
    case Which::A: return s.nc() * s.nb();
    case Which::B: return s.na() * s.nc();
    default: return s.nc();
  }
}

inline Operator reduce(const TripartiteQrm& s, Which w, const Operator& y) {
  return partial_trace(y, s.dims, kept_factors(w));
}

inline Operator embed(const TripartiteQrm& s, Which w, const Operator& x) {
  switch (w) {
    case Which::A: return kron(s.tau_a, x);
    case Which::B: return kron(x, s.tau_b);
    default: return kron(s.tau_a, x, s.tau_b);
  }
}

inline Operator dissipator_inverse(const TripartiteQrm& s, Which w, const Operator& x) {
  return w == Which::Both ? l0_inverse(s, x) : partial_dissipator_inverse(s, w, x);
}

inline Operator averaged(const TripartiteQrm& s, Which w) {
  return hermitian_part(reduce(s, w, s.h * embed(s, w, identity(reduced_dim(s, w)))));
}

}  // namespace detail

// Hbar^tau = tr_AB(H tau_A (x) 1_C (x) tau_B), on H_C.
inline Operator averaged_hamiltonian(const TripartiteQrm& s) {
  return detail::averaged(s, Which::Both);
}

// Hbar^{tau_A} = tr_A((tau_A (x) 1) H) on H_C (x) H_B; B analogously on H_A (x) H_C.
inline Operator partially_averaged_hamiltonian(const TripartiteQrm& s, Which w) {
  if (w == Which::Both) throw ContractError("partially_averaged_hamiltonian: pick A or B");
  return detail::averaged(s, w);
}

// Smallest distance between eigenvalues (what the expansion divides by).
inline double min_eigen_gap(const Eigen::VectorXd& e) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 1; j < e.size(); ++j) gap = std::min(gap, std::abs(e(j) - e(j - 1)));
  return gap;
}

// Smallest distance between two Bohr frequencies e_j - e_k, j != k.
inline double min_bohr_separation(const Eigen::VectorXd& e) {
  std::vector<double> bohr;
  for (Eigen::Index j = 0; j < e.size(); ++j)
    for (Eigen::Index k = 0; k < e.size(); ++k)
      if (j != k) bohr.push_back(e(j) - e(k));
  std::sort(bohr.begin(), bohr.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < bohr.size(); ++i) gap = std::min(gap, bohr[i] - bohr[i - 1]);
  return gap;
}

// Everything the leading order of one expansion needs, computed without
// throwing so the assumption report can show partial results.
struct SectorAnalysis {
  Which which = Which::Both;
  Operator h_bar;
  EigenBasis basis;
  double min_gap = 0.0;            // eigenvalue spacing
  double min_bohr_sep = 0.0;       // spacing of Bohr frequencies
  bool simple = false;             // min_gap > tol; all the expansion needs
  bool spec_ok = false;            // simple and distinct Bohr frequencies
  Eigen::MatrixXd phi_d;  // empty unless simple
  int kernel_dim = -1;    // -1: not computed
  Eigen::VectorXd weights;  // rho0 diagonal in the Hbar basis, trace one
  double min_weight = std::numeric_limits<double>::quiet_NaN();
  Operator rho0_reduced;
};

namespace detail {

// Phi_D(X) = Diag tr([H, L0^{-1}([H, embed(Diag X)])]) in the Hbar eigenbasis.
inline Eigen::MatrixXd phi_d_in_basis(const TripartiteQrm& s, Which w,
                                      const EigenBasis& b) {
  const Eigen::Index n = b.values.size();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Operator dk = b.vectors.col(k) * b.vectors.col(k).adjoint();
    const Operator inner = dissipator_inverse(s, w, commutator(s.h, embed(s, w, dk)));
    const Operator y = b.vectors.adjoint() * reduce(s, w, commutator(s.h, inner)) * b.vectors;
    for (Eigen::Index j = 0; j < n; ++j) m(j, k) = y(j, j).real();
  }
  return m;
}

}  // namespace detail

inline SectorAnalysis analyze_sector(const TripartiteQrm& s, Which w,
                                     double spec_tol = 1e-9) {
  SectorAnalysis a;
  a.which = w;
  a.h_bar = detail::averaged(s, w);
  a.basis = hermitian_eigen(a.h_bar);
  a.min_gap = min_eigen_gap(a.basis.values);
  a.min_bohr_sep = min_bohr_separation(a.basis.values);
  a.simple = a.min_gap > spec_tol;
  a.spec_ok = a.simple && a.min_bohr_sep > spec_tol;
  if (!a.simple) return a;

  a.phi_d = detail::phi_d_in_basis(s, w, a.basis);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.phi_d, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double thr = 1e-8 * sv(0);
  a.kernel_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= thr) ++a.kernel_dim;
  if (a.kernel_dim != 1) return a;

  Eigen::VectorXd v = svd.matrixV().col(sv.size() - 1);
  if (std::abs(v.sum()) < 1e-12 * v.cwiseAbs().sum()) return a;  // traceless kernel
  v /= v.sum();
  a.min_weight = v.minCoeff();
  a.weights = v;
  if (a.min_weight >= -1e-12 * v.maxCoeff()) {
    Eigen::VectorXd c = v.cwiseMax(0.0);
    c /= c.sum();
    a.weights = c;
    a.rho0_reduced = a.basis.vectors * c.cast<cplx>().asDiagonal() * a.basis.vectors.adjoint();
  }
  return a;
}

// Matrix of Phi_D on the diagonal subspace of the Hbar eigenbasis. Square
// n x n for every sector (n = n_C, or n_C n_B / n_A n_C for one end).
inline Eigen::MatrixXd phi_d_matrix(const TripartiteQrm& s, Which w = Which::Both) {
  const SectorAnalysis a = analyze_sector(s, w);
  if (!a.simple)
    throw ContractError(std::string("phi_d_matrix: averaged Hamiltonian spectrum is not "
                                    "simple (sector ") +
                        to_string(w) + ")");
  return a.phi_d;
}

struct SpecCheck {
  bool ok = false;      // simple spectrum and distinct Bohr frequencies
  bool simple = false;  // simple spectrum only
  double min_gap = 0.0;
  double min_bohr_separation = 0.0;
};
struct CoupCheck {
  bool ok = false;
  int kernel_dimension = -1;
};
struct PosCheck {
  bool ok = false;
  double min_tau_a = 0.0, min_tau_b = 0.0;
  double min_rho0_c = std::numeric_limits<double>::quiet_NaN();
  double min_rho0_cb = std::numeric_limits<double>::quiet_NaN();
  double min_rho0_ac = std::numeric_limits<double>::quiet_NaN();
};

// Spec: simple averaged spectrum and distinct Bohr frequencies (both gaps
// > tol). Coup: Phi_D kernel is one dimensional. Pos: all listed minimal
// eigenvalues exceed 1e-12.
//
// The expansion itself only divides by eigenvalue differences, so it runs
// whenever the spectra are simple; first_failure(false) reports against
// that weaker requirement.
struct AssumptionReport {
  SpecCheck spec_htau, spec_htau_a, spec_htau_b;
  CoupCheck coup, coup_a, coup_b;
  PosCheck pos;

  bool all() const {
    return spec_htau.ok && spec_htau_a.ok && spec_htau_b.ok && coup.ok &&
           coup_a.ok && coup_b.ok && pos.ok;
  }

  // Name of the first failing assumption, empty when all hold. With
  // with_sharp false only what the full expansion uses is looked at.
  std::string first_failure(bool require_bohr = true, bool with_sharp = true) const {
    auto bad = [&](const SpecCheck& c) { return require_bohr ? !c.ok : !c.simple; };
    if (bad(spec_htau)) return "Spec(Hbar^tau)";
    if (with_sharp && bad(spec_htau_a)) return "Spec(Hbar^tau_A)";
    if (with_sharp && bad(spec_htau_b)) return "Spec(Hbar^tau_B)";
    if (!coup.ok) return "Coup";
    if (with_sharp && !coup_a.ok) return "Coup^A";
    if (with_sharp && !coup_b.ok) return "Coup^B";
    const double pt = 1e-12;
    if (!(pos.min_tau_a > pt && pos.min_tau_b > pt && pos.min_rho0_c > pt)) return "Pos";
    if (with_sharp && !(pos.min_rho0_cb > pt && pos.min_rho0_ac > pt)) return "Pos";
    return "";
  }
};

inline AssumptionReport check_assumptions(const TripartiteQrm& s, double tol = 1e-9) {
  validate(s);
  AssumptionReport r;
  const SectorAnalysis full = analyze_sector(s, Which::Both, tol);
  const SectorAnalysis sa = analyze_sector(s, Which::A, tol);
  const SectorAnalysis sb = analyze_sector(s, Which::B, tol);
  auto spec = [](const SectorAnalysis& a) {
    return SpecCheck{a.spec_ok, a.simple, a.min_gap, a.min_bohr_sep};
  };
  r.spec_htau = spec(full);
  r.spec_htau_a = spec(sa);
  r.spec_htau_b = spec(sb);
  r.coup = {full.kernel_dim == 1, full.kernel_dim};
  r.coup_a = {sa.kernel_dim == 1, sa.kernel_dim};
  r.coup_b = {sb.kernel_dim == 1, sb.kernel_dim};

  auto min_eig = [](const Operator& x) { return hermitian_eigenvalues(x).minCoeff(); };
  r.pos.min_tau_a = min_eig(s.tau_a);
  r.pos.min_tau_b = min_eig(s.tau_b);
  // unclipped minima so a mixed-sign kernel shows up as negative
  if (full.kernel_dim == 1) r.pos.min_rho0_c = full.min_weight;
  if (sa.kernel_dim == 1) r.pos.min_rho0_cb = sa.min_weight;
  if (sb.kernel_dim == 1) r.pos.min_rho0_ac = sb.min_weight;
  const double pt = 1e-12;
  r.pos.ok = r.pos.min_tau_a > pt && r.pos.min_tau_b > pt && r.pos.min_rho0_c > pt &&
             r.pos.min_rho0_cb > pt && r.pos.min_rho0_ac > pt;
  return r;
}

// First-order log correction: d/dg ln(r0 + g delta) at g = 0, through the
// divided differences of ln on the spectrum of r0.
inline Operator log_first_order(const Operator& r0, const Operator& delta) {
  const EigenBasis eb = hermitian_eigen(r0);
  if (eb.values.minCoeff() <= 0.0)
    throw ContractError("log_first_order: r0 is not positive definite");
  Operator q = eb.vectors.adjoint() * delta * eb.vectors;
  for (Eigen::Index m = 0; m < q.rows(); ++m)
    for (Eigen::Index n = 0; n < q.cols(); ++n) {
      const double rm = eb.values(m), rn = eb.values(n);
      const double dd = std::abs(rm - rn) < 1e-9 * rn
                            ? 1.0 / rn
                            : (std::log(rm) - std::log(rn)) / (rm - rn);
      q(m, n) *= dd;
    }
  return eb.vectors * q * eb.vectors.adjoint();
}

// rho_g = rho0 + g rho1 + O(g^2) for one sector, and Q1 with
// ln rho_g = ln rho0 + g Q1 + O(g^2).
struct SectorExpansion {
  Operator rho0_reduced;
  Operator rho0;
  Operator rho1;
  Operator q1;
};

namespace detail {

inline SectorExpansion expand_sector(const TripartiteQrm& s, const SectorAnalysis& a) {
  const Which w = a.which;
  const std::string tag = std::string("sector ") + to_string(w);
  if (!a.simple)
    throw AssumptionError(w == Which::Both ? "Spec(Hbar^tau)"
                                           : std::string("Spec(Hbar^tau_") + to_string(w) + ")",
                          "averaged spectrum degenerate, min gap " + std::to_string(a.min_gap));
  if (a.kernel_dim != 1)
    throw DegeneracyError("Phi_D kernel dimension " + std::to_string(a.kernel_dim) + " (" +
                          tag + ")");
  if (a.rho0_reduced.size() == 0)
    throw PositivityError("Phi_D kernel vector has mixed signs, min weight " +
                          std::to_string(a.min_weight) + " (" + tag + ")");

  const Operator& v = a.basis.vectors;
  const Eigen::VectorXd& e = a.basis.values;
  const Eigen::Index n = e.size();

  SectorExpansion out;
  out.rho0_reduced = a.rho0_reduced;
  out.rho0 = embed(s, w, a.rho0_reduced);

  // R1 = i L0^{-1}([H, rho0])
  const Operator inv_c = dissipator_inverse(s, w, commutator(s.h, out.rho0));
  const Operator r1_big = kI * inv_c;

  // off-diagonal part of the kernel component: solvability at order g^2
  const Operator wmat = v.adjoint() * reduce(s, w, commutator(s.h, inv_c)) * v;
  Operator r_off = Operator::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      if (j != k) r_off(j, k) = -kI * wmat(j, k) / (e(j) - e(k));

  // diagonal part: solvability at order g^3, through the pseudo-inverse of
  // Phi_D, then the kernel component is fixed by tr(rho1) = 0
  const Operator y = kI * commutator(s.h, r1_big + embed(s, w, v * r_off * v.adjoint()));
  const Operator z = v.adjoint() * reduce(s, w, commutator(s.h, dissipator_inverse(s, w, y))) * v;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) rhs(j) = (kI * z(j, j)).real();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.phi_d, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-8);
  Eigen::VectorXd diag = svd.solve(rhs);
  diag -= diag.sum() * a.weights;

  Operator r_c = r_off;
  for (Eigen::Index j = 0; j < n; ++j) r_c(j, j) = diag(j);
  out.rho1 = hermitian_part(r1_big + embed(s, w, v * r_c * v.adjoint()));
  out.q1 = hermitian_part(log_first_order(out.rho0, out.rho1));
  return out;
}

}  // namespace detail

struct PerturbativeSolution {
  Operator rho0;    // tau_A (x) rho0_c (x) tau_B
  Operator rho0_c;  // on H_C
  Operator rho1;
  Operator q1;
  // index 0: reservoir A alone (kernel tau_A (x) rho0^CB), 1: B alone
  std::array<Operator, 2> rho_sharp_0;
  std::array<Operator, 2> rho_sharp_0_reduced;
  std::array<Operator, 2> rho_sharp_1;
  std::array<Operator, 2> q1_sharp;
};

// with_sharp false skips the single-reservoir sectors (rho_sharp_*, q1_sharp
// stay empty); the full expansion does not need them.
inline PerturbativeSolution perturbative_solution(const TripartiteQrm& s,
                                                  double spec_tol = 1e-9,
                                                  bool with_sharp = true) {
  validate(s);
  const SectorExpansion full = detail::expand_sector(s, analyze_sector(s, Which::Both, spec_tol));
  PerturbativeSolution sol;
  sol.rho0 = full.rho0;
  sol.rho0_c = full.rho0_reduced;
  sol.rho1 = full.rho1;
  sol.q1 = full.q1;
  const std::array<Which, 2> ends{Which::A, Which::B};
  for (int i = 0; with_sharp && i < 2; ++i) {
    const SectorExpansion e = detail::expand_sector(s, analyze_sector(s, ends[i], spec_tol));
    sol.rho_sharp_0[i] = e.rho0;
    sol.rho_sharp_0_reduced[i] = e.rho0_reduced;
    sol.rho_sharp_1[i] = e.rho1;
    sol.q1_sharp[i] = e.q1;
  }
  return sol;
}

enum class EpClass { identically_zero, positive_all_lambda, positive_except_one_lambda };

inline const char* to_string(EpClass c) {
  switch (c) {
    case EpClass::identically_zero: return "identically_zero";
    case EpClass::positive_all_lambda: return "positive_all_lambda";
    default: return "positive_except_one_lambda";
  }
}

// sigma^(2)(lambda) = aA l^2 + bA l + cA + aB (1-l)^2 + bB (1-l) + cB, the g^2
// coefficient of the total EP when reservoir A carries lambda H and B the rest.
struct SecondOrderEp {
  double a_a = 0, b_a = 0, c_a = 0, a_b = 0, b_b = 0, c_b = 0;
  EpClass classification = EpClass::positive_all_lambda;
  double lambda0 = std::numeric_limits<double>::quiet_NaN();  // only for the one-zero case
  // 1 + eps_A sqrt(cA/aA) + eps_B sqrt(cB/aB), eps = sign(b); NaN unless aA, aB > 0
  double coincidence_residual = std::numeric_limits<double>::quiet_NaN();
  // || i[H, rho0] - D_A(rho1) - D_B(rho1) ||_max, zero by the first-order equation
  double first_order_residual = 0.0;
  std::vector<double> lambdas;
  std::vector<double> values;  // sigma^(2) on lambdas

  double sigma_a(double l) const { return a_a * l * l + b_a * l + c_a; }
  double sigma_b(double l) const { return a_b * (1 - l) * (1 - l) + b_b * (1 - l) + c_b; }
  double sigma2(double l) const { return sigma_a(l) + sigma_b(l); }
};

inline SecondOrderEp second_order_ep(const TripartiteQrm& s, const PerturbativeSolution& sol,
                                     const std::vector<double>& lambda_grid,
                                     double tol = 1e-10) {
  if (sol.q1_sharp[0].size() == 0 || sol.q1_sharp[1].size() == 0)
    throw ContractError("second_order_ep: solution lacks the single-reservoir sectors");
  auto tr = [](const Operator& a, const Operator& b) { return (a * b).trace(); };
  const Operator ic0 = kI * commutator(s.h, sol.rho0);
  const Operator ic1 = kI * commutator(s.h, sol.rho1);
  const Operator log0 = log_psd(sol.rho0);
  const std::array<Which, 2> ends{Which::A, Which::B};
  std::array<double, 3> coef[2];
  for (int i = 0; i < 2; ++i) {
    const Operator d1 = dissipator_apply(s, ends[i], sol.rho1);
    const Operator& qs = sol.q1_sharp[i];
    const Operator dlog = log_psd(sol.rho_sharp_0[i]) - log0;
    coef[i][0] = tr(-ic0, qs).real();
    coef[i][1] = (tr(d1, qs) + tr(ic0, sol.q1) - tr(ic1, dlog)).real();
    coef[i][2] = -tr(d1, sol.q1).real();
  }
  SecondOrderEp ep;
  ep.a_a = coef[0][0];
  ep.b_a = coef[0][1];
  ep.c_a = coef[0][2];
  ep.a_b = coef[1][0];
  ep.b_b = coef[1][1];
  ep.c_b = coef[1][2];
  ep.first_order_residual =
      max_abs(ic0 - dissipator_apply(s, Which::Both, sol.rho1));

  // as a polynomial in lambda
  const double p2 = ep.a_a + ep.a_b;
  const double p1 = ep.b_a - 2.0 * ep.a_b - ep.b_b;
  const double p0 = ep.c_a + ep.a_b + ep.b_b + ep.c_b;
  const bool all_zero = std::abs(ep.a_a) <= tol && std::abs(ep.b_a) <= tol &&
                        std::abs(ep.c_a) <= tol && std::abs(ep.a_b) <= tol &&
                        std::abs(ep.b_b) <= tol && std::abs(ep.c_b) <= tol;
  if (all_zero) {
    ep.classification = EpClass::identically_zero;
  } else if (p2 > tol && p0 - p1 * p1 / (4.0 * p2) <= tol) {
    ep.classification = EpClass::positive_except_one_lambda;
    ep.lambda0 = -p1 / (2.0 * p2);
  } else {
    ep.classification = EpClass::positive_all_lambda;
  }
  if (ep.a_a > tol && ep.a_b > tol) {
    const double ea = ep.b_a >= 0 ? 1.0 : -1.0, eb = ep.b_b >= 0 ? 1.0 : -1.0;
    ep.coincidence_residual = 1.0 + ea * std::sqrt(std::max(ep.c_a, 0.0) / ep.a_a) +
                              eb * std::sqrt(std::max(ep.c_b, 0.0) / ep.a_b);
  }
  ep.lambdas = lambda_grid;
  for (double l : lambda_grid) ep.values.push_back(ep.sigma2(l));
  return ep;
}

inline SecondOrderEp second_order_ep(const TripartiteQrm& s,
                                     const std::vector<double>& lambda_grid) {
  return second_order_ep(s, perturbative_solution(s), lambda_grid);
}

// sum_{j,k} <j|H|k><k|H|j> (l_j - l_k)(f(l_j) - f(l_k)) over the eigenpairs
// of K; equals tr([[H, K], f(K)] H). Only Hermitian K is supported since f
// is real.
inline double double_commutator_trace(const Operator& h, const Operator& k,
                                      const std::function<double(double)>& f) {
  if (k.rows() != k.cols() || h.rows() != k.rows())
    throw DimensionError("double_commutator_trace: dimension mismatch");
  const double scale = std::max(1.0, max_abs(k));
  if (max_abs(k * k.adjoint() - k.adjoint() * k) > 1e-10 * scale * scale)
    throw ContractError("double_commutator_trace: k is not normal");
  if (max_abs(k - k.adjoint()) > 1e-10 * scale)
    throw ContractError("double_commutator_trace: complex spectrum of k not supported");
  const EigenBasis eb = hermitian_eigen(k);
  const Operator hp = eb.vectors.adjoint() * h * eb.vectors;
  cplx sum = 0.0;
  for (Eigen::Index j = 0; j < hp.rows(); ++j)
    for (Eigen::Index l = 0; l < hp.cols(); ++l) {
      if (j == l) continue;
      const double lj = eb.values(j), ll = eb.values(l);
      sum += hp(j, l) * hp(l, j) * (lj - ll) * (f(lj) - f(ll));
    }
  return sum.real();
}

inline Superoperator generator_superoperator(const TripartiteQrm& s) {
  return vectorize_map([&](const Operator& x) { return generator_apply(s, x); }, s.dim());
}

// Kernel of L_g by brute force. Degenerate at g = 0.
inline Operator exact_steady_state(const TripartiteQrm& s) {
  validate(s);
  return nullspace_unique(generator_superoperator(s));
}

// Kernel of D_A - i coupling [H, .] (or the B analogue).
inline Operator exact_partial_steady_state(const TripartiteQrm& s, Which w, double coupling) {
  validate(s);
  return nullspace_unique(vectorize_map(
      [&](const Operator& x) { return partial_generator_apply(s, w, coupling, x); }, s.dim()));
}

inline std::vector<LinearMap> split_generators(const TripartiteQrm& s, double lambda) {
  const double ca = lambda * s.g, cb = (1.0 - lambda) * s.g;
  return {[&s, ca](const Operator& x) { return partial_generator_apply(s, Which::A, ca, x); },
          [&s, cb](const Operator& x) { return partial_generator_apply(s, Which::B, cb, x); }};
}

// EP of the exact steady state with reservoir A carrying lambda g H.
// partials: the two individual steady states, computed when not given.
inline EpReport exact_entropy_production(const TripartiteQrm& s, double lambda,
                                         const Operator& rho_g,
                                         std::optional<std::array<Operator, 2>> partials = {}) {
  if (!partials)
    partials = std::array<Operator, 2>{
        exact_partial_steady_state(s, Which::A, lambda * s.g),
        exact_partial_steady_state(s, Which::B, (1.0 - lambda) * s.g)};
  return entropy_production(split_generators(s, lambda), rho_g,
                            {(*partials)[0], (*partials)[1]});
}

}  // namespace qrmlab

#endif  // QRMLAB_TRIPARTITE_HPP
