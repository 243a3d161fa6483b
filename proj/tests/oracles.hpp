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

#ifndef QRMLAB_TESTS_ORACLES_HPP
#define QRMLAB_TESTS_ORACLES_HPP

// Independent reference computations for the tests. Nothing here calls the
// library's numerical routines; only the Operator type is shared.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qrmlab/qrm.hpp"

namespace oracle {

using qrmlab::cplx;
using qrmlab::Operator;
using Mat = Eigen::MatrixXcd;

inline Mat ident(int d) { return Mat::Identity(d, d); }

// Kronecker product written out by index.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Column-stacking vectorization: vec(AXB) = (B^T (x) A) vec(X).
inline Eigen::VectorXcd vec(const Mat& x) {
  return Eigen::Map<const Eigen::VectorXcd>(x.data(), x.size());
}

inline Mat unvec(const Eigen::VectorXcd& v, int d) {
  return Eigen::Map<const Mat>(v.data(), d, d);
}

// Matrix of rho -> -i[H, rho] + Gamma (T tr(rho) - rho).
inline Mat generator_matrix(const Mat& h, double big_gamma, const Mat& t) {
  const int d = static_cast<int>(h.rows());
  const cplx i(0.0, 1.0);
  Mat l = -i * (kron(ident(d), h) - kron(h.transpose(), ident(d)));
  l += big_gamma * (vec(t) * vec(ident(d)).transpose());
  l -= big_gamma * ident(d * d);
  return l;
}

// Steady state by replacing one equation with the trace condition and
// solving with full-pivot LU.
inline Mat steady_by_solve(const Mat& l, int d) {
  Mat a = l;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(d * d);
  a.row(0) = vec(ident(d)).transpose();
  b(0) = 1.0;
  return unvec(Eigen::FullPivLU<Mat>(a).solve(b), d);
}

inline Eigen::VectorXd eigvals_h(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x + x.adjoint()));
  return es.eigenvalues();
}

// Hermitian function through Eigen's self-adjoint solver.
template <class F>
inline Mat hfun(const Mat& x, F f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x + x.adjoint()));
  Eigen::VectorXcd fv(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
}

inline Mat logm(const Mat& x) {
  return hfun(x, [](double v) { return std::log(v); });
}

inline double entropy(const Mat& rho) {
  double s = 0.0;
  for (double v : eigvals_h(rho))
    if (v > 1e-15) s -= v * std::log(v);
  return s;
}

inline double rel_entropy(const Mat& mu, const Mat& nu) {
  return (mu * (logm(mu) - logm(nu))).trace().real();
}

inline double kl(double p, double q) {
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

// Trace norm through the eigenvalues of the Hermitian difference.
inline double trace_distance(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (double v : eigvals_h(a - b)) s += std::abs(v);
  return 0.5 * s;
}

// Partial trace over the middle-and-last / first-and-middle factors of a
// tripartite operator, by explicit index sums.
inline Mat trace_keep(const Mat& x, int na, int nc, int nb, int keep) {
  const int dims[3] = {na, nc, nb};
  const int dk = dims[keep];
  Mat out = Mat::Zero(dk, dk);
  auto idx = [&](int a, int c, int b) { return (a * nc + c) * nb + b; };
  for (int a = 0; a < na; ++a)
    for (int c = 0; c < nc; ++c)
      for (int b = 0; b < nb; ++b)
        for (int a2 = 0; a2 < na; ++a2)
          for (int c2 = 0; c2 < nc; ++c2)
            for (int b2 = 0; b2 < nb; ++b2) {
              const int r[3] = {a, c, b}, s[3] = {a2, c2, b2};
              bool diag = true;
              for (int f = 0; f < 3; ++f)
                if (f != keep && r[f] != s[f]) diag = false;
              if (diag) out(r[keep], s[keep]) += x(idx(a, c, b), idx(a2, c2, b2));
            }
  return out;
}

inline Mat random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n(rng), n(rng));
  return 0.5 * (g + g.adjoint());
}

inline Mat random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n(rng), n(rng));
  Mat r = g * g.adjoint() + 0.1 * ident(d);
  return r / r.trace();
}

inline double max_abs(const Mat& x) { return x.cwiseAbs().maxCoeff(); }

}  // namespace oracle

#endif  // QRMLAB_TESTS_ORACLES_HPP
