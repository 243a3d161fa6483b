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

#ifndef QRMLAB_MATOPS_HPP
#define QRMLAB_MATOPS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrmlab/errors.hpp"

namespace qrmlab {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

// Tensor factor dimensions, most significant factor first. For the
// tripartite space that is (n_A, n_C, n_B), so |a c b> has index
// a*n_C*n_B + c*n_B + b.
struct FactorDims {
  std::vector<int> dims;

  int total() const {
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
  }
};

inline Operator identity(int d) { return Operator::Identity(d, d); }

inline Operator commutator(const Operator& a, const Operator& b) {
  return a * b - b * a;
}

inline Operator hermitian_part(const Operator& x) {
  return 0.5 * (x + x.adjoint());
}

// Largest modulus entry; cheap scale for relative tolerances.
inline double max_abs(const Operator& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

inline double op_norm(const Operator& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Operator> svd(x);
  return svd.singularValues()(0);
}

inline Operator kron(const Operator& a, const Operator& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols();
  const Eigen::Index rb = b.rows(), cb = b.cols();
  Operator out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ca; ++j)
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

inline Operator kron(const Operator& a, const Operator& b, const Operator& c) {
  return kron(kron(a, b), c);
}

inline bool is_hermitian(const Operator& x, double tol) {
  if (x.rows() != x.cols()) return false;
  return max_abs(x - x.adjoint()) <= tol;
}

inline bool is_trace_one(const Operator& x, double tol) {
  return std::abs(x.trace() - 1.0) <= tol;
}

inline Eigen::VectorXd hermitian_eigenvalues(const Operator& x) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(x),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline bool is_positive_semidefinite(const Operator& x, double tol) {
  if (!is_hermitian(x, tol)) return false;
  return hermitian_eigenvalues(x).minCoeff() >= -tol;
}

inline bool is_density_matrix(const Operator& x, double tol) {
  return is_positive_semidefinite(x, tol) && is_trace_one(x, tol);
}

// Orthonormal eigenbasis with a reproducible gauge: in every column the
// largest-modulus component is made real positive (first one on ties).
struct EigenBasis {
  Eigen::VectorXd values;  // ascending
  Operator vectors;        // columns
};

inline void fix_phases(Operator& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      // small slack so ties resolve to the first index deterministically
      if (std::abs(v(r, c)) > mag * (1.0 + 1e-12)) {
        mag = std::abs(v(r, c));
        best = r;
      }
    }
    if (mag > 0.0) v.col(c) *= std::conj(v(best, c)) / mag;
  }
}

inline void require_hermitian(const Operator& x, const char* what) {
  if (x.rows() != x.cols())
    throw DimensionError(std::string(what) + ": matrix is not square");
  const double scale = std::max(1.0, max_abs(x));
  if (max_abs(x - x.adjoint()) > 1e-9 * scale)
    throw ContractError(std::string(what) + ": operator is not Hermitian");
}

inline EigenBasis hermitian_eigen(const Operator& x) {
  require_hermitian(x, "hermitian_eigen");
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(x));
  EigenBasis eb{es.eigenvalues(), es.eigenvectors()};
  fix_phases(eb.vectors);
  return eb;
}

struct SpectralDecomposition {
  std::vector<double> eigenvalues;   // ascending, one per cluster
  std::vector<Operator> projectors;  // orthogonal, sum to identity

  Operator reconstruct() const {
    const Eigen::Index d = projectors.empty() ? 0 : projectors[0].rows();
    Operator out = Operator::Zero(d, d);
    for (std::size_t j = 0; j < projectors.size(); ++j)
      out += eigenvalues[j] * projectors[j];
    return out;
  }
};

inline double default_cluster_tol(const Eigen::VectorXd& ev) {
  const double radius = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * std::max(radius, 1e-300);
}

// Group indices of ascending eigenvalues into clusters of near-equal values.
inline std::vector<std::vector<int>> cluster_indices(const Eigen::VectorXd& ev,
                                                     double tol) {
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < ev.size(); ++i) {
    if (groups.empty() || ev(i) - ev(groups.back().back()) > tol)
      groups.push_back({i});
    else
      groups.back().push_back(i);
  }
  return groups;
}

// cluster_tol < 0 selects the default 1e-9 * spectral radius.
inline SpectralDecomposition hermitian_spectral(const Operator& x,
                                                double cluster_tol = -1.0) {
  const EigenBasis eb = hermitian_eigen(x);
  const double tol =
      cluster_tol < 0.0 ? default_cluster_tol(eb.values) : cluster_tol;
  SpectralDecomposition sd;
  for (const auto& grp : cluster_indices(eb.values, tol)) {
    double mean = 0.0;
    Operator p = Operator::Zero(x.rows(), x.cols());
    for (int i : grp) {
      mean += eb.values(i);
      p += eb.vectors.col(i) * eb.vectors.col(i).adjoint();
    }
    sd.eigenvalues.push_back(mean / static_cast<double>(grp.size()));
    sd.projectors.push_back(p);
  }
  return sd;
}

// f applied to a PSD operator through its spectrum. Eigenvalues are floored
// before f is applied, so ln stays finite on near-singular input.
inline Operator matrix_function_psd(const Operator& x,
                                    const std::function<double(double)>& f,
                                    double floor = 1e-300, double tol = 1e-10) {
  const EigenBasis eb = hermitian_eigen(x);
  const double scale = std::max(1.0, eb.values.cwiseAbs().maxCoeff());
  if (eb.values.minCoeff() < -tol * scale)
    throw ContractError("matrix_function_psd: negative eigenvalue " +
                        std::to_string(eb.values.minCoeff()));
  Eigen::VectorXd fv(eb.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i)
    fv(i) = f(std::max(eb.values(i), floor));
  return eb.vectors * fv.asDiagonal() * eb.vectors.adjoint();
}

inline Operator log_psd(const Operator& x, double floor = 1e-300) {
  return matrix_function_psd(x, [](double v) { return std::log(v); }, floor);
}

inline Operator sqrt_psd(const Operator& x) {
  return matrix_function_psd(x, [](double v) { return std::sqrt(v); }, 0.0);
}

// Clip eigenvalues below -clip to zero and renormalise the trace. Leaves the
// input untouched (up to Hermitisation) if nothing needs clipping.
inline Operator project_psd(const Operator& x, double clip = 1e-12) {
  Operator h = hermitian_part(x);
  const EigenBasis eb = hermitian_eigen(h);
  if (eb.values.minCoeff() >= -clip) return h;
  Eigen::VectorXd v = eb.values.cwiseMax(0.0);
  const double tr = v.sum();
  if (tr <= 0.0) throw ContractError("project_psd: no positive spectrum left");
  v /= tr;
  return eb.vectors * v.asDiagonal() * eb.vectors.adjoint();
}

inline Operator partial_trace(const Operator& x, const FactorDims& fd,
                              std::vector<int> keep) {
  const int n = static_cast<int>(fd.dims.size());
  if (fd.total() != x.rows() || x.rows() != x.cols())
    throw DimensionError("partial_trace: factor dims do not match operator");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int k : keep)
    if (k < 0 || k >= n) throw DimensionError("partial_trace: bad factor index");

  std::vector<int> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * fd.dims[i + 1];

  std::vector<int> kept_f, traced_f;
  for (int i = 0; i < n; ++i) {
    if (std::binary_search(keep.begin(), keep.end(), i))
      kept_f.push_back(i);
    else
      traced_f.push_back(i);
  }
  // offsets into the full index for every multi-index of a factor subset
  auto offsets = [&](const std::vector<int>& fs) {
    std::vector<int> off{0};
    for (int f : fs) {
      std::vector<int> next;
      next.reserve(off.size() * fd.dims[f]);
      for (int o : off)
        for (int v = 0; v < fd.dims[f]; ++v) next.push_back(o + v * stride[f]);
      off.swap(next);
    }
    return off;
  };
  const std::vector<int> ok = offsets(kept_f), ot = offsets(traced_f);
  const int dk = static_cast<int>(ok.size());
  Operator out = Operator::Zero(dk, dk);
  for (int r = 0; r < dk; ++r)
    for (int c = 0; c < dk; ++c) {
      cplx s = 0.0;
      for (int t : ot) s += x(ok[r] + t, ok[c] + t);
      out(r, c) = s;
    }
  return out;
}

// Column stacking: vec(X)[m + n*d] = X(m, n).
inline Eigen::VectorXcd vec(const Operator& x) {
  return Eigen::Map<const Eigen::VectorXcd>(x.data(), x.size());
}

inline Operator unvec(const Eigen::VectorXcd& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d)
    throw DimensionError("unvec: length is not d^2");
  return Eigen::Map<const Operator>(v.data(), d, d);
}

struct Superoperator {
  int dim = 0;
  Eigen::MatrixXcd matrix;

  Operator apply(const Operator& x) const {
    return unvec(matrix * vec(x), dim);
  }
};

using LinearMap = std::function<Operator(const Operator&)>;

inline Superoperator vectorize_map(const LinearMap& action, int dim) {
  const int n = dim * dim;
  Superoperator s{dim, Eigen::MatrixXcd(n, n)};
  for (int k = 0; k < n; ++k) {
    Operator e = Operator::Zero(dim, dim);
    e(k % dim, k / dim) = 1.0;
    const Operator y = action(e);
    if (y.rows() != dim || y.cols() != dim)
      throw DimensionError("vectorize_map: action changes the dimension");
    s.matrix.col(k) = vec(y);
  }
  // cheap linearity probe on a fixed pseudo-random combination
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Operator x(dim, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(nd(rng), nd(rng));
  const Operator direct = action(x);
  const Operator via = s.apply(x);
  if (max_abs(direct - via) > 1e-9 * std::max(1.0, max_abs(direct)))
    throw ContractError("vectorize_map: action is not linear");
  return s;
}

struct KernelInfo {
  int dimension = 0;
  Eigen::VectorXd singular_values;  // descending
  double threshold = 0.0;
};

// gap_tol < 0 selects 1e-8 * largest singular value.
inline KernelInfo kernel_dimension(const Eigen::MatrixXcd& m,
                                   double gap_tol = -1.0) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  KernelInfo k;
  k.singular_values = svd.singularValues();
  const double smax = k.singular_values.size() ? k.singular_values(0) : 0.0;
  k.threshold = gap_tol < 0.0 ? 1e-8 * smax : gap_tol;
  for (Eigen::Index i = 0; i < k.singular_values.size(); ++i)
    if (k.singular_values(i) <= k.threshold) ++k.dimension;
  // a wide matrix has a kernel even without small singular values
  k.dimension += static_cast<int>(
      std::max<Eigen::Index>(0, m.cols() - k.singular_values.size()));
  return k;
}

namespace detail {

// One extra digit set for ill-conditioned kernels: solve the bordered system
//   [M  v0] [x]   [0]
//   [v0' 0] [mu] = [1]
// in long double. It is nonsingular when the kernel is simple and v0 is not
// orthogonal to it. Plain double SVD loses ~cond(M)*eps in the slow
// directions, which is visible at weak coupling.
inline Eigen::VectorXcd polish_kernel_vector(const Eigen::MatrixXcd& m,
                                             const Eigen::VectorXcd& v0) {
  using cld = std::complex<long double>;
  using MatLd = Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic>;
  using VecLd = Eigen::Matrix<cld, Eigen::Dynamic, 1>;
  const Eigen::Index n = m.rows();
  MatLd a = MatLd::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = cld(m(i, j).real(), m(i, j).imag());
    a(i, n) = cld(v0(i).real(), v0(i).imag());
    a(n, i) = cld(v0(i).real(), -v0(i).imag());
  }
  VecLd rhs = VecLd::Zero(n + 1);
  rhs(n) = 1.0L;
  const VecLd sol = Eigen::PartialPivLU<MatLd>(a).solve(rhs);
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out(i) = cplx(static_cast<double>(sol(i).real()),
                  static_cast<double>(sol(i).imag()));
  if (!out.allFinite()) return v0;
  return out;
}

}  // namespace detail

// Hermitian, trace-one, PSD-projected spanning element of a one-dimensional
// kernel. Throws DegeneracyError when the kernel is not one dimensional under
// gap_tol (default 1e-8 * largest singular value).
inline Operator nullspace_unique(const Superoperator& s, double gap_tol = -1.0) {
  const Eigen::MatrixXcd& m = s.matrix;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const Eigen::Index n = sv.size();
  const double tol = gap_tol < 0.0 ? 1e-8 * sv(0) : gap_tol;
  int dim = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (sv(i) <= tol) ++dim;
  if (dim != 1)
    throw DegeneracyError("nullspace_unique: kernel dimension " +
                          std::to_string(dim) + " (threshold " +
                          std::to_string(tol) + ")");
  const Eigen::VectorXcd v0 = svd.matrixV().col(n - 1);
  const Eigen::VectorXcd v = detail::polish_kernel_vector(m, v0);
  Operator x = unvec(v, s.dim);
  const cplx tr = x.trace();
  if (std::abs(tr) < 1e-12 * v.norm())
    throw DegeneracyError("nullspace_unique: kernel element is traceless");
  x /= tr;
  return project_psd(x);
}

inline double trace_distance(const Operator& a, const Operator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("trace_distance: dimension mismatch");
  Eigen::JacobiSVD<Operator> svd(a - b);
  return 0.5 * svd.singularValues().sum();
}

}  // namespace qrmlab

#endif  // QRMLAB_MATOPS_HPP
