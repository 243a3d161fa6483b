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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qrmlab/matops.hpp"
#include "qrmlab/models.hpp"
#include "qrmlab/qrm.hpp"
#include "qrmlab/random.hpp"

namespace qrmlab {
namespace {

Operator diag(std::initializer_list<double> v) {
  Operator d = Operator::Zero(v.size(), v.size());
  int i = 0;
  for (double x : v) d(i, i) = x, ++i;
  return d;
}

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_LT(max_abs(kron(identity(2), identity(2)) - identity(4)), 1e-15);
}

TEST(Kron, DiagonalStructure) {
  const Operator k = kron(diag({0.3, 0.7}), identity(2));
  EXPECT_NEAR(k(0, 0).real(), 0.3, 1e-15);
  EXPECT_NEAR(k(1, 1).real(), 0.3, 1e-15);
  EXPECT_NEAR(k(2, 2).real(), 0.7, 1e-15);
  EXPECT_NEAR(k(3, 3).real(), 0.7, 1e-15);
}

TEST(Kron, MatchesIndexOracle) {
  Rng rng(3);
  const Operator a = random_ginibre(2, rng), b = random_ginibre(3, rng);
  const Operator c = random_ginibre(2, rng);
  EXPECT_LT(max_abs(kron(a, b, c) - oracle::kron(oracle::kron(a, b), c)), 1e-14);
}

// tau_A (x) rho_C (x) tau_B for the chain is diagonal with product weights,
// the |a c b> ordering putting A first.
TEST(Kron, ThreeQubitProductState) {
  ThreeQubitParams p;
  const Operator rc = three_qubit_rho_c0_closed_form(p);
  const Operator r0 = kron(qubit_reset_state(p.t_a), rc, qubit_reset_state(p.t_b));
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b) {
        const double ta = a ? 1 - p.t_a : p.t_a, tb = b ? 1 - p.t_b : p.t_b;
        EXPECT_NEAR(r0(4 * a + 2 * c + b, 4 * a + 2 * c + b).real(), ta * rc(c, c).real() * tb,
                    1e-15);
      }
  EXPECT_LT(max_abs(r0 - r0.diagonal().asDiagonal().toDenseMatrix()), 1e-15);
}

TEST(PartialTrace, ProductState) {
  Rng rng(5);
  const Operator a = random_density_matrix(2, rng), b = random_density_matrix(3, rng);
  const Operator x = kron(a, 2.5 * b);
  EXPECT_LT(max_abs(partial_trace(x, {{2, 3}}, {0}) - 2.5 * a), 1e-14);
  EXPECT_LT(max_abs(partial_trace(x, {{2, 3}}, {1}) - 2.5 * b), 1e-14);
}

TEST(PartialTrace, TracingOutFirstFactor) {
  Rng rng(6);
  const Operator ta = random_density_matrix(2, rng), rc = random_density_matrix(2, rng),
                 tb = random_density_matrix(3, rng);
  const Operator x = kron(ta, rc, tb);
  EXPECT_LT(max_abs(partial_trace(x, {{2, 2, 3}}, {1, 2}) - kron(rc, tb)), 1e-14);
}

TEST(PartialTrace, AllFactorsGiveTheTrace) {
  Rng rng(7);
  const Operator x = random_ginibre(12, rng);
  const Operator t = partial_trace(x, {{2, 3, 2}}, {});
  ASSERT_EQ(t.rows(), 1);
  EXPECT_LT(std::abs(t(0, 0) - x.trace()), 1e-13);
}

TEST(PartialTrace, MatchesLoopOracle) {
  Rng rng(8);
  const Operator x = random_ginibre(2 * 3 * 2, rng);
  for (int keep = 0; keep < 3; ++keep)
    EXPECT_LT(max_abs(partial_trace(x, {{2, 3, 2}}, {keep}) - oracle::trace_keep(x, 2, 3, 2, keep)),
              1e-13);
}

TEST(PartialTrace, ComposesInEitherOrder) {
  Rng rng(9);
  for (int r = 0; r < 10; ++r) {
    const Operator x = random_ginibre(2 * 3 * 2, rng);
    const Operator direct = partial_trace(x, {{2, 3, 2}}, {1});
    const Operator a_first = partial_trace(partial_trace(x, {{2, 3, 2}}, {1, 2}), {{3, 2}}, {0});
    const Operator b_first = partial_trace(partial_trace(x, {{2, 3, 2}}, {0, 1}), {{2, 3}}, {1});
    EXPECT_LT(max_abs(direct - a_first), 1e-13);
    EXPECT_LT(max_abs(direct - b_first), 1e-13);
    EXPECT_LT(std::abs(direct.trace() - x.trace()), 1e-13);
  }
}

TEST(PartialTrace, RejectsInconsistentDims) {
  EXPECT_THROW(partial_trace(identity(6), {{2, 2}}, {0}), DimensionError);
  EXPECT_THROW(partial_trace(identity(4), {{2, 2}}, {2}), DimensionError);
}

TEST(HermitianSpectral, ClustersNearEqualEigenvalues) {
  const SpectralDecomposition sd = hermitian_spectral(diag({0.0, 1e-6, 1.0}), 1e-4);
  ASSERT_EQ(sd.eigenvalues.size(), 2u);
  EXPECT_NEAR(sd.projectors[0].trace().real(), 2.0, 1e-14);
  EXPECT_NEAR(sd.projectors[1].trace().real(), 1.0, 1e-14);
}

TEST(HermitianSpectral, IdentityIsOneProjector) {
  const SpectralDecomposition sd = hermitian_spectral(identity(3));
  ASSERT_EQ(sd.eigenvalues.size(), 1u);
  EXPECT_LT(max_abs(sd.projectors[0] - identity(3)), 1e-14);
}

TEST(HermitianSpectral, DiagonalQubitHamiltonian) {
  SingleQubitParams p;
  p.delta = 0.0;
  p.reservoirs = {{0.9, 1.0}};
  const SpectralDecomposition sd = hermitian_spectral(build_single_qubit(p).h);
  ASSERT_EQ(sd.projectors.size(), 2u);
  EXPECT_LT(max_abs(sd.projectors[0] - diag({1, 0})), 1e-14);
  EXPECT_LT(max_abs(sd.projectors[1] - diag({0, 1})), 1e-14);
}

TEST(HermitianSpectral, ReconstructsRandomHermitian) {
  Rng rng(10);
  for (int r = 0; r < 20; ++r) {
    const Operator h = random_hermitian(2 + r % 5, rng);
    const SpectralDecomposition sd = hermitian_spectral(h);
    EXPECT_LT(max_abs(sd.reconstruct() - h), 1e-10);
    Operator sum = Operator::Zero(h.rows(), h.cols());
    for (const auto& p : sd.projectors) {
      EXPECT_LT(max_abs(p * p - p), 1e-12);
      sum += p;
    }
    EXPECT_LT(max_abs(sum - identity(static_cast<int>(h.rows()))), 1e-12);
  }
}

TEST(HermitianSpectral, RejectsNonHermitian) {
  Operator x = identity(2);
  x(0, 1) = 1.0;
  EXPECT_THROW(hermitian_spectral(x), ContractError);
}

TEST(MatrixFunction, LogOfIdentityIsZero) {
  EXPECT_LT(max_abs(log_psd(identity(3))), 1e-15);
}

TEST(MatrixFunction, LogOfDiagonal) {
  const Operator l = log_psd(diag({0.9, 0.1}));
  EXPECT_NEAR(l(0, 0).real(), std::log(0.9), 1e-15);
  EXPECT_NEAR(l(1, 1).real(), std::log(0.1), 1e-15);
}

TEST(MatrixFunction, SquareRootSquares) {
  Rng rng(11);
  for (int r = 0; r < 10; ++r) {
    const Operator tau = random_density_matrix(4, rng);
    const Operator s = sqrt_psd(tau);
    EXPECT_LT(max_abs(s * s - tau), 1e-12);
  }
}

TEST(MatrixFunction, LogMatchesOracle) {
  Rng rng(12);
  const Operator rho = random_density_matrix(4, rng);
  EXPECT_LT(max_abs(log_psd(rho) - oracle::logm(rho)), 1e-11);
}

TEST(MatrixFunction, RejectsNegativeEigenvalue) {
  EXPECT_THROW(log_psd(diag({1.0, -0.1})), ContractError);
}

TEST(VectorizeMap, IdentityMap) {
  const Superoperator s = vectorize_map([](const Operator& x) { return x; }, 3);
  EXPECT_LT(max_abs(s.matrix - Eigen::MatrixXcd::Identity(9, 9)), 1e-15);
}

TEST(VectorizeMap, DiagonalCommutator) {
  const double e1 = 0.3, e2 = 1.7;
  const Operator h = diag({e1, e2});
  const Superoperator s = vectorize_map([&](const Operator& x) { return commutator(h, x); }, 2);
  // column stacking: entry (m, n) sits at m + 2n
  Eigen::VectorXcd want(4);
  want << 0.0, e2 - e1, e1 - e2, 0.0;
  EXPECT_LT(max_abs(s.matrix - Eigen::MatrixXcd(want.asDiagonal())), 1e-15);
}

TEST(VectorizeMap, MatchesActionOnRandomInputs) {
  Rng rng(13);
  const Operator a = random_ginibre(3, rng), b = random_ginibre(3, rng);
  const LinearMap f = [&](const Operator& x) { return Operator(a * x * b + x.trace() * a); };
  const Superoperator s = vectorize_map(f, 3);
  for (int r = 0; r < 20; ++r) {
    const Operator x = random_ginibre(3, rng);
    EXPECT_LT(max_abs(s.apply(x) - f(x)), 1e-12);
  }
}

TEST(VectorizeMap, GeneratorMatchesExplicitMatrix) {
  Rng rng(14);
  QrmSystem sys{random_hermitian(3, rng), {{random_density_matrix(3, rng), 0.8}}};
  const Superoperator s = generator_superoperator(sys);
  EXPECT_LT(max_abs(s.matrix - oracle::generator_matrix(sys.h, 0.8, sys.channels[0].tau)), 1e-13);
}

TEST(VectorizeMap, DetectsNonlinearAction) {
  EXPECT_THROW(vectorize_map([](const Operator& x) { return Operator(x * x); }, 2), ContractError);
}

TEST(NullspaceUnique, CommutingResetStateIsSteady) {
  const Operator t = diag({0.6, 0.3, 0.1});
  QrmSystem sys{diag({0.0, 1.0, 2.5}), {{t, 1.3}}};
  EXPECT_LT(max_abs(nullspace_unique(generator_superoperator(sys)) - t), 1e-12);
}

TEST(NullspaceUnique, QubitMatchesClosedForm) {
  SingleQubitParams p;
  p.delta = 0.7;
  p.reservoirs = {{0.9, 1.0}};
  const Operator rho = nullspace_unique(generator_superoperator(build_single_qubit(p)));
  EXPECT_LT(max_abs(rho - qubit_steady_state_closed_form(p)), 1e-12);
}

TEST(NullspaceUnique, RandomQutritMatchesResolventAndSolve) {
  Rng rng(15);
  for (int r = 0; r < 5; ++r) {
    QrmSystem sys{random_hermitian(3, rng),
                  {{random_density_matrix(3, rng), 0.7}, {random_density_matrix(3, rng), 1.4}}};
    const Operator ns = nullspace_unique(generator_superoperator(sys));
    EXPECT_LT(max_abs(ns - steady_state(sys)), 1e-10);
    const Recombined rc = recombine(sys);
    const Operator solved =
        oracle::steady_by_solve(oracle::generator_matrix(sys.h, rc.gamma_total, rc.t), 3);
    EXPECT_LT(max_abs(ns - solved), 1e-10);
  }
}

TEST(NullspaceUnique, TwoDimensionalKernelIsDegenerate) {
  // H = 0 with no dissipation on a 2x2 block: identity map minus itself
  const Superoperator s = vectorize_map([](const Operator& x) { return Operator(x - x.diagonal().asDiagonal().toDenseMatrix()); }, 2);
  EXPECT_THROW(nullspace_unique(s), DegeneracyError);
}

TEST(TraceDistance, Basics) {
  Rng rng(16);
  const Operator rho = random_density_matrix(3, rng);
  EXPECT_LT(trace_distance(rho, rho), 1e-15);
  EXPECT_NEAR(trace_distance(diag({1, 0}), diag({0, 1})), 1.0, 1e-15);
}

TEST(TraceDistance, MatchesOracleAndIsSymmetric) {
  Rng rng(17);
  for (int r = 0; r < 10; ++r) {
    const Operator a = random_density_matrix(4, rng), b = random_density_matrix(4, rng);
    EXPECT_NEAR(trace_distance(a, b), oracle::trace_distance(a, b), 1e-13);
    EXPECT_NEAR(trace_distance(a, b), trace_distance(b, a), 1e-15);
    EXPECT_GE(trace_distance(a, b), 0.0);
  }
}

TEST(TraceDistance, TriangleInequality) {
  Rng rng(18);
  for (int r = 0; r < 20; ++r) {
    const Operator a = random_density_matrix(3, rng), b = random_density_matrix(3, rng),
                   c = random_density_matrix(3, rng);
    EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-14);
  }
}

}  // namespace
}  // namespace qrmlab
