/*
 Copyright 2026 The onebit Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "onebit/numerics.hpp"
#include "test_util.hpp"

namespace onebit {
namespace {

using test::random_matrix;
using test::random_psd;

TEST(ArcsineMap, KnownValues) {
  EXPECT_EQ(arcsine_map(0.0), 0.0);
  EXPECT_DOUBLE_EQ(arcsine_map(1.0), 1.0);
  EXPECT_NEAR(arcsine_map(0.5), 1.0 / 3.0, 1e-15);
}

TEST(ArcsineMap, OddAndMonotone) {
  double prev = -2.0;
  for (int i = -1000; i <= 1000; ++i) {
    const double x = i / 1000.0;
    EXPECT_EQ(arcsine_map(-x), -arcsine_map(x)) << x;
    const double v = arcsine_map(x);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ArcsineMap, ClampsRoundingAndRejectsOutOfRange) {
  EXPECT_DOUBLE_EQ(arcsine_map(1.0 + 5e-13), 1.0);
  EXPECT_DOUBLE_EQ(arcsine_map(-1.0 - 5e-13), -1.0);
  EXPECT_THROW(arcsine_map(1.0 + 1e-11), DomainError);
  EXPECT_THROW(arcsine_map(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

// Composite Simpson rule for (2/sqrt(pi)) int_0^x exp(-t^2) dt.
double erf_by_simpson(double x, int intervals) {
  const double h = x / intervals;
  double acc = 1.0 + std::exp(-x * x);
  for (int i = 1; i < intervals; ++i) {
    const double t = i * h;
    acc += (i % 2 ? 4.0 : 2.0) * std::exp(-t * t);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * acc * h / 3.0;
}

TEST(ErfMap, KnownValuesAndQuadratureOracle) {
  EXPECT_EQ(erf_map(0.0), 0.0);
  EXPECT_NEAR(erf_map(6.0), 1.0, 1e-15);
  EXPECT_LE(erf_map(6.0), 1.0);
  EXPECT_NEAR(erf_map(0.5), erf_by_simpson(0.5, 4000), 1e-12);
  EXPECT_NEAR(erf_map(1.3), erf_by_simpson(1.3, 4000), 1e-12);
}

TEST(ErfMap, OddAndRejectsNonFinite) {
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.0}) EXPECT_EQ(erf_map(-x), -erf_map(x));
  EXPECT_THROW(erf_map(std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(erf_map(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(ErfMap, ComplexIsComponentwise) {
  const cplx z(0.3, -1.1);
  const cplx v = erf_map(z);
  EXPECT_EQ(v.real(), erf_map(0.3));
  EXPECT_EQ(v.imag(), erf_map(-1.1));
}

TEST(HermitianSqrt, IdentityAndDiagonal) {
  EXPECT_LT(relative_frobenius(hermitian_sqrt(ComplexMatrix::Identity(4, 4)), ComplexMatrix::Identity(4, 4)), 1e-14);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 2.0;
  expected(1, 1) = 3.0;
  EXPECT_LT(relative_frobenius(hermitian_sqrt(d), expected), 1e-14);
}

TEST(HermitianSqrt, RandomPsdReconstructsAndCommutes) {
  const ComplexMatrix c = random_psd(6, 11);
  const ComplexMatrix s = hermitian_sqrt(c);
  EXPECT_LT(relative_frobenius(s * s, c), 1e-8);
  EXPECT_LT(hermitian_defect(s), 1e-12);
  EXPECT_LE((s * c - c * s).norm(), 1e-8 * c.norm());
  EXPECT_GE(hermitian_factorize(s).eigenvalues.minCoeff(), -1e-10);
}

TEST(HermitianSqrt, ClampsTinyNegativeEigenvalues) {
  // Rank-one PSD matrix plus rounding-level indefiniteness.
  const ComplexMatrix v = random_matrix(5, 1, 3);
  ComplexMatrix c = v * v.adjoint();
  c -= 1e-13 * c.norm() * ComplexMatrix::Identity(5, 5);
  const ComplexMatrix s = hermitian_sqrt(c);
  EXPECT_LT(relative_frobenius(s * s, c), 1e-8);
}

TEST(HermitianSqrt, RejectsIndefiniteWithEigenvalueInMessage) {
  ComplexMatrix c = ComplexMatrix::Identity(3, 3);
  c(2, 2) = -0.5;
  try {
    (void)hermitian_sqrt(c);
    FAIL() << "expected an exception";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos) << e.what();
  }
}

TEST(HermitianFactorize, DescendingAndReconstructs) {
  const ComplexMatrix c = random_psd(7, 5);
  const auto f = hermitian_factorize(c);
  for (Eigen::Index i = 1; i < f.eigenvalues.size(); ++i) EXPECT_GE(f.eigenvalues(i - 1), f.eigenvalues(i));
  EXPECT_LE(relative_frobenius(f.reconstruct(), c), 1e-10);
}

TEST(PseudoInverse, IdentityAndRankDeficientDiagonal) {
  EXPECT_LT(relative_frobenius(pseudo_inverse(ComplexMatrix::Identity(3, 3)), ComplexMatrix::Identity(3, 3)), 1e-14);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_LT(relative_frobenius(pseudo_inverse(d), expected), 1e-14);
}

TEST(PseudoInverse, MatchesInverseForFullRank) {
  const ComplexMatrix a = random_matrix(6, 6, 21);
  const ComplexMatrix inv = a.fullPivLu().solve(ComplexMatrix::Identity(6, 6));
  EXPECT_LT(relative_frobenius(pseudo_inverse(a), inv), 1e-8);
}

TEST(PseudoInverse, MoorePenroseConditionsOnRankDeficient) {
  const ComplexMatrix a = random_matrix(6, 3, 8) * random_matrix(3, 5, 9);  // rank 3, 6 x 5
  const ComplexMatrix p = pseudo_inverse(a);
  EXPECT_LT(relative_frobenius(a * p * a, a), 1e-8);
  EXPECT_LT(relative_frobenius(p * a * p, p), 1e-8);
  EXPECT_LT(hermitian_defect(a * p), 1e-8);
  EXPECT_LT(hermitian_defect(p * a), 1e-8);
}

TEST(PseudoInverse, RejectsBadTolerance) {
  EXPECT_THROW(pseudo_inverse(ComplexMatrix::Identity(2, 2), 0.0), std::exception);
  EXPECT_THROW(pseudo_inverse(ComplexMatrix::Identity(2, 2), 1.0), std::exception);
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  const auto q = gauss_legendre(8);
  for (int deg = 0; deg <= 15; ++deg) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * std::pow(q.nodes[i], deg);
    const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
    EXPECT_NEAR(acc, exact, 1e-13) << "degree " << deg;
  }
  const auto q2 = gauss_legendre(2);
  EXPECT_NEAR(std::fabs(q2.nodes[0]), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(ArcsineLawOracle, DegenerateAndReferenceAngles) {
  const std::size_t n = 100000;
  const double band = 3.0 / std::sqrt(static_cast<double>(n));
  const std::vector<double> a{1.0, 2.0, -0.5, 0.3};
  EXPECT_DOUBLE_EQ(arcsine_law_oracle(a, a, 1.0, n, 1), 1.0);
  const std::vector<double> e1{1.0, 0.0, 0.0, 0.0}, e2{0.0, 1.0, 0.0, 0.0};
  EXPECT_NEAR(arcsine_law_oracle(e1, e2, 0.5, n, 2), 0.0, band);
  const std::vector<double> c60{0.5, std::sqrt(3.0) / 2.0, 0.0, 0.0};  // cosine 0.5 with e1
  EXPECT_NEAR(arcsine_law_oracle(e1, c60, 2.0, n, 3), 1.0 / 3.0, band);
}

TEST(ArcsineLawOracle, RejectsZeroVector) {
  const std::vector<double> z{0.0, 0.0}, a{1.0, 0.0};
  EXPECT_THROW(arcsine_law_oracle(z, a, 1.0, 10, 1), DomainError);
}

}  // namespace
}  // namespace onebit
