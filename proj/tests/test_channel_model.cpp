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

#include "onebit/channel_model.hpp"
#include "test_util.hpp"

namespace onebit {
namespace {

// Midpoint-rule evaluation of (1/2D) int exp(j 2 pi s lag sin(phi + d)) dd.
cplx one_ring_entry_oracle(int lag, double azimuth_deg, double spread_deg, double spacing) {
  const double deg = std::numbers::pi / 180.0;
  const double half = 0.5 * spread_deg * deg;
  const int steps = 200000;
  cplx acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double d = -half + (i + 0.5) * (2.0 * half / steps);
    acc += std::polar(1.0, 2.0 * std::numbers::pi * spacing * lag * std::sin(azimuth_deg * deg + d));
  }
  return acc / static_cast<double>(steps);
}

TEST(OneRing, UnitDiagonalTraceMHermitianPsd) {
  for (std::size_t m : {1u, 4u, 16u, 64u}) {
    const ComplexMatrix c = one_ring_covariance(m, -45.0, 30.0);
    for (Eigen::Index i = 0; i < c.rows(); ++i) EXPECT_NEAR(std::abs(c(i, i) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(c.trace().real(), static_cast<double>(m), 1e-8 * m);
    EXPECT_LE((c - c.adjoint()).norm(), 1e-12 * c.norm());
    const auto f = hermitian_factorize(c);
    EXPECT_GE(f.eigenvalues.minCoeff(), -1e-10 * f.eigenvalues.maxCoeff());
  }
}

TEST(OneRing, MatchesDenseQuadratureOracle) {
  const ComplexMatrix c = one_ring_covariance(8, 15.0, 30.0, 0.5);
  for (int lag = 1; lag < 8; ++lag) {
    const cplx expected = one_ring_entry_oracle(lag, 15.0, 30.0, 0.5);
    EXPECT_LT(std::abs(c(lag, 0) - expected), 1e-9) << "lag " << lag;
    EXPECT_LT(std::abs(c(0, lag) - std::conj(expected)), 1e-9) << "lag " << lag;
  }
}

TEST(OneRing, WiderSpreadDecorrelatesNeighbours) {
  const double narrow = std::abs(one_ring_covariance(8, 20.0, 10.0)(0, 1));
  const double wide = std::abs(one_ring_covariance(8, 20.0, 170.0)(0, 1));
  EXPECT_LT(wide, narrow);
}

TEST(OneRing, PointScattererLimit) {
  const ComplexMatrix c = one_ring_covariance(2, 0.0, 1e-4);
  EXPECT_NEAR(std::abs(c(0, 1) - 1.0), 0.0, 1e-8);
}

TEST(OneRing, RejectsDegenerateSpread) {
  EXPECT_THROW(one_ring_covariance(4, 0.0, 0.0), ConfigError);
  EXPECT_THROW(one_ring_covariance(4, 0.0, -5.0), ConfigError);
  EXPECT_THROW(one_ring_covariance(4, 0.0, 180.0), ConfigError);
  EXPECT_THROW(one_ring_covariance(4, 0.0, 30.0, 0.0), ConfigError);
}

TEST(BuildScenario, AzimuthSeparationAndSingleUe) {
  ScenarioParams p;
  p.antennas = 8;
  p.users = 1;
  const auto one = build_scenario(p);
  EXPECT_EQ(one.users(), 1u);
  EXPECT_LT(relative_frobenius(one.covariance(0), one_ring_covariance(8, -45.0, 30.0)), 1e-15);

  p.users = 2;
  const auto two = build_scenario(p);
  EXPECT_LT(relative_frobenius(two.covariance(0), one_ring_covariance(8, -45.0, 30.0)), 1e-15);
  EXPECT_LT(relative_frobenius(two.covariance(1), one_ring_covariance(8, -15.0, 30.0)), 1e-15);
  EXPECT_GT(relative_frobenius(two.covariance(0), two.covariance(1)), 1e-3);
}

TEST(BuildScenario, IidFlagGivesIdentity) {
  ScenarioParams p;
  p.antennas = 5;
  p.users = 3;
  p.iid = true;
  const auto sc = build_scenario(p);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(sc.covariance(k), ComplexMatrix::Identity(5, 5));
}

TEST(ChannelScenario, RejectsBadTraceAndRho) {
  EXPECT_THROW(ChannelScenario(1.0, {2.0 * ComplexMatrix::Identity(3, 3)}), ConfigError);
  EXPECT_THROW(ChannelScenario(0.0, {ComplexMatrix::Identity(3, 3)}), ConfigError);
  EXPECT_THROW(ChannelScenario(1.0, {}), ConfigError);
}

TEST(SampleChannel, DeterministicAndPerUeStreams) {
  ScenarioParams p;
  p.antennas = 6;
  p.users = 2;
  const auto sc = build_scenario(p);
  const auto a = sample_channel(sc, Rng(42));
  const auto b = sample_channel(sc, Rng(42));
  EXPECT_EQ(a.H, b.H);
  // UE 0 draws the same column whether or not UE 1 exists.
  p.users = 1;
  const auto single = sample_channel(build_scenario(p), Rng(42));
  EXPECT_EQ(single.H.col(0), a.H.col(0));
}

TEST(SampleChannel, EmpiricalCovarianceMatchesIdentity) {
  ScenarioParams p;
  p.antennas = 4;
  p.users = 1;
  p.iid = true;
  const auto sc = build_scenario(p);
  ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
  const Rng master(7);
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const ComplexVector h = sample_channel(sc, master.substream(s)).H.col(0);
    acc += h * h.adjoint();
  }
  acc /= n;
  EXPECT_LT((acc - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(SampleChannel, EmpiricalCovarianceMatchesOneRing) {
  ScenarioParams p;
  p.antennas = 8;
  p.users = 2;
  const auto sc = build_scenario(p);
  ComplexMatrix acc0 = ComplexMatrix::Zero(8, 8), acc1 = ComplexMatrix::Zero(8, 8);
  const Rng master(8);
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const ComplexMatrix h = sample_channel(sc, master.substream(s)).H;
    acc0 += h.col(0) * h.col(0).adjoint();
    acc1 += h.col(1) * h.col(1).adjoint();
  }
  acc0 /= n;
  acc1 /= n;
  EXPECT_LT((acc0 - sc.covariance(0)).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((acc1 - sc.covariance(1)).cwiseAbs().maxCoeff(), 0.05);
}

}  // namespace
}  // namespace onebit
