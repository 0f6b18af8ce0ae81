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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "onebit/detector_bank.hpp"
#include "onebit/receiver_bank.hpp"
#include "test_util.hpp"

namespace onebit {
namespace {

// A table with arbitrary (random) entries; detectors only see the numbers.
ExpectationTable random_table(const Constellation& c, std::size_t users, std::uint64_t seed) {
  std::size_t count = 1;
  for (std::size_t k = 0; k < users; ++k) count *= c.size();
  return ExpectationTable(ReceiverKind::mrc, c, users,
                          test::random_matrix(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(users), seed));
}

ComplexVector random_point(std::size_t users, Rng& rng) {
  ComplexVector v(static_cast<Eigen::Index>(users));
  for (auto& e : v) e = 1.5 * rng.complex_gaussian();
  return v;
}

// Independent re-scan over index tuples.
std::size_t brute_e_sud(cplx v, const ExpectationTable& t, std::size_t k) {
  double best = 1e300;
  std::size_t best_l = 0;
  for (std::size_t a = 0; a < t.order(); ++a)
    for (std::size_t b = 0; b < t.order(); ++b) {
      const std::vector<std::size_t> idx = {a, b};
      const double d = std::abs(v - t.entries()(static_cast<Eigen::Index>(t.linear_index(idx)), static_cast<Eigen::Index>(k)));
      if (d < best) {
        best = d;
        best_l = idx[k];
      }
    }
  return best_l;
}

// Independent N-JD for K = 2: sort by (distance, index), then scan the product.
std::vector<std::size_t> brute_n_jd(const ComplexVector& v, const ExpectationTable& t, std::size_t n) {
  std::vector<std::vector<std::size_t>> lists(2);
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t l = 0; l < t.order(); ++l)
      d.emplace_back(std::abs(v(static_cast<Eigen::Index>(k)) - t.averaged()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l))), l);
    std::sort(d.begin(), d.end());
    for (std::size_t i = 0; i < n; ++i) lists[k].push_back(d[i].second);
  }
  std::pair<double, std::size_t> best{1e300, 0};
  for (auto a : lists[0])
    for (auto b : lists[1]) {
      const std::size_t idx = a * t.order() + b;
      const double d = (v - t.entries().row(static_cast<Eigen::Index>(idx)).transpose()).squaredNorm();
      best = std::min(best, std::make_pair(d, idx));
    }
  return t.indices(best.second);
}

TEST(SingleUe, ESudMatchesIndependentScan) {
  const auto t = random_table(qam16(), 2, 1);
  Rng rng(2);
  for (int trial = 0; trial < 10000; ++trial) {
    const ComplexVector v = random_point(2, rng);
    for (std::size_t k = 0; k < 2; ++k) ASSERT_EQ(e_sud(v(static_cast<Eigen::Index>(k)), t, k), brute_e_sud(v(static_cast<Eigen::Index>(k)), t, k));
  }
}

TEST(SingleUe, ExactHitsReturnTheirIndex) {
  const auto t = random_table(qam16(), 2, 3);
  for (std::size_t n = 0; n < t.size(); n += 7) {
    const auto idx = t.indices(n);
    const ComplexVector v = t.entries().row(static_cast<Eigen::Index>(n)).transpose();
    EXPECT_EQ(e_sud(v(0), t, 0), idx[0]);
    EXPECT_EQ(jd(v, t).indices, idx);
  }
  for (std::size_t l = 0; l < 16; ++l) EXPECT_EQ(h_sud(t.averaged()(1, static_cast<Eigen::Index>(l)), t, 1), l);
}

TEST(SingleUe, TiesPickSmallestIndex) {
  ComplexMatrix e = ComplexMatrix::Zero(4, 1);
  e << 1.0, -1.0, 1.0, -1.0;
  const ExpectationTable t(ReceiverKind::mrc, qpsk(), 1, e);
  EXPECT_EQ(e_sud(cplx(0.0, 0.0), t, 0), 0u);
  EXPECT_EQ(e_sud(cplx(-1.0, 0.0), t, 0), 1u);
  EXPECT_EQ(h_sud(cplx(0.0, 0.0), t, 0), 0u);
  EXPECT_EQ(jd(ComplexVector::Zero(1), t).indices[0], 0u);
  EXPECT_EQ(n_jd(ComplexVector::Zero(1), t, 4).indices[0], 0u);
  EXPECT_EQ(n_jd(ComplexVector::Constant(1, -1.0), t, 2).indices[0], 1u);
}

TEST(SingleUe, AllStrategiesCoincideForOneUser) {
  const auto t = random_table(qam16(), 1, 4);
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const ComplexVector v = random_point(1, rng);
    const std::size_t l = e_sud(v(0), t, 0);
    EXPECT_EQ(h_sud(v(0), t, 0), l);
    EXPECT_EQ(genie_detect(v(0), t, 0, {0}), l);
    EXPECT_EQ(jd(v, t).indices[0], l);
  }
}

TEST(JointDetection, EquivalencesOverSeededTrials) {
  const auto t = random_table(qam16(), 2, 6);
  Rng rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const ComplexVector v = random_point(2, rng);
    const auto joint = jd(v, t);
    ASSERT_EQ(n_jd(v, t, 16).indices, joint.indices);
    const auto one = n_jd(v, t, 1);
    ASSERT_EQ(one.indices, single_ue_decision(v, t, Strategy::h_sud).indices);
    ASSERT_EQ(n_jd(v, t, 3).indices, brute_n_jd(v, t, 3));
  }
}

TEST(JointDetection, JdWithCorrectInterferersMatchesConditionalJointSearch) {
  // Realistic table and soft symbols: M = 16, K = 2, MMSE, 0 dB.
  // When JD gets UE 1-k right, its choice for UE k must be the argmin of the
  // joint distance with UE 1-k pinned to the truth. The genie only looks at
  // |x_hat_k - E_k|, so it may differ; each disagreement must be one where the
  // two metrics rank the candidates differently.
  ScenarioParams p;
  p.antennas = 16;
  p.users = 2;
  p.rho = 1.0;
  const QuantizedMoments mom(build_scenario(p), zadoff_chu_pilots(7, 2));
  const BlmmseEstimator est(mom);
  const auto c = qam16();
  const auto t = build_expectation_table(mom, est, c, ReceiverKind::mmse);
  const auto joint_dist = [&](const ComplexVector& x_hat, const std::vector<std::size_t>& idx) {
    return (x_hat.transpose() - t.entries().row(static_cast<Eigen::Index>(t.linear_index(idx)))).squaredNorm();
  };
  std::size_t eligible = 0, agree = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Rng base = Rng::derive(8, {static_cast<std::uint64_t>(trial)});
    const auto h = sample_channel(mom.scenario(), base.substream(0)).H;
    Rng pn = base.substream(1), sn = base.substream(2), dn = base.substream(3);
    const Receiver v = conventional_receiver(est.estimate(pilot_phase(mom.scenario(), mom.book(), h, pn).r).H_hat, 1.0,
                                             ReceiverKind::mmse);
    for (int s = 0; s < 16; ++s) {
      const std::vector<std::size_t> truth = {sn.uniform_index(16), sn.uniform_index(16)};
      const ComplexVector x_hat = combine(v, data_phase(mom.scenario(), h, t.symbol_vector(t.linear_index(truth)), dn).r);
      const auto joint = jd(x_hat, t);
      const auto genie = genie_decision(x_hat, t, truth);
      for (std::size_t k = 0; k < 2; ++k) {
        if (joint.indices[1 - k] != truth[1 - k]) continue;
        ++eligible;
        std::vector<std::size_t> idx = truth;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < t.order(); ++l) {
          idx[k] = l;
          const double d = joint_dist(x_hat, idx);
          if (d < best_d) {
            best_d = d;
            best = l;
          }
        }
        ASSERT_EQ(joint.indices[k], best);
        if (genie.indices[k] == joint.indices[k]) {
          ++agree;
          continue;
        }
        std::vector<std::size_t> g = truth, j = truth;
        g[k] = genie.indices[k];
        j[k] = joint.indices[k];
        const auto ek = static_cast<Eigen::Index>(k);
        EXPECT_LE(std::norm(x_hat(ek) - t.entries()(static_cast<Eigen::Index>(t.linear_index(g)), ek)),
                  std::norm(x_hat(ek) - t.entries()(static_cast<Eigen::Index>(t.linear_index(j)), ek)));
        EXPECT_LE(joint_dist(x_hat, j), joint_dist(x_hat, g));
      }
    }
  }
  ASSERT_GT(eligible, 1000u);
  RecordProperty("genie_jd_agreement", std::to_string(static_cast<double>(agree) / static_cast<double>(eligible)));
}

TEST(JointDetection, InvariantUnderCommonPhaseRotation) {
  const auto t = random_table(qam16(), 2, 9);
  const cplx phase = std::polar(1.0, 1.1);
  const ExpectationTable rotated(ReceiverKind::mrc, qam16(), 2, phase * t.entries());
  Rng rng(10);
  for (int trial = 0; trial < 2000; ++trial) {
    const ComplexVector v = random_point(2, rng);
    EXPECT_EQ(jd(v, t).indices, jd(phase * v, rotated).indices);
  }
}

TEST(JointDetection, SearchSizesAndErrors) {
  const auto t = random_table(qam16(), 2, 11);
  const ComplexVector v = ComplexVector::Zero(2);
  EXPECT_EQ(jd(v, t).search_size, 256u);
  EXPECT_EQ(n_jd(v, t, 3).search_size, 9u);
  EXPECT_EQ(single_ue_decision(v, t, Strategy::e_sud).search_size, 256u);
  EXPECT_EQ(single_ue_decision(v, t, Strategy::h_sud).search_size, 16u);
  EXPECT_EQ(genie_decision(v, t, {0, 0}).search_size, 16u);
  EXPECT_EQ(jd(v, t).strategy, Strategy::jd);
  EXPECT_THROW(n_jd(v, t, 0), ConfigError);
  EXPECT_THROW(n_jd(v, t, 17), ConfigError);
  EXPECT_THROW(jd(ComplexVector::Zero(3), t), DimensionError);
  for (auto s : {Strategy::e_sud, Strategy::h_sud, Strategy::genie, Strategy::jd, Strategy::n_jd, Strategy::rml})
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_THROW(parse_strategy("ouija"), ConfigError);
}

TEST(Rml, ThetaValue) {
  EXPECT_NEAR(rml_theta(1.0, 2), 1.96530, 5e-6);
  EXPECT_NEAR(rml_theta(1.0, 2), 1.702 * std::sqrt(4.0 / 3.0), 1e-15);
}

TEST(Rml, SoftplusIsStable) {
  EXPECT_NEAR(softplus_neg(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus_neg(800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus_neg(-800.0), 800.0, 1e-12);
  for (double t : {-5.0, -0.3, 0.7, 12.0}) EXPECT_NEAR(softplus_neg(t), std::log1p(std::exp(-t)), 1e-14);
}

TEST(Rml, ObjectiveScaleInvariance) {
  const ComplexVector hx = test::random_matrix(6, 1, 12);
  const ComplexVector signs = unit_signs(test::random_matrix(6, 1, 13));
  for (double c : {0.5, 2.0, 7.3})
    EXPECT_NEAR(rml_objective(ComplexVector(c * signs), hx, 1.3 / c), rml_objective(signs, hx, 1.3), 1e-12);
}

TEST(Rml, MatchesScalarLoopForBpsk) {
  const ComplexMatrix h = test::random_matrix(4, 1, 14);
  const double rho = 2.0;
  const double theta = rml_theta(rho, 1);
  Rng rng(15);
  for (int trial = 0; trial < 500; ++trial) {
    ComplexVector r(4);
    for (auto& v : r) v = rng.complex_gaussian();
    double obj[2];
    for (int l = 0; l < 2; ++l) {
      const double x = l == 0 ? -1.0 : 1.0;
      obj[l] = 0.0;
      for (int m = 0; m < 4; ++m) {
        const double sr = r(m).real() >= 0 ? 1.0 : -1.0, si = r(m).imag() >= 0 ? 1.0 : -1.0;
        obj[l] += std::log(1.0 + std::exp(-theta * sr * h(m, 0).real() * x));
        obj[l] += std::log(1.0 + std::exp(-theta * si * h(m, 0).imag() * x));
      }
    }
    const std::size_t expect = obj[1] < obj[0] ? 1 : 0;
    const auto d = rml_detect(r, h, rho, bpsk());
    ASSERT_EQ(d.indices[0], expect);
    EXPECT_EQ(d.search_size, 2u);
    // Positive rescaling of r leaves the decision unchanged.
    EXPECT_EQ(rml_detect(ComplexVector(3.0 * r), h, rho, bpsk()).indices, d.indices);
  }
}

TEST(Rml, RecoversNoiselessSymbolsWithManyAntennas) {
  const ComplexMatrix h = test::random_matrix(64, 2, 16);
  const auto c = qpsk();
  const auto cand = rml_prepare(h, c);
  EXPECT_EQ(cand.hx.cols(), 16);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      ComplexVector x(2);
      x << c[a], c[b];
      const ComplexVector r = one_bit_quantize(ComplexVector(h * x), 1.0, 2);
      EXPECT_EQ(rml_detect(r, cand, 1.0).indices, (std::vector<std::size_t>{a, b}));
    }
  EXPECT_THROW(rml_detect(ComplexVector::Zero(3), cand, 1.0), DimensionError);
}

}  // namespace
}  // namespace onebit
