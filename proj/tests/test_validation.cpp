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

#include "onebit/validation.hpp"

namespace onebit {
namespace {

double plain_asin(double v) { return std::asin(v); }

const nlohmann::json& check_named(const nlohmann::json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return c;
  throw std::runtime_error("missing check " + name);
}

TEST(Accumulator, MeanAndStandardError) {
  ComplexMomentAccumulator acc(1, 1);
  for (double v : {1.0, 2.0, 3.0, 4.0}) acc.add(ComplexMatrix::Constant(1, 1, cplx(v, -v)));
  EXPECT_EQ(acc.count(), 4u);
  EXPECT_EQ(acc.mean()(0, 0), cplx(2.5, -2.5));
  // Sample variance 5/3, so the standard error is sqrt(5/12).
  EXPECT_NEAR(acc.se_re()(0, 0), std::sqrt(5.0 / 12.0), 1e-12);
  EXPECT_NEAR(acc.se_im()(0, 0), std::sqrt(5.0 / 12.0), 1e-12);
}

TEST(CompareElementwise, CountsElementsWithinTolerance) {
  ComplexMomentAccumulator acc(1, 2);
  for (double v : {-1.0, 1.0}) {
    ComplexMatrix s(1, 2);
    s << cplx(v, 0.0), cplx(5.0, 0.0);
    acc.add(s);
  }
  ComplexMatrix closed(1, 2);
  closed << cplx(0.5, 0.0), cplx(5.0, 0.0);
  auto r = compare_elementwise("t", closed, acc, 4.0, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.compared, 2u);
  closed(0, 1) = cplx(5.0 + 1e-9, 0.0);  // zero standard error demands an exact match
  r = compare_elementwise("t", closed, acc, 4.0, 1.0);
  EXPECT_FALSE(r.passed);
  EXPECT_DOUBLE_EQ(r.fraction_within, 0.5);
  EXPECT_TRUE(std::isinf(r.worst_z));
  EXPECT_TRUE(compare_elementwise("t", closed, acc, 4.0, 0.5).passed);
  const auto j = r.to_json();
  EXPECT_EQ(j["name"], "t");
  EXPECT_EQ(j["compared"], 2);
}

TEST(Profiles, KnownNames) {
  EXPECT_EQ(validation_profile("desk").arcsine_pairs, 30u);
  EXPECT_EQ(validation_profile("full").arcsine_required, 97u);
  EXPECT_THROW(validation_profile("quick"), ConfigError);
  EXPECT_EQ(sample_symbol_vectors(5, 3, 1).size(), 5u);
  EXPECT_EQ(sample_symbol_vectors(5, 3, 1).front().size(), 3);
}

TEST(Validate, DeskProfilePasses) {
  const auto report = validate("desk");
  EXPECT_EQ(report["profile"], "desk");
  EXPECT_TRUE(report["passed"].get<bool>()) << report.dump(2);
  EXPECT_GE(report["checks"].size(), 7u);
}

TEST(Validate, WrongArcsineMapFailsTheMomentChecks) {
  const auto report = validate("desk", &plain_asin);
  EXPECT_FALSE(report["passed"].get<bool>());
  EXPECT_FALSE(check_named(report, "arcsine_law")["passed"].get<bool>());
  EXPECT_FALSE(check_named(report, "pilot_autocovariance")["passed"].get<bool>()) << report.dump(2);
}

}  // namespace
}  // namespace onebit
