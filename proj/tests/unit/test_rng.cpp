#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "mvk/rng.hpp"

using mvk::Philox4x32;
using mvk::RngPlan;

// Known-answer vectors of the Random123 distribution (philox4x32_10).
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameAddressSameDraws) {
  const RngPlan plan(42);
  auto a = plan.stream(7, 3);
  auto b = plan.stream(7, 3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.normal(), b.normal());
  }
}

TEST(RngStream, DistinctAddressesDiffer) {
  const RngPlan plan(42);
  std::set<double> first;
  for (std::uint64_t m = 0; m < 50; ++m) {
    for (std::uint32_t k = 0; k < 4; ++k) first.insert(plan.stream(m, k).uniform());
  }
  first.insert(plan.initial_stream(0).uniform());
  first.insert(RngPlan(43).stream(0, 0).uniform());
  first.insert(plan.derive(1).stream(0, 0).uniform());
  EXPECT_EQ(first.size(), 50u * 4u + 3u);
}

TEST(RngStream, UniformRangeAndMoments) {
  auto s = RngPlan(9).stream(0, 0);
  const int n = 200000;
  double su = 0.0, sz = 0.0, szz = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
  }
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sz += z;
    szz += z * z;
  }
  // 5 standard errors.
  EXPECT_NEAR(su / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sz / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(szz / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(RngPlan, DeriveIsDeterministic) {
  const RngPlan plan(5);
  EXPECT_EQ(plan.derive(3).stream(1, 1).uniform(), RngPlan(5).derive(3).stream(1, 1).uniform());
  EXPECT_NE(plan.derive(3).stream(1, 1).uniform(), plan.derive(4).stream(1, 1).uniform());
}
