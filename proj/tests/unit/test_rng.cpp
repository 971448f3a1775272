#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "cmekit/ensemble.hpp"
#include "cmekit/rng.hpp"

using namespace cmekit;

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, FirstBlockIsCounterZero) {
  RngStream r(0, 0);
  EXPECT_EQ(r(), 0x6627e8d5u);
  EXPECT_EQ(r(), 0xe169c58du);
  EXPECT_EQ(r(), 0xbc57ac4cu);
  EXPECT_EQ(r(), 0x9b00dbd8u);
}

TEST(RngStream, SameSeedAndStreamSameSequence) {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differ_c = differ_c || x != c();
    differ_d = differ_d || x != d();
  }
  EXPECT_TRUE(differ_c);
  EXPECT_TRUE(differ_d);
}

TEST(RngStream, UniformRangeAndMean) {
  RngStream r(1, 2);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_pos();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    s += u;
  }
  EXPECT_NEAR(s / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, WorksWithStdDistributions) {
  RngStream r(9, 0);
  std::poisson_distribution<long> pois(4.0);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) s += static_cast<double>(pois(r));
  EXPECT_NEAR(s / 100000.0, 4.0, 4.0 * std::sqrt(4.0 / 100000.0));
}

TEST(Ensemble, EveryIndexOnceAndLowestErrorWins) {
  for (unsigned w : {1u, 2u, 4u, 16u}) {
    std::vector<int> hits(37, 0);
    parallel_for_index(hits.size(), w, [&](std::size_t i) { hits[i]++; });
    for (int h : hits) EXPECT_EQ(h, 1);
    try {
      parallel_for_index(40, w, [](std::size_t i) {
        if (i == 13 || i == 29) throw std::runtime_error(std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "13");
    }
  }
}
