// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <numeric>
#include <set>
#include <vector>

#include "arsrank/random.hpp"

using arsrank::Rng;
using arsrank::derive_seed;

TEST(Random, DerivedSeedsDependOnNameAndIndex) {
  EXPECT_EQ(derive_seed(1, "shuffle"), derive_seed(1, "shuffle"));
  EXPECT_NE(derive_seed(1, "shuffle"), derive_seed(1, "init"));
  EXPECT_NE(derive_seed(1, "batches", 0), derive_seed(1, "batches", 1));
  EXPECT_NE(derive_seed(1, "init"), derive_seed(2, "init"));
}

TEST(Random, SameSeedSameSequence) {
  Rng a(42, "x"), b(42, "x");
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Random, BelowStaysInRangeAndHitsEveryValue) {
  Rng rng(5);
  std::array<int, 7> hits{};
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Random, Uniform01InHalfOpenUnitInterval) {
  Rng rng(9);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

TEST(Random, ShuffleIsAPermutation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span<int>(v));
    std::set<int> s(v.begin(), v.end());
    EXPECT_EQ(s.size(), 50u);
  }
}
