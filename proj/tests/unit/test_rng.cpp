#include <gtest/gtest.h>

#include <set>

#include "pwtl/parallel.hpp"
#include "pwtl/rng.hpp"

using namespace pwtl;

TEST(Rng, SameSeedSameSequence) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(Rng, Uniform01StaysInHalfOpenUnitInterval) {
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, UniformIntCoversClosedRangeOnly) {
    Rng rng(2);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        const auto k = rng.uniform_int(20, 54);
        ASSERT_GE(k, 20);
        ASSERT_LE(k, 54);
        seen.insert(k);
    }
    EXPECT_EQ(seen.size(), 35u);
    EXPECT_EQ(rng.uniform_int(7, 7), 7);
}

TEST(Rng, NormalHasUnitMoments) {
    Rng rng(3);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, DerivedSeedsAreDistinct) {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        seeds.insert(derive_seed(123, i));
    }
    EXPECT_EQ(seeds.size(), 10000u);
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (const int h : hits) ASSERT_EQ(h, 1);

    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 5) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}
