#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "hintbid/core.hpp"

using namespace hintbid;

TEST(Reward, WinPaysValueMinusBid) {
    EXPECT_DOUBLE_EQ(reward(0.4, 0.9, 0.3), 0.5);
    EXPECT_EQ(reward(0.2, 0.9, 0.3), 0.0);
}

TEST(Reward, TiesWin) {
    EXPECT_DOUBLE_EQ(reward(0.3, 0.9, 0.3), 0.6);
    EXPECT_EQ(reward(0.0, 0.5, 0.0), 0.5);
}

TEST(Reward, BidAtValueEarnsZero) { EXPECT_EQ(reward(0.7, 0.7, 0.1), 0.0); }

TEST(ClampBid, IntoZeroToValue) {
    EXPECT_EQ(clamp_bid(-0.2, 0.5), 0.0);
    EXPECT_EQ(clamp_bid(0.8, 0.5), 0.5);
    EXPECT_EQ(clamp_bid(0.25, 0.5), 0.25);
}

TEST(Bid, RejectsInfeasible) {
    EXPECT_THROW(Bid(0.6, 0.5), std::invalid_argument);
    EXPECT_THROW(Bid(-0.1, 0.5), std::invalid_argument);
    EXPECT_EQ(Bid::clamped(0.9, 0.5).value(), 0.5);
}

TEST(QNorm, Exponent) {
    EXPECT_DOUBLE_EQ(QNorm(1.0).exponent(), 0.5);
    EXPECT_DOUBLE_EQ(QNorm(3.0).exponent(), 0.75);
    EXPECT_EQ(QNorm::infinity().exponent(), 1.0);
    EXPECT_TRUE(QNorm::infinity().is_infinite());
}

TEST(QNorm, RejectsBelowOne) {
    EXPECT_THROW(QNorm(0.5), std::invalid_argument);
    EXPECT_THROW(QNorm(std::nan("")), std::invalid_argument);
}

TEST(QNorm, SigmaPower) {
    EXPECT_DOUBLE_EQ(QNorm(1.0).sigma_power(0.04), 0.2);
    EXPECT_EQ(QNorm::infinity().sigma_power(0.3), 0.3);
    EXPECT_EQ(QNorm(2.0).sigma_power(0.0), 0.0);
}

TEST(ValueBin, CeilWithClamp) {
    EXPECT_EQ(value_bin(0.0, 4), 1u);
    EXPECT_EQ(value_bin(0.25, 4), 1u);
    EXPECT_EQ(value_bin(0.26, 4), 2u);
    EXPECT_EQ(value_bin(1.0, 4), 4u);
    EXPECT_EQ(value_bin(0.5, 1), 1u);
}

TEST(ValueBin, AlwaysInRange) {
    SplitMix64 g(3);
    for (int i = 0; i < 10000; ++i) {
        const double v = g.uniform();
        for (std::size_t D : {1u, 2u, 7u, 50u}) {
            const auto d = value_bin(v, D);
            EXPECT_GE(d, 1u);
            EXPECT_LE(d, D);
            EXPECT_LE(v, static_cast<double>(d) / D + 1e-12);
        }
    }
}

TEST(GridCell, SmallestPriceAtOrAbove) {
    EXPECT_EQ(grid_cell(0.5, 10), 5u);
    EXPECT_EQ(grid_cell(0.51, 10), 6u);
    EXPECT_EQ(grid_cell(0.0, 10), 1u);
    EXPECT_DOUBLE_EQ(grid_price(3, 4), 0.75);
}

TEST(Trajectory, Cumulative) {
    Trajectory t;
    t.push({1, 0.1, 0.5, 0.4});
    t.push({2, 0.2, 0.0, 0.1});
    EXPECT_EQ(t.size(), 2u);
    EXPECT_DOUBLE_EQ(t.cumulative_reward(), 0.5);
    EXPECT_DOUBLE_EQ(t.expected_cumulative_reward(), 0.5);
    Trajectory u;
    u.append(t);
    EXPECT_EQ(u.rewards(), t.rewards());
    EXPECT_EQ(u.expected_rewards(), t.expected_rewards());
}

TEST(IsValid, UnitInterval) {
    EXPECT_TRUE(is_valid({1, 0.5, 0.5, 0.1, 0.3}));
    EXPECT_FALSE(is_valid({1, 1.5, 0.5, 0.1, 0.3}));
    EXPECT_FALSE(is_valid({1, 0.5, -0.1, 0.1, 0.3}));
}

TEST(SplitMix64, ReferenceSequence) {
    // splitmix64 from seed 0
    SplitMix64 g(0);
    EXPECT_EQ(g(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(g(), 0x6E789E6AA1B965F4ULL);
}

TEST(SplitMix64, UniformInHalfOpenUnit) {
    SplitMix64 g(11);
    for (int i = 0; i < 100000; ++i) {
        const double u = g.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(MixSeed, DistinctAndDeterministic) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a)
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(mix_seed(a, b));
    EXPECT_EQ(seen.size(), 400u);
    EXPECT_EQ(mix_seed(5, 7), mix_seed(5, 7));
}

TEST(Examples, RewardAndClamp) {
    EXPECT_DOUBLE_EQ(reward(0.5, 1.0, 0.4), 0.5);
    EXPECT_EQ(reward(0.3, 1.0, 0.4), 0.0);
    EXPECT_DOUBLE_EQ(reward(0.4, 1.0, 0.4), 0.6);
    EXPECT_EQ(clamp_bid(1.1, 1.0), 1.0);
    EXPECT_EQ(clamp_bid(-0.2, 0.8), 0.0);
    EXPECT_EQ(clamp_bid(0.5, 0.8), 0.5);
}
