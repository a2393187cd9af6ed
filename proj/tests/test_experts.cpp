#include <gtest/gtest.h>

#include <set>

#include "hintbid/experts.hpp"

using namespace hintbid;

TEST(Alg1Experts, GridPlusOneHint) {
    const auto e = make_alg1_experts(10, QNorm(1.0));
    ASSERT_EQ(e.size(), 11u);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(e[i].kind, Expert::Kind::constant);
        EXPECT_DOUBLE_EQ(e[i].param, (i + 1) / 10.0);
    }
    EXPECT_EQ(e[10].kind, Expert::Kind::sigma_power);
    EXPECT_DOUBLE_EQ(e[10].param, 0.5);
    EXPECT_THROW(make_alg1_experts(0, QNorm(1.0)), std::invalid_argument);
}

TEST(Alg1Experts, HintBid) {
    const auto e = make_alg1_experts(4, QNorm(1.0));
    const RoundContext c{0.9, 0.3, 0.04};
    EXPECT_DOUBLE_EQ(e.back().bid(c), 0.5);
    EXPECT_DOUBLE_EQ(e[3].bid(c), 0.9);  // 1.0 clamped to v
    const auto inf = make_alg1_experts(4, QNorm::infinity());
    EXPECT_DOUBLE_EQ(inf.back().bid(c), 0.34);
}

TEST(Expert, ZeroSigmaBidsHint) {
    const Expert e = Expert::sigma_power(0.5);
    EXPECT_EQ(e.bid({0.9, 0.3, 0.0}), 0.3);
}

TEST(SingleHintExperts, Offsets) {
    const auto e = make_single_hint_experts(4);
    ASSERT_EQ(e.size(), 4u);
    const RoundContext c{1.0, 0.5, 0.2};
    EXPECT_DOUBLE_EQ(e[0].bid(c), 0.5);
    EXPECT_DOUBLE_EQ(e[1].bid(c), 0.75);
    EXPECT_DOUBLE_EQ(e[3].bid(c), 1.0);  // clamped
    for (const auto& x : e) EXPECT_TRUE(x.uses_hint());
}

TEST(SigmaPowerExperts, RejectsBadExponent) {
    const std::vector<double> bad{0.5, 0.0};
    EXPECT_THROW(make_sigma_power_experts(bad), std::invalid_argument);
    EXPECT_THROW(make_sigma_power_experts(std::vector<double>{}), std::invalid_argument);
}

TEST(GridAndOffset, Size) {
    EXPECT_EQ(make_grid_and_offset_experts(20, 5).size(), 25u);
}

TEST(ComputeBids, SizeMismatchThrows) {
    const auto e = make_alg1_experts(3, QNorm(1.0));
    std::vector<double> out(2);
    EXPECT_THROW(compute_bids(e, {0.5, 0.5, 0.1}, out), std::invalid_argument);
}

TEST(Binomial, Values) {
    EXPECT_EQ(binomial(5, 2), 10.0);
    EXPECT_EQ(binomial(10, 0), 1.0);
    EXPECT_EQ(binomial(3, 4), 0.0);
    EXPECT_EQ(binomial(52, 5), 2598960.0);
}

class SparseCount : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(SparseCount, MatchesClosedForm) {
    const auto [D, K] = GetParam();
    std::vector<double> sup;
    for (std::size_t k = 0; k < K; ++k) sup.push_back(0.1 * (k + 1));
    const auto set = enumerate_sparse_experts(sup, D);
    EXPECT_EQ(static_cast<double>(set.size()), SparseExpertSet::closed_form_count(D, K));
    std::set<std::vector<std::size_t>> distinct;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& r = set.ranks(i);
        for (std::size_t d = 1; d < D; ++d) EXPECT_LE(r[d - 1], r[d]);
        distinct.insert(r);
    }
    EXPECT_EQ(distinct.size(), set.size());
}

INSTANTIATE_TEST_SUITE_P(Grid, SparseCount,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{1, 1}, std::pair<std::size_t, std::size_t>{1, 4},
                                           std::pair<std::size_t, std::size_t>{4, 1}, std::pair<std::size_t, std::size_t>{3, 3},
                                           std::pair<std::size_t, std::size_t>{6, 4}, std::pair<std::size_t, std::size_t>{10, 2}));

TEST(SparseExperts, StepBidsFollowLevels) {
    const auto set = enumerate_sparse_experts({0.2, 0.6}, 2);
    const auto experts = set.experts();
    ASSERT_EQ(experts.size(), 3u);
    // members: (0,0), (0,1), (1,1)
    EXPECT_DOUBLE_EQ(experts[1].bid({0.3, 0.0, 0.0}), 0.2);
    EXPECT_DOUBLE_EQ(experts[1].bid({0.9, 0.0, 0.0}), 0.6);
    EXPECT_DOUBLE_EQ(experts[2].bid({0.3, 0.0, 0.0}), 0.3);  // 0.6 clamped to v
}

TEST(SparseExperts, RejectsUnsortedSupports) {
    EXPECT_THROW(enumerate_sparse_experts({0.5, 0.2}, 3), std::invalid_argument);
    EXPECT_THROW(enumerate_sparse_experts({}, 3), std::invalid_argument);
    EXPECT_THROW(enumerate_sparse_experts({0.5}, 0), std::invalid_argument);
}

TEST(Expert, Ids) {
    EXPECT_EQ(Expert::constant(0.5).id().rfind("const:", 0), 0u);
    EXPECT_EQ(Expert::step({0.1, 0.2}).id().rfind("step:", 0), 0u);
}

TEST(Examples, Alg1Set) {
    const auto e = make_alg1_experts(4, QNorm(1.0));
    const RoundContext c{1.0, 0.5, 0.04};
    const std::vector<double> want{0.25, 0.5, 0.75, 1.0};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(e[i].bid(c), want[i]);
    EXPECT_DOUBLE_EQ(e[4].bid(c), 0.7);
    for (QNorm q : {QNorm(1.0), QNorm(4.0), QNorm::infinity()})
        EXPECT_EQ(make_alg1_experts(4, q).back().bid({1.0, 0.5, 0.0}), 0.5);
}

TEST(Examples, SingleHintSet) {
    const auto four = make_single_hint_experts(4);
    const std::vector<double> want{0.5, 0.75, 1.0, 1.0};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(four[i].bid({1.0, 0.5, 0.0}), want[i]);
    const auto one = make_single_hint_experts(1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].bid({1.0, 0.37, 0.0}), 0.37);
    const auto ten = make_single_hint_experts(10);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(ten[i].bid({1.0, 0.0, 0.0}), i / 10.0);
}

TEST(Examples, SigmaPowerSet) {
    EXPECT_DOUBLE_EQ(make_sigma_power_experts(std::vector<double>{1.0})[0].bid({1.0, 0.4, 0.1}), 0.5);
    EXPECT_DOUBLE_EQ(make_sigma_power_experts(std::vector<double>{0.5})[0].bid({1.0, 0.4, 0.04}), 0.6);
    for (const auto& e : make_sigma_power_experts(std::vector<double>{1.0, 0.5})) EXPECT_EQ(e.bid({1.0, 0.4, 0.0}), 0.4);
}

TEST(Examples, SparseEnumeration) {
    const auto set = enumerate_sparse_experts({0.3, 0.6}, 3);
    ASSERT_EQ(set.size(), 4u);
    const std::vector<std::vector<double>> want{{0.3, 0.3, 0.3}, {0.3, 0.3, 0.6}, {0.3, 0.6, 0.6}, {0.6, 0.6, 0.6}};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(set.levels(i), want[i]);
    EXPECT_LE(static_cast<double>(set.size()), std::pow(3.0, 2.0));
    EXPECT_EQ(enumerate_sparse_experts({0.1, 0.2, 0.3}, 1).size(), 3u);
}
