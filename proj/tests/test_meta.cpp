#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hintbid/environments.hpp"
#include "hintbid/meta.hpp"

using namespace hintbid;

namespace {

Stream sparse_stream(std::size_t T, double noise, std::uint64_t seed) {
    SparseParams p;
    p.supports = {0.2, 0.4};
    p.noise = noise;
    p.mode = SparseMode::value_monotone;
    return gen_sparse(T, p, QNorm::infinity(), seed);
}

MetaConfig small_config() {
    MetaConfig c;
    c.dp = DpConfig{8, 2, 10};
    return c;
}

}  // namespace

TEST(MetaTopRate, Formula) {
    EXPECT_EQ(meta_top_rate(0.0), 0.25);
    EXPECT_DOUBLE_EQ(meta_top_rate(99.5), std::sqrt(std::log(3.0) / 100.0));
    EXPECT_DOUBLE_EQ(meta_top_rate(99.0), std::sqrt(std::log(3.0) / 100.0));
}

TEST(MetaState, DistributionNormalizedAndRateMonotone) {
    const Stream s = sparse_stream(400, 0.1, 1);
    MetaState st(small_config(), s.q, 7);
    double prev = 1.0;
    for (const auto& r : s.rounds) {
        const MetaStep m = st.step(r);
        EXPECT_NEAR(std::accumulate(m.probabilities.begin(), m.probabilities.end(), 0.0), 1.0, 1e-12);
        EXPECT_LE(m.rate, prev);
        prev = m.rate;
        EXPECT_EQ(m.bid, m.node_bids[static_cast<std::size_t>(m.node)]);
        double e = 0.0;
        for (std::size_t i = 0; i < kNodes; ++i) e += m.probabilities[i] * m.node_expected[i];
        EXPECT_NEAR(m.expected_reward, e, 1e-12);
    }
    EXPECT_NEAR(st.error_sum(), 400 * 0.1, 1e-9);
}

TEST(MetaState, HNodeBid) {
    MetaState st(small_config(), QNorm(1.0), 1);
    EXPECT_DOUBLE_EQ(st.h_bid({1, 0.9, 0.3, 0.04, 0.1}), 0.5);
    EXPECT_DOUBLE_EQ(st.h_bid({1, 0.4, 0.3, 0.04, 0.1}), 0.4);
    MetaConfig single = small_config();
    single.mode = HintMode::single;
    MetaState sh(single, QNorm(1.0), 1);
    EXPECT_DOUBLE_EQ(sh.h_bid({1, 0.9, 0.3, 0.04, 0.1}), 0.3);
}

TEST(MetaState, KnownErrorNeedsHorizon) {
    MetaConfig c = small_config();
    c.mode = HintMode::single;
    c.known_error = 10.0;
    EXPECT_THROW(MetaState(c, QNorm(1.0), 1), std::invalid_argument);
    c.horizon = 1000;
    MetaState st(c, QNorm(1.0), 1);
    EXPECT_DOUBLE_EQ(st.top_rate(), std::min(0.25, std::sqrt(std::log(1002.0) / std::sqrt(1000.0 * 10.0))));
}

TEST(MetaState, PrefersExactHint) {
    const Stream s = sparse_stream(3000, 0.0, 3);
    const auto out = run_meta_with_nodes(s, small_config(), 5);
    // sigma = 0: the h node bids m exactly and the top layer stays at rate 1/4.
    double best = 0.0;
    for (const auto& r : s.rounds) best += r.v - r.m;
    EXPECT_DOUBLE_EQ(out.nodes[2].expected_cumulative_reward(), best);
    EXPECT_GT(out.meta.expected_cumulative_reward(), best - 30.0);
}

TEST(MetaState, SingleModeNeverReadsSigma) {
    Stream a = sparse_stream(300, 0.1, 9);
    Stream b = a;
    for (auto& r : b.rounds) r.sigma = 0.9;
    a.sigma_hidden = b.sigma_hidden = true;
    const auto ta = run_meta(a, small_config(), 11);
    const auto tb = run_meta(b, small_config(), 11);
    EXPECT_EQ(ta.rewards(), tb.rewards());
}

TEST(MetaState, NodeTrajectoriesMatchMeta) {
    const Stream s = sparse_stream(200, 0.05, 2);
    const auto a = run_meta_with_nodes(s, small_config(), 4);
    const auto b = run_meta(s, small_config(), 4);
    EXPECT_EQ(a.meta.rewards(), b.rewards());
    for (const auto& n : a.nodes) EXPECT_EQ(n.size(), s.size());
}

TEST(NoHintNode, IgnoresHint) {
    Stream a = sparse_stream(200, 0.1, 5);
    Stream b = a;
    for (auto& r : b.rounds) r.h = 0.0;
    DpPolicy na = make_no_hint_node(DpConfig{8, 2, 10}, a.q, 1);
    DpPolicy nb = make_no_hint_node(DpConfig{8, 2, 10}, b.q, 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(no_hint_node_step(na, a.rounds[i]).bid, no_hint_node_step(nb, b.rounds[i]).bid);
}

TEST(Doubling, CapSequence) {
    DoublingState d(100);
    std::size_t t = 0;
    auto mid = [](int k) { return (k - 0.5) / 100.0; };
    for (int k = 1; k <= 8; ++k) EXPECT_FALSE(d.observe(++t, mid(k)));
    EXPECT_FALSE(d.observe(++t, mid(1)));  // repeat
    EXPECT_TRUE(d.observe(++t, mid(9)));
    EXPECT_EQ(d.cap(), 16u);
    for (int k = 10; k <= 16; ++k) EXPECT_FALSE(d.observe(++t, mid(k)));
    EXPECT_TRUE(d.observe(++t, mid(17)));
    EXPECT_EQ(d.caps(), (std::vector<std::size_t>{8, 16, 32}));
    EXPECT_EQ(d.epoch_starts(), (std::vector<std::size_t>{1, 11, 19}));
    EXPECT_EQ(d.distinct_supports(), 17u);
}

TEST(Doubling, SnapsToGrid) {
    DoublingState d(10);
    EXPECT_FALSE(d.observe(1, 0.41));
    EXPECT_FALSE(d.observe(2, 0.45));  // same cell as 0.41
    EXPECT_EQ(d.distinct_supports(), 1u);
    EXPECT_THROW(DoublingState(0), std::invalid_argument);
}

TEST(Doubling, JumpsPastSeveralCaps) {
    DoublingState d(1000, 2);
    for (int k = 1; k <= 2; ++k) d.observe(k, (k - 0.5) / 1000.0);
    EXPECT_FALSE(d.observe(3, 0.0015));
    EXPECT_TRUE(d.observe(4, 0.0025));
    EXPECT_EQ(d.cap(), 4u);
}

TEST(DoublingRun, FewSupportsNeverRestarts) {
    const Stream s = sparse_stream(500, 0.05, 8);
    MetaConfig c = small_config();
    const auto run = doubling_k_run(s, c, 3);
    EXPECT_EQ(run.caps, (std::vector<std::size_t>{8}));
    EXPECT_EQ(run.trajectory.size(), s.size());
    c.dp.levels = 8;
    EXPECT_EQ(run.trajectory.rewards(), run_meta(s, c, mix_seed(3, 0)).rewards());
}

TEST(DoublingRun, RestartsOnNewSupports) {
    SparseParams p;
    for (int k = 0; k < 12; ++k) p.supports.push_back(0.05 * (k + 1));
    const Stream s = gen_sparse(600, p, QNorm::infinity(), 4);
    MetaConfig c = small_config();
    c.dp.grid = 100;
    const auto run = doubling_k_run(s, c, 1);
    EXPECT_EQ(run.caps, (std::vector<std::size_t>{8, 16}));
    ASSERT_EQ(run.epoch_starts.size(), 2u);
    EXPECT_GT(run.epoch_starts[1], 9u);
}

TEST(Examples, PerfectHintsFavourHNode) {
    Stream s;
    for (std::size_t t = 1; t <= 3; ++t) s.rounds.push_back({t, 1.0, 0.3, 0.0, 0.3});
    MetaState st(small_config(), QNorm(1.0), 1);
    st.step(s.rounds[0]);
    const auto p = st.top_distribution();
    if (st.node_rewards()[2] > std::max(st.node_rewards()[0], st.node_rewards()[1])) {
        EXPECT_GT(p[2], p[0]);
        EXPECT_GT(p[2], p[1]);
    }
    EXPECT_DOUBLE_EQ(st.node_rewards()[2], 0.7);
}

TEST(Examples, FirstRoundRateIsCap) {
    MetaState st(small_config(), QNorm(1.0), 1);
    EXPECT_EQ(st.top_rate(), 0.25);
    for (double p : st.top_distribution()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Examples, UniformNodeDraws) {
    std::array<std::size_t, kNodes> hits{};
    const AuctionRound r{1, 1.0, 0.3, 0.1, 0.3};
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        MetaState st(small_config(), QNorm(1.0), seed);
        ++hits[static_cast<std::size_t>(st.step(r).node)];
    }
    for (std::size_t h : hits) EXPECT_NEAR(h / 10000.0, 1.0 / 3.0, 0.02);
}

TEST(Examples, NoHintNodeOnFixedPrice) {
    Stream s;
    for (std::size_t t = 1; t <= 2000; ++t) s.rounds.push_back({t, 1.0, 0.9, 0.0, 0.5});
    DpPolicy g = make_no_hint_node(DpConfig{10, 2, 20}, QNorm(1.0), 1);
    double total = 0.0;
    for (const auto& r : s.rounds) total += no_hint_node_step(g, r).reward;
    EXPECT_GE(total, 0.5 * 2000 - 20 * std::sqrt(2000.0));
}

TEST(Examples, NoHintFirstRoundUniform) {
    DpPolicy g = make_no_hint_node(DpConfig{3, 2, 4}, QNorm(1.0), 1);
    const auto d = dp_action_distribution(g.tables(), {0.9, 0.0, 0.0}, 0.25);
    const auto paths = enumerate_step_paths(DpConfig{3, 2, 4});
    std::vector<double> count(4, 0.0);
    for (const auto& p : paths) count[p[2] - 1] += 1.0 / static_cast<double>(paths.size());
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(d.grid[j], count[j], 1e-12);
}

TEST(Examples, DoublingRestartCounts) {
    for (const auto& [K, restarts] : std::vector<std::pair<std::size_t, std::size_t>>{{5, 0}, {9, 1}, {20, 2}}) {
        SparseParams p;
        for (std::size_t k = 0; k < K; ++k) p.supports.push_back(0.0125 + 0.03 * k);
        Stream s;
        SplitMix64 g(K);
        // every support shows up in the first K rounds, then random draws
        for (std::size_t t = 1; t <= 300; ++t) {
            const double m = t <= K ? p.supports[t - 1] : p.supports[static_cast<std::size_t>(g.uniform() * K)];
            s.rounds.push_back({t, 0.9, m, 0.0, m});
        }
        MetaConfig c = small_config();
        c.dp.grid = 100;
        c.dp.bins = 4;
        const auto run = doubling_k_run(s, c, 2);
        EXPECT_EQ(run.caps.size(), restarts + 1) << K;
        for (std::size_t e : run.epoch_starts) EXPECT_LE(e, 100u);
    }
}
