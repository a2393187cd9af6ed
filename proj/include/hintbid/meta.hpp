#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "experts.hpp"
#include "hedge.hpp"
#include "sparse_dp.hpp"

namespace hintbid {

enum class Node : std::size_t { f = 0, g = 1, h = 2 };

inline constexpr std::size_t kNodes = 3;

enum class HintMode {
    interval,  // (h, sigma) visible; f carries the h + sigma^(q/(q+1)) expert
    single,    // only h visible; f carries offsets h + i/n
};

struct MetaConfig {
    DpConfig dp;
    HintMode mode = HintMode::interval;
    std::size_t n_offsets = 10;           // single mode
    std::size_t horizon = 0;              // single mode with known_error
    std::optional<double> known_error;    // total error L, single mode
};

// Top-layer rate in interval mode: min{1/4, sqrt(log 3 / (floor(L) + 1))},
// with L the sigma-power sum over rounds before t.
inline double meta_top_rate(double error_sum_before) {
    return capped_rate(std::log(3.0), std::floor(error_sum_before) + 1.0);
}

struct MetaStep {
    double bid = 0.0;
    double reward = 0.0;
    double expected_reward = 0.0;
    Node node = Node::f;
    double rate = 0.0;
    std::array<double, kNodes> node_bids{};
    std::array<double, kNodes> probabilities{};
    std::array<double, kNodes> node_rewards{};
    std::array<double, kNodes> node_expected{};
};

// No-hint node: exponential weights over the step class alone, anytime
// rate min{1/4, sqrt(K log B / t)}. Never reads h or sigma.
inline DpPolicy make_no_hint_node(const DpConfig& config, QNorm q, std::uint64_t seed) {
    return DpPolicy(config, {}, q, Schedule::anytime(), seed);
}

inline DpStep no_hint_node_step(DpPolicy& node, const AuctionRound& round) { return node.step(round, true); }

class MetaState {
public:
    MetaState(MetaConfig config, QNorm q, std::uint64_t seed)
        : config_(config), q_(q), rng_(mix_seed(seed, 0)),
          f_(config.dp, f_hints(config, q), q,
             config.mode == HintMode::interval ? Schedule::sigma_power() : Schedule::anytime(),
             mix_seed(seed, 1)),
          g_(make_no_hint_node(config.dp, q, mix_seed(seed, 2))) {
        if (config_.mode == HintMode::single && config_.known_error) {
            if (config_.horizon == 0) throw std::invalid_argument("MetaState: known_error needs a horizon");
            const double T = static_cast<double>(config_.horizon);
            fixed_top_rate_ = capped_rate(std::log(T + 2.0), std::sqrt(T * std::max(*config_.known_error, 1.0)));
        }
    }

    const MetaConfig& config() const { return config_; }
    const std::array<double, kNodes>& node_rewards() const { return node_rewards_; }
    double error_sum() const { return error_sum_; }
    std::size_t rounds() const { return rounds_; }
    const DpPolicy& f_node() const { return f_; }
    const DpPolicy& g_node() const { return g_; }

    double top_rate() const {
        if (fixed_top_rate_) return *fixed_top_rate_;
        if (config_.mode == HintMode::single) return capped_rate(std::log(3.0), static_cast<double>(rounds_ + 1));
        return meta_top_rate(error_sum_);
    }

    std::array<double, kNodes> top_distribution() const {
        std::array<double, kNodes> p{};
        sample_distribution_into(node_rewards_, top_rate(), p);
        return p;
    }

    double h_bid(const AuctionRound& r) const {
        if (config_.mode == HintMode::single) return clamp_bid(r.h, r.v);
        return clamp_bid(r.h + q_.sigma_power(r.sigma), r.v);
    }

    MetaStep step(const AuctionRound& round) {
        if (!is_valid(round)) throw std::invalid_argument("meta_step: round fields outside [0,1]");
        const bool hidden = config_.mode == HintMode::single;
        MetaStep out;
        out.rate = top_rate();
        out.probabilities = top_distribution();

        const DpStep fs = f_.step(round, hidden);
        const DpStep gs = no_hint_node_step(g_, round);
        const double hb = h_bid(round);
        out.node_bids = {fs.bid, gs.bid, hb};
        const std::array<double, kNodes> realized = {fs.reward, gs.reward, reward(hb, round.v, round.m)};
        const std::array<double, kNodes> expected = {fs.expected_reward, gs.expected_reward, realized[2]};

        out.node_rewards = realized;
        out.node_expected = expected;
        const std::size_t pick = draw_index(out.probabilities, rng_.uniform());
        out.node = static_cast<Node>(pick);
        out.bid = out.node_bids[pick];
        out.reward = realized[pick];
        for (std::size_t i = 0; i < kNodes; ++i) {
            out.expected_reward += out.probabilities[i] * expected[i];
            node_rewards_[i] += realized[i];
        }
        if (!hidden) error_sum_ += q_.sigma_power(round.sigma);
        ++rounds_;
        return out;
    }

private:
    static ExpertSet f_hints(const MetaConfig& c, QNorm q) {
        if (c.mode == HintMode::single) return make_single_hint_experts(c.n_offsets);
        return {Expert::sigma_power(q.exponent())};
    }

    MetaConfig config_;
    QNorm q_;
    SplitMix64 rng_;
    DpPolicy f_;
    DpPolicy g_;
    std::array<double, kNodes> node_rewards_{};
    double error_sum_ = 0.0;
    std::size_t rounds_ = 0;
    std::optional<double> fixed_top_rate_;
};

inline MetaStep meta_step(MetaState& state, const AuctionRound& round) { return state.step(round); }

struct NodeTrajectories {
    Trajectory meta;
    std::array<Trajectory, kNodes> nodes;  // each node run on its own
};

inline Trajectory run_meta(const Stream& stream, MetaConfig config, std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("run_meta: empty stream");
    if (stream.sigma_hidden) config.mode = HintMode::single;
    if (config.horizon == 0) config.horizon = stream.size();
    MetaState state(config, stream.q, seed);
    Trajectory traj;
    for (const auto& r : stream.rounds) {
        const MetaStep st = state.step(r);
        traj.push({r.t, st.bid, st.reward, st.expected_reward});
    }
    return traj;
}

// The meta-learner plus each node's own trajectory, all from one run.
inline NodeTrajectories run_meta_with_nodes(const Stream& stream, MetaConfig config, std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("run_meta: empty stream");
    if (stream.sigma_hidden) config.mode = HintMode::single;
    if (config.horizon == 0) config.horizon = stream.size();
    MetaState state(config, stream.q, seed);
    NodeTrajectories out;
    for (const auto& r : stream.rounds) {
        const MetaStep st = state.step(r);
        out.meta.push({r.t, st.bid, st.reward, st.expected_reward});
        for (std::size_t i = 0; i < kNodes; ++i)
            out.nodes[i].push({r.t, st.node_bids[i], st.node_rewards[i], st.node_expected[i]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Unknown K: restart with a doubled level cap when the number of distinct
// (grid-snapped) m values exceeds it.

inline constexpr std::size_t kInitialLevelCap = 8;

class DoublingState {
public:
    explicit DoublingState(std::size_t grid, std::size_t initial_cap = kInitialLevelCap)
        : grid_(grid), cap_(initial_cap), caps_{initial_cap}, epoch_starts_{1} {
        if (grid == 0 || initial_cap == 0) throw std::invalid_argument("DoublingState: grid and cap must be >= 1");
    }

    std::size_t cap() const { return cap_; }
    const std::vector<std::size_t>& caps() const { return caps_; }
    const std::vector<std::size_t>& epoch_starts() const { return epoch_starts_; }
    std::size_t distinct_supports() const { return seen_.size(); }

    // Records round t's m; returns true when the learner must restart at t+1.
    bool observe(std::size_t t, double m) {
        seen_.insert(grid_cell(m, grid_));
        if (seen_.size() <= cap_) return false;
        while (seen_.size() > cap_) cap_ *= 2;
        caps_.push_back(cap_);
        epoch_starts_.push_back(t + 1);
        return true;
    }

private:
    std::size_t grid_;
    std::size_t cap_;
    std::vector<std::size_t> caps_;
    std::vector<std::size_t> epoch_starts_;
    std::set<std::size_t> seen_;
};

struct DoublingRun {
    Trajectory trajectory;
    std::vector<std::size_t> caps;
    std::vector<std::size_t> epoch_starts;
};

inline DoublingRun doubling_k_run(const Stream& stream, MetaConfig config, std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("doubling_k_run: empty stream");
    if (stream.sigma_hidden) config.mode = HintMode::single;
    if (config.horizon == 0) config.horizon = stream.size();
    DoublingState dbl(config.dp.grid);
    std::size_t epoch = 0;
    auto fresh = [&] {
        MetaConfig c = config;
        c.dp.levels = dbl.cap();
        return std::make_unique<MetaState>(c, stream.q, mix_seed(seed, epoch));
    };
    auto state = fresh();
    DoublingRun out;
    for (const auto& r : stream.rounds) {
        const MetaStep st = state->step(r);
        out.trajectory.push({r.t, st.bid, st.reward, st.expected_reward});
        if (dbl.observe(r.t, r.m)) {
            ++epoch;
            state = fresh();
        }
    }
    out.caps = dbl.caps();
    out.epoch_starts = dbl.epoch_starts();
    return out;
}

}  // namespace hintbid
