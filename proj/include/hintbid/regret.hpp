#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"

namespace hintbid {

// A hindsight comparator: its per-round rewards along the stream.
struct OracleResult {
    std::string name;
    double total = 0.0;
    std::vector<double> per_round;
    double discretization_bound = 0.0;  // T / B for grid oracles
};

// ---------------------------------------------------------------------------
// Best fixed bid.

struct ConstantBid {
    double bid = 0.0;
    double total = 0.0;
};

// Candidates are 0 and the observed m values (optimal bids sit at breakpoints).
// Requires a common v unless allow_varying_value is set; bids are clamped to v.
inline ConstantBid best_constant_bid(const std::vector<AuctionRound>& rounds, bool allow_varying_value = false) {
    if (rounds.empty()) throw std::invalid_argument("best_constant_bid: empty rounds");
    const double v0 = rounds.front().v;
    const bool fixed_v = std::all_of(rounds.begin(), rounds.end(), [&](const AuctionRound& r) { return r.v == v0; });
    if (!fixed_v && !allow_varying_value)
        throw std::invalid_argument("best_constant_bid: values differ across rounds");

    std::vector<double> ms;
    ms.reserve(rounds.size());
    for (const auto& r : rounds) ms.push_back(r.m);
    std::sort(ms.begin(), ms.end());

    ConstantBid best{0.0, 0.0};
    for (const auto& r : rounds) best.total += reward(0.0, r.v, r.m);

    if (fixed_v) {
        // total(b) = (v - b) * #{m <= b}
        std::size_t i = 0;
        while (i < ms.size()) {
            std::size_t j = i;
            while (j < ms.size() && ms[j] == ms[i]) ++j;
            const double b = ms[i];
            if (b <= v0) {
                const double total = (v0 - b) * static_cast<double>(j);
                if (total > best.total) best = {b, total};
            }
            i = j;
        }
        return best;
    }
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    for (double b : ms) {
        double total = 0.0;
        for (const auto& r : rounds) total += reward(clamp_bid(b, r.v), r.v, r.m);
        if (total > best.total) best = {b, total};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Best monotone 1-Lipschitz grid function.
//
// f maps value bins 1..D to bid indices 0..B with
// 0 <= f(d+1) - f(d) <= floor(B/D), i.e. a rise of at most one bin width.

struct GridFunction {
    std::vector<std::size_t> bid_index;  // per bin
    std::size_t grid = 1;
    double total = 0.0;

    double bid_for_value(double v) const {
        return grid_price(bid_index[value_bin(v, bid_index.size()) - 1], grid);
    }
};

inline std::size_t lipschitz_step(std::size_t bins, std::size_t grid) { return grid / bins; }

// Per-(bin, bid index 0..B) reward of bidding j/B (clamped to v) over the rounds in that bin.
inline std::vector<double> lipschitz_cell_rewards(const std::vector<AuctionRound>& rounds, std::size_t D,
                                                  std::size_t B) {
    // Each round pays (v - j/B) for every j with m <= j/B <= v: a contiguous
    // index range, accumulated with difference arrays.
    std::vector<double> count(D * (B + 2), 0.0), value(D * (B + 2), 0.0);
    for (const auto& r : rounds) {
        const std::size_t d = value_bin(r.v, D) - 1;
        auto lo = static_cast<std::ptrdiff_t>(std::ceil(r.m * static_cast<double>(B)));
        while (lo > 0 && grid_price(static_cast<std::size_t>(lo - 1), B) >= r.m) --lo;
        while (lo <= static_cast<std::ptrdiff_t>(B) && grid_price(static_cast<std::size_t>(lo), B) < r.m) ++lo;
        auto hi = static_cast<std::ptrdiff_t>(std::floor(r.v * static_cast<double>(B)));
        while (hi < static_cast<std::ptrdiff_t>(B) && grid_price(static_cast<std::size_t>(hi + 1), B) <= r.v) ++hi;
        while (hi >= 0 && grid_price(static_cast<std::size_t>(hi), B) > r.v) --hi;
        if (lo > hi) continue;
        double* c = &count[d * (B + 2)];
        double* s = &value[d * (B + 2)];
        c[lo] += 1.0;
        c[hi + 1] -= 1.0;
        s[lo] += r.v;
        s[hi + 1] -= r.v;
    }
    std::vector<double> cell(D * (B + 1), 0.0);
    for (std::size_t d = 0; d < D; ++d) {
        double c = 0.0, s = 0.0;
        for (std::size_t j = 0; j <= B; ++j) {
            c += count[d * (B + 2) + j];
            s += value[d * (B + 2) + j];
            cell[d * (B + 1) + j] = s - c * grid_price(j, B);
        }
    }
    return cell;
}

inline GridFunction best_lipschitz_dp(const std::vector<AuctionRound>& rounds, std::size_t D, std::size_t B) {
    if (rounds.empty()) throw std::invalid_argument("best_lipschitz_dp: empty rounds");
    if (D == 0 || B == 0) throw std::invalid_argument("best_lipschitz_dp: D and B must be >= 1");
    const std::size_t W = B + 1;
    const std::size_t step = lipschitz_step(D, B);
    const auto cell = lipschitz_cell_rewards(rounds, D, B);

    // best[d][j]: best total over bins 1..d with f(d) = j.
    std::vector<double> best(D * W);
    std::vector<std::size_t> from(D * W, 0);
    for (std::size_t j = 0; j < W; ++j) best[j] = cell[j];
    for (std::size_t d = 1; d < D; ++d) {
        // Sliding-window max of best[d-1][j-step .. j], ties to the smaller index.
        std::deque<std::size_t> win;
        for (std::size_t j = 0; j < W; ++j) {
            while (!win.empty() && best[(d - 1) * W + win.back()] < best[(d - 1) * W + j]) win.pop_back();
            win.push_back(j);
            while (win.front() + step < j) win.pop_front();
            const std::size_t arg = win.front();
            best[d * W + j] = cell[d * W + j] + best[(d - 1) * W + arg];
            from[d * W + j] = arg;
        }
    }
    GridFunction f;
    f.grid = B;
    f.bid_index.assign(D, 0);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < W; ++j)
        if (best[(D - 1) * W + j] > best[(D - 1) * W + arg]) arg = j;
    f.total = best[(D - 1) * W + arg];
    for (std::size_t d = D; d-- > 0;) {
        f.bid_index[d] = arg;
        if (d > 0) arg = from[d * W + arg];
    }
    return f;
}

// ---------------------------------------------------------------------------
// Best nondecreasing map from value bins to a fixed support ladder.

struct StepFunction {
    std::vector<double> supports;
    std::vector<std::size_t> rank;  // per bin, 0-based
    double total = 0.0;

    double bid_for_value(double v) const { return supports[rank[value_bin(v, rank.size()) - 1]]; }
};

inline StepFunction best_sparse_oracle(const std::vector<AuctionRound>& rounds, std::vector<double> supports,
                                       std::size_t D) {
    if (supports.empty()) throw std::invalid_argument("best_sparse_oracle: empty supports");
    if (D == 0) throw std::invalid_argument("best_sparse_oracle: D must be >= 1");
    for (std::size_t k = 1; k < supports.size(); ++k)
        if (!(supports[k - 1] < supports[k]))
            throw std::invalid_argument("best_sparse_oracle: supports must be strictly increasing");
    const std::size_t K = supports.size();
    std::vector<double> cell(D * K, 0.0);
    for (const auto& r : rounds) {
        const std::size_t d = value_bin(r.v, D) - 1;
        for (std::size_t k = 0; k < K; ++k) cell[d * K + k] += reward(clamp_bid(supports[k], r.v), r.v, r.m);
    }
    std::vector<double> best(D * K);
    std::vector<std::size_t> from(D * K, 0);
    for (std::size_t k = 0; k < K; ++k) best[k] = cell[k];
    for (std::size_t d = 1; d < D; ++d) {
        std::size_t arg = 0;  // prefix argmax, ties to the smaller rank
        for (std::size_t k = 0; k < K; ++k) {
            if (best[(d - 1) * K + k] > best[(d - 1) * K + arg]) arg = k;
            best[d * K + k] = cell[d * K + k] + best[(d - 1) * K + arg];
            from[d * K + k] = arg;
        }
    }
    StepFunction f;
    f.supports = std::move(supports);
    f.rank.assign(D, 0);
    std::size_t arg = 0;
    for (std::size_t k = 1; k < K; ++k)
        if (best[(D - 1) * K + k] > best[(D - 1) * K + arg]) arg = k;
    f.total = best[(D - 1) * K + arg];
    for (std::size_t d = D; d-- > 0;) {
        f.rank[d] = arg;
        if (d > 0) arg = from[d * K + arg];
    }
    return f;
}

// ---------------------------------------------------------------------------
// Oracle reward streams.

template <typename BidFn>
OracleResult oracle_stream(std::string name, const std::vector<AuctionRound>& rounds, BidFn&& bid_for) {
    OracleResult out;
    out.name = std::move(name);
    out.per_round.reserve(rounds.size());
    for (const auto& r : rounds) {
        const double x = reward(clamp_bid(bid_for(r), r.v), r.v, r.m);
        out.per_round.push_back(x);
        out.total += x;
    }
    return out;
}

inline OracleResult constant_oracle(const std::vector<AuctionRound>& rounds, bool allow_varying_value = false) {
    const ConstantBid c = best_constant_bid(rounds, allow_varying_value);
    return oracle_stream("constant", rounds, [&](const AuctionRound&) { return c.bid; });
}

inline OracleResult lipschitz_oracle(const std::vector<AuctionRound>& rounds, std::size_t D, std::size_t B) {
    const GridFunction f = best_lipschitz_dp(rounds, D, B);
    OracleResult out = oracle_stream("lipschitz", rounds, [&](const AuctionRound& r) { return f.bid_for_value(r.v); });
    out.discretization_bound = static_cast<double>(rounds.size()) / static_cast<double>(B);
    return out;
}

inline OracleResult sparse_oracle(const std::vector<AuctionRound>& rounds, std::vector<double> supports,
                                  std::size_t D) {
    const StepFunction f = best_sparse_oracle(rounds, std::move(supports), D);
    return oracle_stream("sparse", rounds, [&](const AuctionRound& r) { return f.bid_for_value(r.v); });
}

// ---------------------------------------------------------------------------

struct RegretReport {
    std::string oracle;
    double oracle_reward = 0.0;
    double policy_reward = 0.0;
    double regret = 0.0;
    std::vector<double> oracle_cumulative;
    std::vector<double> policy_cumulative;
    std::vector<double> regret_curve;
};

enum class RewardBasis { realized, expected };

inline RegretReport regret_curve(const Trajectory& traj, const OracleResult& oracle,
                                 RewardBasis basis = RewardBasis::realized) {
    if (traj.size() != oracle.per_round.size()) throw std::invalid_argument("regret_curve: length mismatch");
    RegretReport rep;
    rep.oracle = oracle.name;
    const std::size_t n = traj.size();
    rep.oracle_cumulative.resize(n);
    rep.policy_cumulative.resize(n);
    rep.regret_curve.resize(n);
    double o = 0.0, p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = traj.records()[i];
        o += oracle.per_round[i];
        p += basis == RewardBasis::realized ? rec.reward : rec.expected_reward;
        rep.oracle_cumulative[i] = o;
        rep.policy_cumulative[i] = p;
        rep.regret_curve[i] = o - p;
    }
    rep.oracle_reward = o;
    rep.policy_reward = p;
    rep.regret = o - p;
    return rep;
}

}  // namespace hintbid
