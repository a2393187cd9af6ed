#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "experts.hpp"
#include "hedge.hpp"

// Exponential weights over the implicit class of nondecreasing step functions
// from value bins 1..D to grid bids j/B (j = 1..B) that use at most K distinct
// levels. A member is a path through states (bin d, level rank k, bid j):
// between consecutive bins it either keeps (k, j) or moves to (k+1, j') with
// j' > j. Forward and backward sums over these paths give the exact marginal
// of the bid at any bin in O(D*K*B) per round.

namespace hintbid {

struct DpConfig {
    std::size_t bins = 100;    // D
    std::size_t levels = 2;    // K
    std::size_t grid = 100;    // B

    void validate() const {
        if (bins == 0 || levels == 0 || grid == 0)
            throw std::invalid_argument("DpConfig: bins, levels and grid must be >= 1");
    }
    // log of the class-size bound B^K used by the learning rate.
    double log_class_size() const {
        return std::max(static_cast<double>(levels) * std::log(static_cast<double>(grid)), std::log(2.0));
    }
};

// Number of members: sum_k C(B, k) * C(D - 1, k - 1).
inline double dp_class_size(const DpConfig& c) {
    double total = 0.0;
    for (std::size_t k = 1; k <= c.levels; ++k) total += binomial(c.grid, k) * binomial(c.bins - 1, k - 1);
    return total;
}

// Cumulative rewards of every (bin, bid) cell plus the hint experts.
//
// The per-cell update does not depend on the level rank, so one [D][B] plane
// stands in for all K ranks.
class DpTables {
public:
    DpTables(DpConfig config, ExpertSet hints = {})
        : config_(config), hints_(std::move(hints)), hint_rewards_(hints_.size(), 0.0) {
        config_.validate();
        reward_.assign(config_.bins * config_.grid, 0.0);
    }

    const DpConfig& config() const { return config_; }
    const ExpertSet& hints() const { return hints_; }
    const std::vector<double>& hint_rewards() const { return hint_rewards_; }
    std::size_t rounds() const { return rounds_; }

    // 1-based indices, as in the recurrences.
    double reward(std::size_t d, std::size_t k, std::size_t j) const {
        if (d < 1 || d > config_.bins || k < 1 || k > config_.levels || j < 1 || j > config_.grid)
            throw std::out_of_range("DpTables::reward: index out of range");
        return reward_[(d - 1) * config_.grid + (j - 1)];
    }
    double cell(std::size_t d, std::size_t j) const { return reward_[(d - 1) * config_.grid + (j - 1)]; }

    // Credits (v - j/B) to every bid j/B >= m in the round's value bin. Bids
    // above v earn negative credit, exactly as the update rule states.
    void update(const AuctionRound& round, bool sigma_hidden = false) {
        if (!is_valid(round)) throw std::invalid_argument("dp_update_round: round fields outside [0,1]");
        const std::size_t d = value_bin(round.v, config_.bins);
        double* row = &reward_[(d - 1) * config_.grid];
        for (std::size_t j = 1; j <= config_.grid; ++j) {
            const double price = grid_price(j, config_.grid);
            if (round.m <= price) row[j - 1] += round.v - price;
        }
        RoundContext ctx = context_of(round);
        if (sigma_hidden) ctx.sigma = 0.0;
        for (std::size_t h = 0; h < hints_.size(); ++h)
            hint_rewards_[h] += hintbid::reward(hints_[h].bid(ctx), round.v, round.m);
        ++rounds_;
    }

private:
    DpConfig config_;
    ExpertSet hints_;
    std::vector<double> hint_rewards_;
    std::vector<double> reward_;
    std::size_t rounds_ = 0;
};

inline void dp_update_round(DpTables& tables, const AuctionRound& round, bool sigma_hidden = false) {
    tables.update(round, sigma_hidden);
}

// Forward/backward path sums. Each bin's plane is rescaled to max 1; the
// dropped factors are kept as logs so the partition function stays exact.
struct CutWeights {
    DpConfig config;
    double eta = 0.0;
    std::vector<double> cell_shift;     // max_j Reward[d][j], per bin
    std::vector<double> factor;         // exp(eta * (Reward[d][j] - shift_d)), [D][B]
    std::vector<double> forward;        // [D][B][K]
    std::vector<double> backward;       // [D][B][K]
    std::vector<double> forward_log;    // log scale per bin
    std::vector<double> backward_log;   // log scale per bin

    std::size_t at(std::size_t d, std::size_t k, std::size_t j) const {
        return ((d - 1) * config.grid + (j - 1)) * config.levels + (k - 1);
    }
    double e(std::size_t d, std::size_t j) const { return factor[(d - 1) * config.grid + (j - 1)]; }
};

namespace detail {

inline double normalize_plane(double* plane, std::size_t n) {
    double top = 0.0;
    for (std::size_t i = 0; i < n; ++i) top = std::max(top, plane[i]);
    if (!(top > 0.0) || !std::isfinite(top)) throw std::runtime_error("sparse-dp: degenerate path weights");
    const double inv = 1.0 / top;
    for (std::size_t i = 0; i < n; ++i) plane[i] *= inv;
    return std::log(top);
}

inline double log_sum_exp(const std::vector<double>& xs) {
    double top = -std::numeric_limits<double>::infinity();
    for (double x : xs) top = std::max(top, x);
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - top);
    return top + std::log(s);
}

}  // namespace detail

// Fills forward planes for bins [1, fwd_last] and backward planes for bins
// [bwd_first, D] into `w`, reusing its storage. Other planes keep stale values.
inline void compute_cut_weights_into(const DpTables& tables, double eta, std::size_t fwd_last,
                                     std::size_t bwd_first, CutWeights& w) {
    const DpConfig& c = tables.config();
    const std::size_t D = c.bins, K = c.levels, B = c.grid;
    w.config = c;
    w.eta = eta;
    w.cell_shift.resize(D);
    w.factor.resize(D * B);
    w.forward.resize(D * K * B);
    w.backward.resize(D * K * B);
    w.forward_log.assign(D + 2, 0.0);
    w.backward_log.assign(D + 2, 0.0);

    for (std::size_t d = 1; d <= D; ++d) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j <= B; ++j) top = std::max(top, tables.cell(d, j));
        w.cell_shift[d - 1] = top;
        for (std::size_t j = 1; j <= B; ++j)
            w.factor[(d - 1) * B + (j - 1)] = std::exp(eta * (tables.cell(d, j) - top));
    }

    // forward_log[d] is the log scale of plane d; index 0 is the empty prefix.
    std::vector<double> carry(K, 0.0);
    for (std::size_t d = 1; d <= std::min(fwd_last, D); ++d) {
        double* cur = &w.forward[w.at(d, 1, 1)];
        const double* e = &w.factor[(d - 1) * B];
        if (d == 1) {
            std::fill(cur, cur + K * B, 0.0);
            for (std::size_t j = 0; j < B; ++j) cur[j * K] = e[j];
        } else {
            const double* prev = &w.forward[w.at(d - 1, 1, 1)];
            // carry[k] = sum_{v<j} prev[v][k-1]
            std::fill(carry.begin(), carry.end(), 0.0);
            double* __restrict cy = carry.data();
            for (std::size_t j = 0; j < B; ++j) {
                const double* __restrict in = prev + j * K;
                double* __restrict out = cur + j * K;
                const double ej = e[j];
                for (std::size_t k = 0; k < K; ++k) out[k] = ej * (in[k] + cy[k]);
                for (std::size_t k = 1; k < K; ++k) cy[k] += in[k - 1];
            }
        }
        w.forward_log[d] = w.forward_log[d - 1] + detail::normalize_plane(cur, K * B);
    }

    // backward_log[d] is the log scale of plane d; index D+1 is the empty suffix.
    for (std::size_t d = D; d >= std::max<std::size_t>(bwd_first, 1); --d) {
        double* cur = &w.backward[w.at(d, 1, 1)];
        const double* e = &w.factor[(d - 1) * B];
        if (d == D) {
            for (std::size_t j = 0; j < B; ++j) std::fill(cur + j * K, cur + (j + 1) * K, e[j]);
        } else {
            const double* next = &w.backward[w.at(d + 1, 1, 1)];
            // carry[k] = sum_{v>j} next[v][k+1]
            std::fill(carry.begin(), carry.end(), 0.0);
            double* __restrict cy = carry.data();
            for (std::size_t j = B; j-- > 0;) {
                const double* __restrict in = next + j * K;
                double* __restrict out = cur + j * K;
                const double ej = e[j];
                for (std::size_t k = 0; k < K; ++k) out[k] = ej * (in[k] + cy[k]);
                for (std::size_t k = 0; k + 1 < K; ++k) cy[k] += in[k + 1];
            }
        }
        w.backward_log[d] = w.backward_log[d + 1] + detail::normalize_plane(cur, K * B);
        if (d == 1) break;
    }
}

inline CutWeights compute_cut_weights(const DpTables& tables, double eta, std::size_t fwd_last,
                                      std::size_t bwd_first) {
    CutWeights w;
    const DpConfig& c = tables.config();
    w.forward.assign(c.bins * c.levels * c.grid, 0.0);
    w.backward.assign(c.bins * c.levels * c.grid, 0.0);
    compute_cut_weights_into(tables, eta, fwd_last, bwd_first, w);
    return w;
}

inline CutWeights compute_cut_weights(const DpTables& tables, double eta) {
    return compute_cut_weights(tables, eta, tables.config().bins, 1);
}

// Unnormalized marginal mass of each bid at bin d (relative to `log_scale`).
struct CutMarginal {
    std::vector<double> mass;  // size B
    double log_scale = 0.0;    // true mass = mass * exp(log_scale)
};

inline CutMarginal cut_marginal(const CutWeights& w, std::size_t d) {
    const std::size_t D = w.config.bins, K = w.config.levels, B = w.config.grid;
    if (d < 1 || d > D) throw std::out_of_range("cut_marginal: value bin out of range");
    CutMarginal out;
    out.mass.assign(B, 0.0);
    std::vector<double> in(K * B, 0.0), ex(K * B, 0.0), carry(K, 0.0);
    if (d == 1) {
        for (std::size_t j = 0; j < B; ++j) in[j * K] = 1.0;
    } else {
        const double* prev = &w.forward[w.at(d - 1, 1, 1)];
        for (std::size_t j = 0; j < B; ++j) {
            for (std::size_t k = 0; k < K; ++k) in[j * K + k] = prev[j * K + k] + carry[k];
            for (std::size_t k = 1; k < K; ++k) carry[k] += prev[j * K + k - 1];
        }
    }
    if (d == D) {
        std::fill(ex.begin(), ex.end(), 1.0);
    } else {
        const double* next = &w.backward[w.at(d + 1, 1, 1)];
        std::fill(carry.begin(), carry.end(), 0.0);
        for (std::size_t j = B; j-- > 0;) {
            for (std::size_t k = 0; k < K; ++k) ex[j * K + k] = next[j * K + k] + carry[k];
            for (std::size_t k = 0; k + 1 < K; ++k) carry[k] += next[j * K + k + 1];
        }
    }
    for (std::size_t j = 0; j < B; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) acc += in[j * K + k] * ex[j * K + k];
        out.mass[j] = acc * w.e(d, j + 1);
    }

    double shift = 0.0;
    for (double s : w.cell_shift) shift += s;
    out.log_scale = w.forward_log[d - 1] + w.backward_log[d + 1] + w.eta * shift;
    return out;
}

// log of the step class's total exponential weight, evaluated at cut d.
inline double log_partition_at(const CutWeights& w, std::size_t d) {
    const CutMarginal cm = cut_marginal(w, d);
    double s = 0.0;
    for (double x : cm.mass) s += x;
    return std::log(s) + cm.log_scale;
}

// Sampling law over the B grid bids and the hint experts.
struct DpDistribution {
    std::vector<double> grid;  // size B: step-class mass per bid, hint mass folded in
    std::vector<double> step;  // size B: step-class mass only
    std::vector<double> hint;  // per hint expert
    std::vector<double> hint_bids;
    std::vector<std::size_t> hint_cells;
    double log_partition = 0.0;  // step class plus hints
};

inline DpDistribution distribution_from_marginal(const CutMarginal& cm, std::span<const double> hint_log_weights,
                                                 std::span<const double> hint_bids, std::size_t B) {
    DpDistribution out;
    std::vector<double> logs;
    logs.reserve(B + hint_log_weights.size());
    for (double x : cm.mass) logs.push_back(x > 0.0 ? std::log(x) + cm.log_scale : -std::numeric_limits<double>::infinity());
    for (double x : hint_log_weights) logs.push_back(x);
    const double lz = detail::log_sum_exp(logs);
    if (!std::isfinite(lz)) throw std::runtime_error("dp_action_distribution: degenerate weights");
    out.log_partition = lz;
    out.step.assign(B, 0.0);
    for (std::size_t j = 0; j < B; ++j) out.step[j] = std::exp(logs[j] - lz);
    out.grid = out.step;
    for (std::size_t h = 0; h < hint_log_weights.size(); ++h) {
        const double p = std::exp(hint_log_weights[h] - lz);
        out.hint.push_back(p);
        out.hint_bids.push_back(hint_bids[h]);
        const std::size_t cell = grid_cell(hint_bids[h], B);
        out.hint_cells.push_back(cell);
        out.grid[cell - 1] += p;
    }
    return out;
}

// Marginal law of the bid at the round's value bin. The hint experts' weight
// enters once each.
inline DpDistribution dp_action_distribution(const DpTables& tables, const RoundContext& ctx, double eta,
                                             CutWeights& workspace) {
    if (!(eta > 0.0)) throw std::invalid_argument("dp_action_distribution: eta must be > 0");
    const DpConfig& c = tables.config();
    const std::size_t d = value_bin(ctx.v, c.bins);
    compute_cut_weights_into(tables, eta, d - 1, d + 1, workspace);
    const CutMarginal cm = cut_marginal(workspace, d);
    std::vector<double> hl, hb;
    for (std::size_t h = 0; h < tables.hints().size(); ++h) {
        hl.push_back(eta * tables.hint_rewards()[h]);
        hb.push_back(tables.hints()[h].bid(ctx));
    }
    return distribution_from_marginal(cm, hl, hb, c.grid);
}

inline DpDistribution dp_action_distribution(const DpTables& tables, const RoundContext& ctx, double eta) {
    CutWeights w;
    return dp_action_distribution(tables, ctx, eta, w);
}

// ---------------------------------------------------------------------------
// Exhaustive reference: enumerate every member of the class.

inline constexpr double kBruteForceBudget = 1e5;

inline std::vector<std::vector<std::size_t>> enumerate_step_paths(const DpConfig& c) {
    c.validate();
    if (dp_class_size(c) > kBruteForceBudget)
        throw std::invalid_argument("brute_force_distribution: enumeration budget exceeded");
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(c.bins, 1);
    // Odometer over nondecreasing sequences in 1..B; keep those with <= K levels.
    while (true) {
        std::size_t distinct = 1;
        for (std::size_t d = 1; d < c.bins; ++d) distinct += cur[d] != cur[d - 1];
        if (distinct <= c.levels) out.push_back(cur);
        std::size_t pos = c.bins;
        while (pos > 0 && cur[pos - 1] == c.grid) --pos;
        if (pos == 0) break;
        const std::size_t next = cur[pos - 1] + 1;
        for (std::size_t d = pos - 1; d < c.bins; ++d) cur[d] = next;
    }
    return out;
}

inline DpDistribution brute_force_distribution(const DpConfig& c, const ExpertSet& hints,
                                               const std::vector<AuctionRound>& history,
                                               const RoundContext& query, double eta) {
    const auto paths = enumerate_step_paths(c);
    const std::size_t d = value_bin(query.v, c.bins);
    std::vector<std::vector<double>> logs_per_bid(c.grid);
    for (const auto& path : paths) {
        double r = 0.0;
        for (const auto& round : history) {
            const double price = grid_price(path[value_bin(round.v, c.bins) - 1], c.grid);
            if (round.m <= price) r += round.v - price;
        }
        logs_per_bid[path[d - 1] - 1].push_back(eta * r);
    }
    CutMarginal cm;
    cm.mass.assign(c.grid, 0.0);
    // Express each bid's mass relative to a common reference.
    double ref = -std::numeric_limits<double>::infinity();
    std::vector<double> lse(c.grid);
    for (std::size_t j = 0; j < c.grid; ++j) {
        lse[j] = detail::log_sum_exp(logs_per_bid[j]);
        ref = std::max(ref, lse[j]);
    }
    for (std::size_t j = 0; j < c.grid; ++j) cm.mass[j] = std::exp(lse[j] - ref);
    cm.log_scale = ref;

    std::vector<double> hl, hb;
    for (const auto& hexp : hints) {
        double r = 0.0;
        for (const auto& round : history) r += reward(hexp.bid(context_of(round)), round.v, round.m);
        hl.push_back(eta * r);
        hb.push_back(hexp.bid(query));
    }
    return distribution_from_marginal(cm, hl, hb, c.grid);
}

// ---------------------------------------------------------------------------
// The policy: sample from the marginal, then update the tables.

struct DpStep {
    double bid = 0.0;
    double reward = 0.0;
    double expected_reward = 0.0;
    double rate = 0.0;
    bool hint_chosen = false;
};

class DpPolicy {
public:
    // schedule: sigma_power uses L_t = sum sigma_s^(q/(q+1)), anytime uses t;
    // both with log-size K*log(B).
    DpPolicy(DpConfig config, ExpertSet hints, QNorm q, Schedule schedule, std::uint64_t seed)
        : tables_(config, std::move(hints)), q_(q), schedule_(schedule), rng_(seed) {}

    const DpTables& tables() const { return tables_; }
    double error_sum() const { return error_sum_; }

    double rate_for(const AuctionRound& round, bool sigma_hidden) {
        if (!sigma_hidden) error_sum_ += q_.sigma_power(round.sigma);
        const double log_size = tables_.config().log_class_size();
        switch (schedule_.kind) {
            case Schedule::Kind::sigma_power: return capped_rate(log_size, error_sum_);
            case Schedule::Kind::anytime:
                return capped_rate(log_size, static_cast<double>(tables_.rounds() + 1));
            case Schedule::Kind::fixed: return schedule_.rate;
            case Schedule::Kind::self_confident:
                return capped_rate(log_size, std::sqrt(static_cast<double>(tables_.rounds() + 1) *
                                                       (observed_error_ + 1.0)));
        }
        return kMaxRate;
    }

    DpStep step(const AuctionRound& round, bool sigma_hidden = false) {
        RoundContext ctx = context_of(round);
        if (sigma_hidden) ctx.sigma = 0.0;
        DpStep out;
        out.rate = rate_for(round, sigma_hidden);
        const DpDistribution dist = dp_action_distribution(tables_, ctx, out.rate, workspace_);
        const std::size_t B = tables_.config().grid;

        // Outcomes: grid bids 1..B, then hint experts.
        std::vector<double> probs(dist.step);
        probs.insert(probs.end(), dist.hint.begin(), dist.hint.end());
        const std::size_t pick = draw_index(probs, rng_.uniform());
        double expected = 0.0;
        for (std::size_t j = 1; j <= B; ++j)
            expected += dist.step[j - 1] * reward(clamp_bid(grid_price(j, B), round.v), round.v, round.m);
        for (std::size_t h = 0; h < dist.hint.size(); ++h)
            expected += dist.hint[h] * reward(dist.hint_bids[h], round.v, round.m);

        if (pick < B) {
            out.bid = clamp_bid(grid_price(pick + 1, B), round.v);
        } else {
            out.bid = dist.hint_bids[pick - B];
            out.hint_chosen = true;
        }
        out.reward = reward(out.bid, round.v, round.m);
        out.expected_reward = expected;
        tables_.update(round, sigma_hidden);
        observed_error_ += std::abs(round.h - round.m);
        return out;
    }

private:
    DpTables tables_;
    QNorm q_;
    Schedule schedule_;
    SplitMix64 rng_;
    double error_sum_ = 0.0;
    double observed_error_ = 0.0;
    CutWeights workspace_;
};

inline DpStep dp_step(DpPolicy& policy, const AuctionRound& round, bool sigma_hidden = false) {
    return policy.step(round, sigma_hidden);
}

// Stand-alone run with one interval-aware hint expert at h + sigma^(q/(q+1)).
inline Trajectory run_sparse_dp(const Stream& stream, DpConfig config, std::uint64_t seed, bool with_hint = true) {
    if (stream.empty()) throw std::invalid_argument("run_sparse_dp: empty stream");
    ExpertSet hints;
    if (with_hint) hints.push_back(Expert::sigma_power(stream.q.exponent()));
    DpPolicy policy(config, std::move(hints), stream.q,
                    stream.sigma_hidden ? Schedule::anytime() : Schedule::sigma_power(), seed);
    Trajectory traj;
    for (const auto& r : stream.rounds) {
        const DpStep st = policy.step(r, stream.sigma_hidden);
        traj.push({r.t, st.bid, st.reward, st.expected_reward});
    }
    return traj;
}

}  // namespace hintbid
