#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "experts.hpp"

namespace hintbid {

inline constexpr double kMaxRate = 0.25;
inline constexpr double kProbabilityFloor = 1e-300;

// min{1/4, sqrt(log_size / denom)}, with denom = 0 giving the cap.
inline double capped_rate(double log_size, double denom) {
    if (!(denom > 0.0)) return kMaxRate;
    return std::min(kMaxRate, std::sqrt(log_size / denom));
}

// eta = min{1/4, sqrt(log K / S)}.
inline double learning_rate(std::size_t n_experts, double sigma_power_sum) {
    if (n_experts < 2) throw std::invalid_argument("learning_rate: need at least 2 experts");
    if (sigma_power_sum < 0.0) throw std::invalid_argument("learning_rate: negative sigma-power sum");
    return capped_rate(std::log(static_cast<double>(n_experts)), sigma_power_sum);
}

// Softmax of eta * scores into `out`. The max is subtracted first, so a common
// shift that is exact in floating point leaves the output bit-identical.
inline void sample_distribution_into(std::span<const double> scores, double eta, std::span<double> out) {
    if (scores.empty()) throw std::invalid_argument("sample_distribution: empty expert set");
    if (!(eta > 0.0)) throw std::invalid_argument("sample_distribution: eta must be > 0");
    if (out.size() != scores.size()) throw std::invalid_argument("sample_distribution: size mismatch");
    double top = -std::numeric_limits<double>::infinity();
    for (double x : scores) {
        if (!std::isfinite(x)) throw std::invalid_argument("sample_distribution: non-finite score");
        top = std::max(top, x);
    }
    double total = 0.0;
    for (std::size_t a = 0; a < scores.size(); ++a) {
        out[a] = std::exp(eta * (scores[a] - top));
        total += out[a];
    }
    for (double& p : out) {
        p /= total;
        if (p < kProbabilityFloor) p = std::numeric_limits<double>::min();
    }
}

inline std::vector<double> sample_distribution(std::span<const double> scores, double eta) {
    std::vector<double> out(scores.size());
    sample_distribution_into(scores, eta, out);
    return out;
}

// Inverse-CDF draw from a probability vector.
inline std::size_t draw_index(std::span<const double> probs, double u) {
    double total = 0.0;
    for (double p : probs) total += p;
    const double target = u * total;
    double acc = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (target < acc) return a;
    }
    return probs.size() - 1;
}

struct Schedule {
    enum class Kind {
        sigma_power,  // min{1/4, sqrt(log K / sum_{s<=t} sigma_s^(q/(q+1)))}
        anytime,      // min{1/4, sqrt(log K / t)}
        fixed,        // constant rate
        // min{1/4, sqrt(log K / sqrt(t * (E + 1)))}, E = sum_{s<t} |h_s - m_s|.
        // Needs only the hint and the revealed m.
        self_confident,
    };
    Kind kind = Kind::sigma_power;
    double rate = kMaxRate;  // fixed only

    static Schedule sigma_power() { return {Kind::sigma_power, kMaxRate}; }
    static Schedule anytime() { return {Kind::anytime, kMaxRate}; }
    static Schedule self_confident() { return {Kind::self_confident, kMaxRate}; }
    static Schedule fixed(double eta) {
        if (!(eta > 0.0)) throw std::invalid_argument("Schedule::fixed: eta must be > 0");
        return {Kind::fixed, eta};
    }
    // Single-hint rate for a known total error L: min{1/4, sqrt(log T / sqrt(T L))}.
    static Schedule known_error(std::size_t horizon, double total_error) {
        const double T = static_cast<double>(horizon);
        return fixed(capped_rate(std::log(T), std::sqrt(T * std::max(total_error, 1.0))));
    }
};

struct HedgeOptions {
    Schedule schedule = Schedule::sigma_power();
    // Optimistic estimate r(b; h + c1*sigma, v) added inside the softmax.
    bool optimism = false;
    double optimism_scale = 1.0;
};

struct HedgeStep {
    double bid = 0.0;
    double reward = 0.0;
    double expected_reward = 0.0;
    std::size_t expert = 0;
    double rate = 0.0;
};

class HedgeState;
inline HedgeStep hedge_step(HedgeState& s, const ExpertSet& experts, const AuctionRound& round,
                            bool sigma_hidden = false);

class HedgeState {
public:
    HedgeState(std::size_t n_experts, QNorm q, std::uint64_t seed, HedgeOptions options = {})
        : cum_rewards_(n_experts, 0.0), q_(q), rng_(seed), options_(options),
          bids_(n_experts), scores_(n_experts), probs_(n_experts) {
        if (n_experts == 0) throw std::invalid_argument("HedgeState: empty expert set");
    }

    const std::vector<double>& cum_rewards() const { return cum_rewards_; }
    double sigma_power_sum() const { return sigma_power_sum_; }
    std::size_t rounds() const { return rounds_; }
    double observed_error() const { return observed_error_; }
    double last_rate() const { return last_rate_; }
    const std::vector<double>& last_distribution() const { return probs_; }
    const QNorm& q() const { return q_; }
    const HedgeOptions& options() const { return options_; }

private:
    friend HedgeStep hedge_step(HedgeState&, const ExpertSet&, const AuctionRound&, bool);

    std::vector<double> cum_rewards_;
    double sigma_power_sum_ = 0.0;
    double observed_error_ = 0.0;
    std::size_t rounds_ = 0;
    double last_rate_ = kMaxRate;
    QNorm q_;
    SplitMix64 rng_;
    HedgeOptions options_;
    std::vector<double> bids_, scores_, probs_;
};

// One round of exponential weights with full-information feedback. With
// sigma_hidden the round's sigma is never read.
inline HedgeStep hedge_step(HedgeState& s, const ExpertSet& experts, const AuctionRound& round,
                            bool sigma_hidden) {
    const std::size_t n = experts.size();
    if (n != s.cum_rewards_.size()) throw std::invalid_argument("hedge_step: state/expert-set size mismatch");
    if (!is_valid(round)) throw std::invalid_argument("hedge_step: round fields outside [0,1]");

    RoundContext ctx = context_of(round);
    if (sigma_hidden) ctx.sigma = 0.0;

    ++s.rounds_;
    if (!sigma_hidden) s.sigma_power_sum_ += s.q_.sigma_power(round.sigma);

    double eta = kMaxRate;
    const double log_k = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
    switch (s.options_.schedule.kind) {
        case Schedule::Kind::sigma_power: eta = capped_rate(log_k, s.sigma_power_sum_); break;
        case Schedule::Kind::anytime: eta = capped_rate(log_k, static_cast<double>(s.rounds_)); break;
        case Schedule::Kind::fixed: eta = s.options_.schedule.rate; break;
        case Schedule::Kind::self_confident:
            eta = capped_rate(log_k, std::sqrt(static_cast<double>(s.rounds_) * (s.observed_error_ + 1.0)));
            break;
    }
    s.last_rate_ = eta;

    compute_bids(experts, ctx, s.bids_);
    if (s.options_.optimism) {
        const double guess = ctx.h + (sigma_hidden ? 0.0 : s.options_.optimism_scale * round.sigma);
        for (std::size_t a = 0; a < n; ++a)
            s.scores_[a] = s.cum_rewards_[a] + reward(s.bids_[a], round.v, guess);
        sample_distribution_into(s.scores_, eta, s.probs_);
    } else {
        sample_distribution_into(s.cum_rewards_, eta, s.probs_);
    }

    HedgeStep out;
    out.rate = eta;
    out.expert = draw_index(s.probs_, s.rng_.uniform());
    out.bid = s.bids_[out.expert];

    // m is revealed: every expert is credited.
    double expected = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double r = reward(s.bids_[a], round.v, round.m);
        expected += s.probs_[a] * r;
        s.cum_rewards_[a] += r;
    }
    s.observed_error_ += std::abs(round.h - round.m);
    out.reward = reward(out.bid, round.v, round.m);
    out.expected_reward = expected;
    return out;
}

inline Trajectory run_policy(const ExpertSet& experts, const Stream& stream, QNorm q, std::uint64_t seed,
                             HedgeOptions options = {}) {
    if (stream.empty()) throw std::invalid_argument("run_policy: empty stream");
    HedgeState state(experts.size(), q, seed, options);
    Trajectory traj;
    for (const auto& r : stream.rounds) {
        const HedgeStep st = hedge_step(state, experts, r, stream.sigma_hidden);
        traj.push({r.t, st.bid, st.reward, st.expected_reward});
    }
    return traj;
}

// Base grid plus the interval-aware hint expert, rate driven by the sigma-power sum.
inline Trajectory run_alg1(const Stream& stream, std::size_t n_grid, QNorm q, std::uint64_t seed) {
    return run_policy(make_alg1_experts(n_grid, q), stream, q, seed, {Schedule::sigma_power()});
}

// Base grid plus hint offsets h + i/n. Sigma is never read. Without a known
// total error the anytime schedule is used.
inline Trajectory run_single_hint(const Stream& stream, std::size_t n_grid, std::size_t n_offsets,
                                  std::uint64_t seed, std::optional<double> known_error = std::nullopt,
                                  Schedule fallback = Schedule::anytime()) {
    Stream masked = stream;
    masked.sigma_hidden = true;
    HedgeOptions opt;
    opt.schedule = known_error ? Schedule::known_error(stream.size(), *known_error) : fallback;
    return run_policy(make_grid_and_offset_experts(n_grid, n_offsets), masked, stream.q, seed, opt);
}

}  // namespace hintbid
