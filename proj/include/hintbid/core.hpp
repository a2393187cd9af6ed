#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintbid {

// One round of a repeated first-price auction. m is revealed only after the
// bid is placed.
struct AuctionRound {
    std::size_t t = 1;   // 1-based
    double v = 0.0;      // private value
    double h = 0.0;      // hint (point estimate of m)
    double sigma = 0.0;  // hint accuracy
    double m = 0.0;      // minimum bid to win
};

inline bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

inline bool is_valid(const AuctionRound& r) {
    return in_unit(r.v) && in_unit(r.h) && in_unit(r.sigma) && in_unit(r.m);
}

// Accuracy order q in [1, inf]. The hint error satisfies E|h - m|^q <= sigma^q.
class QNorm {
public:
    constexpr QNorm() = default;
    explicit QNorm(double q) : q_(q) {
        if (!(q >= 1.0)) throw std::invalid_argument("QNorm: q must be >= 1");
    }
    static constexpr QNorm infinity() {
        QNorm n;
        n.q_ = std::numeric_limits<double>::infinity();
        return n;
    }

    bool is_infinite() const { return std::isinf(q_); }
    double value() const { return q_; }

    // q/(q+1), with the q = inf limit pinned to exactly 1.
    double exponent() const { return is_infinite() ? 1.0 : q_ / (q_ + 1.0); }

    // sigma^(q/(q+1)), the offset hint experts add and the schedule consumes.
    double sigma_power(double sigma) const {
        if (sigma <= 0.0) return 0.0;
        return is_infinite() ? sigma : std::pow(sigma, exponent());
    }

    std::string to_string() const { return is_infinite() ? "inf" : std::to_string(q_); }

    friend bool operator==(const QNorm&, const QNorm&) = default;

private:
    double q_ = 1.0;
};

// Instantaneous first-price reward (v - b) * 1{b >= m}. Ties win.
constexpr double reward(double b, double v, double m) { return b >= m ? v - b : 0.0; }

// Feasible bids live in [0, v].
constexpr double clamp_bid(double raw, double v) { return std::min(std::max(raw, 0.0), v); }

// Strong type for a feasible bid.
class Bid {
public:
    Bid(double b, double v) : b_(b) {
        if (!(b >= 0.0 && b <= v)) throw std::invalid_argument("Bid: outside [0, v]");
    }
    static Bid clamped(double raw, double v) { return Bid(clamp_bid(raw, v), v); }
    double value() const { return b_; }

private:
    double b_;
};

// Value bin in 1..D: min(ceil(v*D), D), with v = 0 mapped to bin 1.
inline std::size_t value_bin(double v, std::size_t bins) {
    auto i = static_cast<std::size_t>(std::ceil(v * static_cast<double>(bins)));
    return std::clamp<std::size_t>(i, 1, bins);
}

// Grid cell in 1..B of a price x: the smallest j with j/B >= x (same clamp as value_bin).
inline std::size_t grid_cell(double x, std::size_t grid) {
    return value_bin(x, grid);
}

inline double grid_price(std::size_t j, std::size_t grid) {
    return static_cast<double>(j) / static_cast<double>(grid);
}

struct RoundRecord {
    std::size_t t = 0;
    double bid = 0.0;
    double reward = 0.0;
    // Reward averaged over the policy's own randomization at this round.
    double expected_reward = 0.0;
};

class Trajectory {
public:
    void push(const RoundRecord& r) {
        records_.push_back(r);
        cumulative_ += r.reward;
        expected_cumulative_ += r.expected_reward;
    }
    void append(const Trajectory& other) {
        for (const auto& r : other.records_) push(r);
    }

    const std::vector<RoundRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    double cumulative_reward() const { return cumulative_; }
    double expected_cumulative_reward() const { return expected_cumulative_; }

    std::vector<double> rewards() const {
        std::vector<double> out(records_.size());
        std::transform(records_.begin(), records_.end(), out.begin(),
                       [](const RoundRecord& r) { return r.reward; });
        return out;
    }
    std::vector<double> expected_rewards() const {
        std::vector<double> out(records_.size());
        std::transform(records_.begin(), records_.end(), out.begin(),
                       [](const RoundRecord& r) { return r.expected_reward; });
        return out;
    }

private:
    std::vector<RoundRecord> records_;
    double cumulative_ = 0.0;
    double expected_cumulative_ = 0.0;
};

// A sequence of rounds. When sigma_hidden is set, learners only see h (single
// hint mode); evaluators still read sigma.
struct Stream {
    std::string id = "stream";
    std::vector<AuctionRound> rounds;
    bool sigma_hidden = false;
    QNorm q;

    std::size_t size() const { return rounds.size(); }
    bool empty() const { return rounds.empty(); }
};

// Deterministic 64-bit generator (splitmix64). Used wherever reproducibility
// across platforms matters more than statistical pedigree.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // Uniform in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (b * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    g();
    return g();
}

}  // namespace hintbid
