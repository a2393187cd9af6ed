#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"

namespace hintbid {

// What an expert sees before bidding.
struct RoundContext {
    double v = 0.0;
    double h = 0.0;
    double sigma = 0.0;
};

inline RoundContext context_of(const AuctionRound& r) { return {r.v, r.h, r.sigma}; }

// A deterministic bid rule. Raw bids are clamped into [0, v].
struct Expert {
    enum class Kind {
        constant,     // bids `param`
        hint_offset,  // bids h + param
        sigma_power,  // bids h + sigma^param
        step,         // bids levels[bin(v)]
    };

    Kind kind = Kind::constant;
    double param = 0.0;
    std::vector<double> levels;  // step only, one bid level per value bin

    double raw_bid(const RoundContext& c) const {
        switch (kind) {
            case Kind::constant: return param;
            case Kind::hint_offset: return c.h + param;
            case Kind::sigma_power:
                return c.h + (c.sigma > 0.0 ? std::pow(c.sigma, param) : 0.0);
            case Kind::step: return levels[value_bin(c.v, levels.size()) - 1];
        }
        return 0.0;
    }
    double bid(const RoundContext& c) const { return clamp_bid(raw_bid(c), c.v); }

    bool uses_hint() const { return kind == Kind::hint_offset || kind == Kind::sigma_power; }

    std::string id() const {
        switch (kind) {
            case Kind::constant: return "const:" + std::to_string(param);
            case Kind::hint_offset: return "hint+" + std::to_string(param);
            case Kind::sigma_power: return "hint+sigma^" + std::to_string(param);
            case Kind::step: {
                std::string s = "step:";
                for (std::size_t i = 0; i < levels.size(); ++i) {
                    if (i) s += ',';
                    s += std::to_string(levels[i]);
                }
                return s;
            }
        }
        return {};
    }

    static Expert constant(double b) { return {Kind::constant, b, {}}; }
    static Expert hint_offset(double offset) { return {Kind::hint_offset, offset, {}}; }
    static Expert sigma_power(double exponent) { return {Kind::sigma_power, exponent, {}}; }
    static Expert step(std::vector<double> levels) { return {Kind::step, 0.0, std::move(levels)}; }
};

using ExpertSet = std::vector<Expert>;

inline void compute_bids(const ExpertSet& experts, const RoundContext& c, std::span<double> out) {
    if (out.size() != experts.size()) throw std::invalid_argument("compute_bids: size mismatch");
    for (std::size_t a = 0; a < experts.size(); ++a) out[a] = experts[a].bid(c);
}

// Base grid i/n for i = 1..n plus one hint expert at h + sigma^(q/(q+1)).
inline ExpertSet make_alg1_experts(std::size_t n_grid, QNorm q) {
    if (n_grid == 0) throw std::invalid_argument("make_alg1_experts: n_grid must be >= 1");
    ExpertSet out;
    out.reserve(n_grid + 1);
    for (std::size_t i = 1; i <= n_grid; ++i) out.push_back(Expert::constant(grid_price(i, n_grid)));
    out.push_back(Expert::sigma_power(q.exponent()));
    return out;
}

// Offsets h + i/n for i = 0..n-1.
inline ExpertSet make_single_hint_experts(std::size_t n) {
    if (n == 0) throw std::invalid_argument("make_single_hint_experts: n must be >= 1");
    ExpertSet out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(Expert::hint_offset(grid_price(i, n)));
    return out;
}

inline ExpertSet make_sigma_power_experts(std::span<const double> deltas) {
    if (deltas.empty()) throw std::invalid_argument("make_sigma_power_experts: empty exponent list");
    ExpertSet out;
    for (double d : deltas) {
        if (!(d > 0.0)) throw std::invalid_argument("make_sigma_power_experts: exponents must be > 0");
        out.push_back(Expert::sigma_power(d));
    }
    return out;
}

// n_grid constants plus n_offsets hint offsets, for hint-only (sigma hidden) runs.
inline ExpertSet make_grid_and_offset_experts(std::size_t n_grid, std::size_t n_offsets) {
    if (n_grid == 0) throw std::invalid_argument("make_grid_and_offset_experts: n_grid must be >= 1");
    ExpertSet out;
    out.reserve(n_grid + n_offsets);
    for (std::size_t i = 1; i <= n_grid; ++i) out.push_back(Expert::constant(grid_price(i, n_grid)));
    auto hints = make_single_hint_experts(n_offsets);
    out.insert(out.end(), hints.begin(), hints.end());
    return out;
}

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

// All nondecreasing maps from value bins to a fixed ladder of support levels.
class SparseExpertSet {
public:
    SparseExpertSet(std::vector<double> supports, std::size_t value_bins)
        : supports_(std::move(supports)), bins_(value_bins) {
        if (supports_.empty()) throw std::invalid_argument("SparseExpertSet: no supports");
        if (bins_ == 0) throw std::invalid_argument("SparseExpertSet: value_bins must be >= 1");
        for (std::size_t k = 1; k < supports_.size(); ++k)
            if (!(supports_[k - 1] < supports_[k]))
                throw std::invalid_argument("SparseExpertSet: supports must be strictly increasing");
        enumerate();
    }

    const std::vector<double>& supports() const { return supports_; }
    std::size_t value_bins() const { return bins_; }
    std::size_t size() const { return ranks_.size(); }

    // Support rank (0-based) per bin for member i.
    const std::vector<std::size_t>& ranks(std::size_t i) const { return ranks_[i]; }

    std::vector<double> levels(std::size_t i) const {
        std::vector<double> out(bins_);
        for (std::size_t d = 0; d < bins_; ++d) out[d] = supports_[ranks_[i][d]];
        return out;
    }

    ExpertSet experts() const {
        ExpertSet out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.push_back(Expert::step(levels(i)));
        return out;
    }

    // C(D + K - 1, K - 1)
    static double closed_form_count(std::size_t bins, std::size_t k) {
        return binomial(bins + k - 1, k - 1);
    }

private:
    void enumerate() {
        std::vector<std::size_t> cur(bins_, 0);
        const std::size_t K = supports_.size();
        // Odometer over nondecreasing sequences.
        while (true) {
            ranks_.push_back(cur);
            std::size_t pos = bins_;
            while (pos > 0 && cur[pos - 1] == K - 1) --pos;
            if (pos == 0) break;
            const std::size_t next = cur[pos - 1] + 1;
            for (std::size_t d = pos - 1; d < bins_; ++d) cur[d] = next;
        }
    }

    std::vector<double> supports_;
    std::size_t bins_;
    std::vector<std::vector<std::size_t>> ranks_;
};

inline SparseExpertSet enumerate_sparse_experts(std::vector<double> supports, std::size_t value_bins) {
    return SparseExpertSet(std::move(supports), value_bins);
}

}  // namespace hintbid
