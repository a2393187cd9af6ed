#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace hintbid {

enum class Branch { first = 1, second = 2 };

namespace detail {

// floor() that tolerates pow() landing a hair under an integer.
inline std::size_t robust_floor(double x) {
    return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

inline double sign_of(Branch b) { return b == Branch::first ? 1.0 : -1.0; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Two-point construction: v = 1, h = 1/2, m in {1/2, xbar}.

// delta = min{s/2, sqrt(s) / (8 sqrt(T))} with s = sigma^(q/(q+1)).
inline double two_point_delta_preset(std::size_t T, QNorm q, double sigma) {
    const double s = q.sigma_power(sigma);
    return std::min(s / 2.0, std::sqrt(s) / (8.0 * std::sqrt(static_cast<double>(T))));
}

struct TwoPointLaw {
    double xbar = 0.5;
    double p_half = 1.0;  // P(m = 1/2)
};

inline TwoPointLaw two_point_law(QNorm q, double sigma, double delta, Branch branch) {
    const double s = q.sigma_power(sigma);
    if (!(s <= 0.25)) throw std::invalid_argument("gen_two_point: sigma^(q/(q+1)) must be <= 1/4");
    if (!(delta >= 0.0) || delta > s / 2.0)
        throw std::invalid_argument("gen_two_point: delta must lie in [0, sigma^(q/(q+1))/2]");
    TwoPointLaw law;
    law.xbar = 0.5 + s / 2.0;
    law.p_half = 2.0 * (1.0 - law.xbar + detail::sign_of(branch) * delta);
    return law;
}

inline Stream gen_two_point(std::size_t T, QNorm q, double sigma, double delta, Branch branch,
                            std::uint64_t seed) {
    if (T == 0) throw std::invalid_argument("gen_two_point: T must be >= 1");
    const TwoPointLaw law = two_point_law(q, sigma, delta, branch);
    SplitMix64 rng(seed);
    Stream s;
    s.id = "two_point";
    s.q = q;
    s.rounds.reserve(T);
    for (std::size_t t = 1; t <= T; ++t) {
        const double m = rng.uniform() < law.p_half ? 0.5 : law.xbar;
        s.rounds.push_back({t, 1.0, 0.5, sigma, m});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Single-hint construction: sigma_t in {0, eps}, m = h + sigma_t, sigma hidden.

inline double single_hint_delta_preset(std::size_t T, double epsilon) {
    return std::min(epsilon, 0.25 * std::sqrt(epsilon / (2.0 * static_cast<double>(T))));
}

// P(sigma_t = 0) for the branch.
inline double single_hint_zero_probability(double epsilon, double delta, Branch branch) {
    return 1.0 - 2.0 * (epsilon - detail::sign_of(branch) * delta);
}

inline Stream gen_single_hint_lb(std::size_t T, double epsilon, double delta, Branch branch,
                                 std::uint64_t seed) {
    if (T == 0) throw std::invalid_argument("gen_single_hint_lb: T must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 0.125))
        throw std::invalid_argument("gen_single_hint_lb: epsilon must lie in (0, 1/8]");
    if (!(delta >= 0.0 && delta <= epsilon))
        throw std::invalid_argument("gen_single_hint_lb: delta must lie in [0, epsilon]");
    const double p_zero = single_hint_zero_probability(epsilon, delta, branch);
    SplitMix64 rng(seed);
    Stream s;
    s.id = "single_hint_lb";
    s.q = QNorm::infinity();
    s.sigma_hidden = true;
    s.rounds.reserve(T);
    for (std::size_t t = 1; t <= T; ++t) {
        const bool exact = rng.uniform() < p_zero;
        const double sigma = exact ? 0.0 : epsilon;
        s.rounds.push_back({t, 1.0, 0.5, sigma, 0.5 + sigma});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Block construction: N independent fixed-value subproblems.

struct BlockLayout {
    std::size_t blocks = 0;
    std::size_t length = 0;
    double sigma = 0.0;
    double sigma_power = 0.0;
};

inline BlockLayout block_layout(std::size_t T, double L, QNorm q) {
    if (T == 0) throw std::invalid_argument("gen_blocks: T must be >= 1");
    if (!(L > 0.0)) throw std::invalid_argument("gen_blocks: L must be > 0");
    const double Td = static_cast<double>(T);
    // Regime L <= sqrt(T)^((q-1)/q); the q = inf limit is sqrt(T).
    const double regime_exp = q.is_infinite() ? 1.0 : (q.value() - 1.0) / q.value();
    if (L > std::pow(std::sqrt(Td), regime_exp) * (1.0 + 1e-12))
        throw std::invalid_argument("gen_blocks: L exceeds sqrt(T)^((q-1)/q)");
    const double a = q.exponent();  // q/(q+1)
    BlockLayout out;
    out.sigma = L / Td;
    out.sigma_power = q.sigma_power(out.sigma);
    out.blocks = detail::robust_floor(std::pow(Td, 1.0 - a) * std::pow(L, a));
    out.length = detail::robust_floor(std::pow(Td / L, a));
    if (out.blocks == 0 || out.length == 0) throw std::invalid_argument("gen_blocks: degenerate layout");
    return out;
}

inline Stream gen_blocks(std::size_t T, double L, QNorm q, std::uint64_t seed,
                         std::optional<double> delta = std::nullopt, Branch branch = Branch::first) {
    const BlockLayout lay = block_layout(T, L, q);
    const double s = lay.sigma_power;
    const double d = delta.value_or(
        std::min(s / 2.0, std::sqrt(s) / (8.0 * std::sqrt(static_cast<double>(lay.length)))));
    if (!(d >= 0.0 && d <= s)) throw std::invalid_argument("gen_blocks: delta must lie in [0, s]");
    const double p_up = (s + detail::sign_of(branch) * d) / 4.0;
    SplitMix64 rng(seed);
    Stream out;
    out.id = "blocks";
    out.q = q;
    out.rounds.reserve(lay.blocks * lay.length);
    std::size_t t = 0;
    for (std::size_t i = 0; i < lay.blocks; ++i) {
        const double di = static_cast<double>(i);
        const double v = 0.5 + di / (2.0 * static_cast<double>(lay.blocks));
        const double h = 0.25 + di * s / 4.0;
        for (std::size_t k = 0; k < lay.length; ++k) {
            const double m = rng.uniform() < p_up ? 0.25 + (di + 1.0) * s / 4.0 : h;
            out.rounds.push_back({++t, v, h, lay.sigma, m});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sparse-support stochastic family.

enum class SparseMode {
    iid,             // m uniform over the supports each round
    markov,          // stay, or jump to a uniform support with probability `switch_prob`
    value_monotone,  // m is a nondecreasing step function of v
};

struct SparseParams {
    std::vector<double> supports;
    double noise = 0.0;  // sigma_t; hint error is uniform on [-noise, noise]
    SparseMode mode = SparseMode::iid;
    double switch_prob = 0.1;
};

inline Stream gen_sparse(std::size_t T, const SparseParams& p, QNorm q, std::uint64_t seed) {
    if (T == 0) throw std::invalid_argument("gen_sparse: T must be >= 1");
    if (p.supports.empty()) throw std::invalid_argument("gen_sparse: empty supports");
    for (double s : p.supports)
        if (!in_unit(s)) throw std::invalid_argument("gen_sparse: supports must lie in [0,1]");
    if (!in_unit(p.noise)) throw std::invalid_argument("gen_sparse: noise must lie in [0,1]");
    std::vector<double> sup = p.supports;
    std::sort(sup.begin(), sup.end());
    const std::size_t K = sup.size();
    const double top = sup.back();

    SplitMix64 rng(seed);
    auto pick = [&] { return std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(K)), K - 1); };
    std::size_t state = pick();

    Stream out;
    out.id = "sparse";
    out.q = q;
    out.rounds.reserve(T);
    for (std::size_t t = 1; t <= T; ++t) {
        // v in (top, 1]
        const double v = 1.0 - rng.uniform() * (1.0 - top);
        std::size_t k = 0;
        switch (p.mode) {
            case SparseMode::iid: k = pick(); break;
            case SparseMode::markov:
                if (rng.uniform() < p.switch_prob) state = pick();
                k = state;
                break;
            case SparseMode::value_monotone: {
                const double span = 1.0 - top;
                const double frac = span > 0.0 ? (v - top) / span : 1.0;
                k = std::min(static_cast<std::size_t>(frac * static_cast<double>(K)), K - 1);
                break;
            }
        }
        const double m = sup[k];
        const double noise = p.noise * (2.0 * rng.uniform() - 1.0);
        const double h = std::clamp(m + noise, 0.0, 1.0);
        out.rounds.push_back({t, v, h, p.noise, m});
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion: v,m,h,sigma per line.

struct CsvLoad {
    Stream stream;
    std::size_t dropped = 0;
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return x;
}

}  // namespace detail

inline CsvLoad parse_csv(std::istream& in, std::string id = "csv") {
    CsvLoad out;
    out.stream.id = std::move(id);
    std::string line;
    std::size_t line_no = 0;
    std::size_t t = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        const auto fields = detail::split_commas(sv);
        std::array<std::optional<double>, 4> vals;
        bool numeric = fields.size() == 4;
        if (numeric)
            for (std::size_t i = 0; i < 4; ++i) {
                vals[i] = detail::parse_real(fields[i]);
                numeric = numeric && vals[i].has_value();
            }
        if (!numeric) {
            if (first_content) {  // header row
                first_content = false;
                continue;
            }
            throw std::runtime_error("load_csv: malformed row at line " + std::to_string(line_no));
        }
        first_content = false;
        const double v = *vals[0], m = *vals[1], h = *vals[2], sigma = *vals[3];
        if (!in_unit(v) || !in_unit(m) || !in_unit(h) || !in_unit(sigma) || !(v > m)) {
            ++out.dropped;
            continue;
        }
        out.stream.rounds.push_back({++t, v, h, sigma, m});
    }
    if (out.stream.rounds.empty()) throw std::runtime_error("load_csv: no valid rows");
    return out;
}

inline CsvLoad load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    return parse_csv(in, path);
}

inline void write_stream_csv(std::ostream& out, const Stream& s, bool header = true) {
    if (header) out << "v,m,h,sigma\n";
    char buf[128];
    for (const auto& r : s.rounds) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.v, r.m, r.h, r.sigma);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Hint-accuracy check: E|h - m|^q <= sigma^q.

inline constexpr double kMomentSlack = 1.05;

struct MomentReport {
    QNorm q;
    std::size_t rounds = 0;
    double mean_error_power = 0.0;  // mean |h - m|^q (max |h - m| for q = inf)
    double mean_sigma_power = 0.0;  // mean sigma^q (max sigma for q = inf)
    std::vector<std::size_t> flagged_rounds;  // rounds with |h - m| > sigma
    bool pass = false;
};

inline MomentReport check_moment(const Stream& s, QNorm q) {
    MomentReport rep;
    rep.q = q;
    rep.rounds = s.size();
    for (const auto& r : s.rounds) {
        const double err = std::abs(r.h - r.m);
        if (err > r.sigma + 1e-12) rep.flagged_rounds.push_back(r.t);
        if (q.is_infinite()) {
            rep.mean_error_power = std::max(rep.mean_error_power, err);
            rep.mean_sigma_power = std::max(rep.mean_sigma_power, r.sigma);
        } else {
            rep.mean_error_power += std::pow(err, q.value());
            rep.mean_sigma_power += std::pow(r.sigma, q.value());
        }
    }
    if (q.is_infinite()) {
        rep.pass = rep.flagged_rounds.empty();
    } else {
        if (!s.empty()) {
            rep.mean_error_power /= static_cast<double>(s.size());
            rep.mean_sigma_power /= static_cast<double>(s.size());
        }
        rep.pass = rep.mean_error_power <= rep.mean_sigma_power * kMomentSlack;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Declarative stream description.

enum class Family { two_point, single_hint_lb, blocks, sparse, csv };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::two_point: return "two_point";
        case Family::single_hint_lb: return "single_hint_lb";
        case Family::blocks: return "blocks";
        case Family::sparse: return "sparse";
        case Family::csv: return "csv";
    }
    return "?";
}

inline Family family_from_string(const std::string& s) {
    if (s == "two_point") return Family::two_point;
    if (s == "single_hint_lb") return Family::single_hint_lb;
    if (s == "blocks") return Family::blocks;
    if (s == "sparse") return Family::sparse;
    if (s == "csv") return Family::csv;
    throw std::invalid_argument("unknown stream family '" + s + "'");
}

struct StreamSpec {
    std::string id = "stream";
    Family family = Family::two_point;
    std::size_t T = 1000;
    QNorm q;
    double sigma = 0.0;               // two_point
    std::optional<double> delta;      // two_point, single_hint_lb, blocks; preset when empty
    Branch branch = Branch::first;
    double epsilon = 0.1;             // single_hint_lb
    double L = 1.0;                   // blocks
    SparseParams sparse;              // sparse
    std::string path;                 // csv
    std::uint64_t seed = 0;
};

inline Stream generate(const StreamSpec& spec, std::uint64_t seed) {
    Stream s;
    switch (spec.family) {
        case Family::two_point:
            s = gen_two_point(spec.T, spec.q, spec.sigma,
                              spec.delta.value_or(two_point_delta_preset(spec.T, spec.q, spec.sigma)),
                              spec.branch, seed);
            break;
        case Family::single_hint_lb:
            s = gen_single_hint_lb(spec.T, spec.epsilon,
                                   spec.delta.value_or(single_hint_delta_preset(spec.T, spec.epsilon)),
                                   spec.branch, seed);
            break;
        case Family::blocks: s = gen_blocks(spec.T, spec.L, spec.q, seed, spec.delta, spec.branch); break;
        case Family::sparse: s = gen_sparse(spec.T, spec.sparse, spec.q, seed); break;
        case Family::csv: s = load_csv(spec.path).stream; s.q = spec.q; break;
    }
    s.id = spec.id;
    return s;
}

inline Stream generate(const StreamSpec& spec) { return generate(spec, spec.seed); }

// Monte-Carlo moment check of a generative family: independent replications
// of the stream description are concatenated until n_samples rounds are collected.
inline MomentReport check_moment(const StreamSpec& spec, std::size_t n_samples) {
    if (spec.family == Family::csv) return check_moment(generate(spec), spec.q);
    Stream pooled;
    pooled.q = spec.q;
    pooled.rounds.reserve(n_samples);
    for (std::uint64_t rep = 0; pooled.size() < n_samples; ++rep) {
        const Stream s = generate(spec, mix_seed(spec.seed, rep));
        for (const auto& r : s.rounds) {
            if (pooled.size() == n_samples) break;
            pooled.rounds.push_back(r);
        }
    }
    return check_moment(pooled, spec.q);
}

}  // namespace hintbid
