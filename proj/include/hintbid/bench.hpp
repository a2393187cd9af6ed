#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "environments.hpp"
#include "experts.hpp"
#include "hedge.hpp"
#include "meta.hpp"
#include "regret.hpp"
#include "sparse_dp.hpp"

namespace hintbid {

// ---------------------------------------------------------------------------
// Binned replay: an independent hedge per (value bin, hint bin) cell, with the
// optimistic estimate r(b; h + c1*sigma, v) inside the softmax.

struct BinnedParams {
    std::size_t value_bins = 10;  // M1
    std::size_t hint_bins = 4;    // M2
    double c1 = 1.0;
    std::size_t n_grid = 100;
    std::vector<double> deltas;   // sigma-power exponents; empty means {q/(q+1)}
};

inline std::uint64_t bin_seed(std::uint64_t seed, std::size_t bin) {
    return seed + static_cast<std::uint64_t>(bin) * 0x9E3779B97F4A7C15ULL;
}

inline ExpertSet binned_experts(const BinnedParams& p, QNorm q) {
    ExpertSet experts;
    for (std::size_t i = 1; i <= p.n_grid; ++i) experts.push_back(Expert::constant(grid_price(i, p.n_grid)));
    std::vector<double> deltas = p.deltas;
    if (deltas.empty()) deltas.push_back(q.exponent());
    auto hints = make_sigma_power_experts(deltas);
    experts.insert(experts.end(), hints.begin(), hints.end());
    return experts;
}

inline Trajectory binned_replay(const Stream& stream, const BinnedParams& p, std::uint64_t seed) {
    if (p.value_bins == 0 || p.hint_bins == 0) throw std::invalid_argument("binned_replay: M1 and M2 must be >= 1");
    if (p.n_grid == 0) throw std::invalid_argument("binned_replay: n_grid must be >= 1");
    if (stream.empty()) throw std::invalid_argument("binned_replay: empty stream");
    const ExpertSet experts = binned_experts(p, stream.q);
    HedgeOptions opt;
    opt.schedule = stream.sigma_hidden ? Schedule::anytime() : Schedule::sigma_power();
    opt.optimism = true;
    opt.optimism_scale = p.c1;
    std::vector<std::optional<HedgeState>> cells(p.value_bins * p.hint_bins);
    Trajectory traj;
    for (const auto& r : stream.rounds) {
        const std::size_t b = (value_bin(r.v, p.value_bins) - 1) * p.hint_bins + (value_bin(r.h, p.hint_bins) - 1);
        if (!cells[b]) cells[b].emplace(experts.size(), stream.q, bin_seed(seed, b), opt);
        const HedgeStep st = hedge_step(*cells[b], experts, r, stream.sigma_hidden);
        traj.push({r.t, st.bid, st.reward, st.expected_reward});
    }
    return traj;
}

inline Trajectory run_bid_hint_only(const Stream& stream) {
    Trajectory traj;
    for (const auto& r : stream.rounds) {
        const double b = clamp_bid(r.h, r.v);
        const double x = reward(b, r.v, r.m);
        traj.push({r.t, b, x, x});
    }
    return traj;
}

inline Trajectory run_no_hint(const Stream& stream, const DpConfig& config, std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("run_no_hint: empty stream");
    DpPolicy node = make_no_hint_node(config, stream.q, seed);
    Trajectory traj;
    for (const auto& r : stream.rounds) {
        const DpStep st = no_hint_node_step(node, r);
        traj.push({r.t, st.bid, st.reward, st.expected_reward});
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Configuration.

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class AlgorithmKind { alg1, single_hint, sparse_dp, meta, doubling_meta, no_hint, bid_hint_only, binned };

inline std::string to_string(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::alg1: return "alg1";
        case AlgorithmKind::single_hint: return "single_hint";
        case AlgorithmKind::sparse_dp: return "sparse_dp";
        case AlgorithmKind::meta: return "meta";
        case AlgorithmKind::doubling_meta: return "doubling_meta";
        case AlgorithmKind::no_hint: return "no_hint";
        case AlgorithmKind::bid_hint_only: return "bid_hint_only";
        case AlgorithmKind::binned: return "binned";
    }
    return "?";
}

inline std::optional<AlgorithmKind> algorithm_from_string(const std::string& s) {
    for (auto k : {AlgorithmKind::alg1, AlgorithmKind::single_hint, AlgorithmKind::sparse_dp, AlgorithmKind::meta,
                   AlgorithmKind::doubling_meta, AlgorithmKind::no_hint, AlgorithmKind::bid_hint_only,
                   AlgorithmKind::binned})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct AlgorithmSpec {
    std::string label;
    AlgorithmKind kind = AlgorithmKind::alg1;
    std::optional<std::size_t> n_grid;  // empty: the stream length T
    std::size_t n_offsets = 100;
    std::optional<double> known_error;
    std::size_t bins = 100;
    std::optional<std::size_t> levels;  // empty: the stream's support count, else 2
    std::size_t grid = 100;
    bool hint = true;
    HintMode mode = HintMode::interval;
    BinnedParams binned;
};

enum class OracleKind { automatic, constant, lipschitz, sparse };

struct OracleSpec {
    OracleKind kind = OracleKind::automatic;
    std::size_t bins = 100;
    std::optional<std::size_t> grid;  // empty: max(1000, T)
    std::vector<double> supports;     // sparse; empty: the stream's supports
};

struct SweepSpec {
    std::string axis;  // T | L | q | K | sigma | epsilon
    std::vector<double> values;
};

struct ExperimentConfig {
    std::vector<StreamSpec> streams;
    std::vector<AlgorithmSpec> algorithms;
    std::vector<std::uint64_t> seeds;
    std::uint64_t base_seed = 0;
    OracleSpec oracle;
    RewardBasis basis = RewardBasis::realized;
    std::optional<SweepSpec> sweep;
    bool trajectories = false;
    std::string output = "results";
};

namespace detail {

using nlohmann::json;

inline const json* field(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double get_number(const json& j, const std::string& key, const std::string& path, double fallback) {
    const json* f = field(j, key);
    if (!f) return fallback;
    if (!f->is_number()) throw ConfigError(path + "." + key, "expected a number");
    return f->get<double>();
}

inline std::optional<double> get_optional_number(const json& j, const std::string& key, const std::string& path) {
    const json* f = field(j, key);
    if (!f || f->is_null()) return std::nullopt;
    if (!f->is_number()) throw ConfigError(path + "." + key, "expected a number");
    return f->get<double>();
}

inline std::size_t get_count(const json& j, const std::string& key, const std::string& path, std::size_t fallback,
                             std::size_t min_value = 1) {
    const json* f = field(j, key);
    if (!f) return fallback;
    if (!f->is_number_integer() || f->get<long long>() < static_cast<long long>(min_value))
        throw ConfigError(path + "." + key, "expected an integer >= " + std::to_string(min_value));
    return f->get<std::size_t>();
}

inline std::string get_string(const json& j, const std::string& key, const std::string& path,
                              const std::string& fallback) {
    const json* f = field(j, key);
    if (!f) return fallback;
    if (!f->is_string()) throw ConfigError(path + "." + key, "expected a string");
    return f->get<std::string>();
}

inline bool get_bool(const json& j, const std::string& key, const std::string& path, bool fallback) {
    const json* f = field(j, key);
    if (!f) return fallback;
    if (!f->is_boolean()) throw ConfigError(path + "." + key, "expected true or false");
    return f->get<bool>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& path) {
    const json* f = field(j, key);
    if (!f) return {};
    if (!f->is_array()) throw ConfigError(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < f->size(); ++i) {
        if (!(*f)[i].is_number()) throw ConfigError(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*f)[i].get<double>());
    }
    return out;
}

inline QNorm get_q(const json& j, const std::string& key, const std::string& path, QNorm fallback) {
    const json* f = field(j, key);
    if (!f) return fallback;
    if (f->is_string() && (f->get<std::string>() == "inf" || f->get<std::string>() == "infinity"))
        return QNorm::infinity();
    if (!f->is_number() || f->get<double>() < 1.0) throw ConfigError(path + "." + key, "expected a number >= 1 or \"inf\"");
    return QNorm(f->get<double>());
}

inline StreamSpec parse_stream(const json& j, const std::string& path, std::size_t index) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    StreamSpec s;
    s.id = get_string(j, "id", path, "s" + std::to_string(index));
    const std::string fam = get_string(j, "family", path, "");
    if (fam.empty()) throw ConfigError(path + ".family", "required");
    try {
        s.family = family_from_string(fam);
    } catch (const std::exception&) {
        throw ConfigError(path + ".family", "unknown family '" + fam + "'");
    }
    s.T = get_count(j, "T", path, 1000);
    s.q = get_q(j, "q", path, s.family == Family::single_hint_lb ? QNorm::infinity() : QNorm(1.0));
    s.sigma = get_number(j, "sigma", path, 0.0);
    s.delta = get_optional_number(j, "delta", path);
    const std::size_t br = get_count(j, "branch", path, 1);
    if (br != 1 && br != 2) throw ConfigError(path + ".branch", "expected 1 or 2");
    s.branch = br == 1 ? Branch::first : Branch::second;
    s.epsilon = get_number(j, "epsilon", path, 0.1);
    s.L = get_number(j, "L", path, 1.0);
    s.sparse.supports = get_numbers(j, "supports", path);
    s.sparse.noise = get_number(j, "noise", path, 0.0);
    const std::string mode = get_string(j, "mode", path, "iid");
    if (mode == "iid") s.sparse.mode = SparseMode::iid;
    else if (mode == "markov") s.sparse.mode = SparseMode::markov;
    else if (mode == "value_monotone") s.sparse.mode = SparseMode::value_monotone;
    else throw ConfigError(path + ".mode", "expected iid, markov or value_monotone");
    s.sparse.switch_prob = get_number(j, "switch_prob", path, 0.1);
    s.path = get_string(j, "path", path, "");
    if (s.family == Family::sparse && s.sparse.supports.empty()) throw ConfigError(path + ".supports", "required for sparse");
    if (s.family == Family::csv && s.path.empty()) throw ConfigError(path + ".path", "required for csv");
    s.seed = static_cast<std::uint64_t>(get_count(j, "seed", path, 0, 0));
    return s;
}

inline AlgorithmSpec parse_algorithm(const json& j, const std::string& path) {
    AlgorithmSpec a;
    std::string name;
    if (j.is_string()) {
        name = j.get<std::string>();
    } else if (j.is_object()) {
        name = get_string(j, "name", path, "");
    } else {
        throw ConfigError(path, "expected a name or an object");
    }
    const auto kind = algorithm_from_string(name);
    if (!kind) throw ConfigError(path + ".name", "unknown algorithm '" + name + "'");
    a.kind = *kind;
    a.label = name;
    if (!j.is_object()) return a;
    a.label = get_string(j, "label", path, name);
    if (field(j, "n_grid")) a.n_grid = get_count(j, "n_grid", path, 1);
    a.n_offsets = get_count(j, "n_offsets", path, a.n_offsets);
    a.known_error = get_optional_number(j, "known_error", path);
    a.bins = get_count(j, "bins", path, a.bins);
    if (field(j, "levels")) a.levels = get_count(j, "levels", path, 2);
    a.grid = get_count(j, "grid", path, a.grid);
    a.hint = get_bool(j, "hint", path, true);
    const std::string mode = get_string(j, "mode", path, "interval");
    if (mode == "interval") a.mode = HintMode::interval;
    else if (mode == "single") a.mode = HintMode::single;
    else throw ConfigError(path + ".mode", "expected interval or single");
    a.binned.value_bins = get_count(j, "value_bins", path, a.binned.value_bins);
    a.binned.hint_bins = get_count(j, "hint_bins", path, a.binned.hint_bins);
    a.binned.c1 = get_number(j, "c1", path, a.binned.c1);
    a.binned.deltas = get_numbers(j, "deltas", path);
    for (std::size_t i = 0; i < a.binned.deltas.size(); ++i)
        if (!(a.binned.deltas[i] > 0.0))
            throw ConfigError(path + ".deltas[" + std::to_string(i) + "]", "exponents must be > 0");
    return a;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("$", "expected an object");
    ExperimentConfig c;
    const auto* streams = detail::field(j, "streams");
    if (!streams || !streams->is_array() || streams->empty()) throw ConfigError("$.streams", "expected a nonempty array");
    for (std::size_t i = 0; i < streams->size(); ++i)
        c.streams.push_back(detail::parse_stream((*streams)[i], "$.streams[" + std::to_string(i) + "]", i));

    const auto* algs = detail::field(j, "algorithms");
    if (!algs || !algs->is_array() || algs->empty()) throw ConfigError("$.algorithms", "expected a nonempty array");
    for (std::size_t i = 0; i < algs->size(); ++i)
        c.algorithms.push_back(detail::parse_algorithm((*algs)[i], "$.algorithms[" + std::to_string(i) + "]"));

    const auto* seeds = detail::field(j, "seeds");
    if (!seeds) {
        c.seeds = {0};
    } else if (seeds->is_array()) {
        for (std::size_t i = 0; i < seeds->size(); ++i) {
            if (!(*seeds)[i].is_number_integer() || (*seeds)[i].get<long long>() < 0)
                throw ConfigError("$.seeds[" + std::to_string(i) + "]", "expected a nonnegative integer");
            c.seeds.push_back((*seeds)[i].get<std::uint64_t>());
        }
    } else if (seeds->is_number_integer() && seeds->get<long long>() >= 0) {
        for (std::uint64_t s = 0; s < seeds->get<std::uint64_t>(); ++s) c.seeds.push_back(s);
    } else {
        throw ConfigError("$.seeds", "expected an array of seeds or a count");
    }
    if (c.seeds.empty()) throw ConfigError("$.seeds", "must be nonempty");
    c.base_seed = detail::get_count(j, "base_seed", "$", 0, 0);

    if (const auto* o = detail::field(j, "oracle")) {
        if (!o->is_object()) throw ConfigError("$.oracle", "expected an object");
        const std::string kind = detail::get_string(*o, "kind", "$.oracle", "auto");
        if (kind == "auto") c.oracle.kind = OracleKind::automatic;
        else if (kind == "constant") c.oracle.kind = OracleKind::constant;
        else if (kind == "lipschitz") c.oracle.kind = OracleKind::lipschitz;
        else if (kind == "sparse") c.oracle.kind = OracleKind::sparse;
        else throw ConfigError("$.oracle.kind", "expected auto, constant, lipschitz or sparse");
        c.oracle.bins = detail::get_count(*o, "bins", "$.oracle", c.oracle.bins);
        if (detail::field(*o, "grid")) c.oracle.grid = detail::get_count(*o, "grid", "$.oracle", 1000);
        c.oracle.supports = detail::get_numbers(*o, "supports", "$.oracle");
    }
    const std::string basis = detail::get_string(j, "basis", "$", "realized");
    if (basis == "realized") c.basis = RewardBasis::realized;
    else if (basis == "expected") c.basis = RewardBasis::expected;
    else throw ConfigError("$.basis", "expected realized or expected");

    if (const auto* sw = detail::field(j, "sweep")) {
        if (!sw->is_object()) throw ConfigError("$.sweep", "expected an object");
        SweepSpec s;
        s.axis = detail::get_string(*sw, "axis", "$.sweep", "");
        static const std::vector<std::string> axes = {"T", "L", "q", "K", "sigma", "epsilon"};
        if (std::find(axes.begin(), axes.end(), s.axis) == axes.end())
            throw ConfigError("$.sweep.axis", "expected one of T, L, q, K, sigma, epsilon");
        s.values = detail::get_numbers(*sw, "values", "$.sweep");
        if (s.values.empty()) throw ConfigError("$.sweep.values", "must be nonempty");
        for (std::size_t i = 0; i < s.values.size(); ++i)
            if (!(s.values[i] > 0.0)) throw ConfigError("$.sweep.values[" + std::to_string(i) + "]", "must be > 0");
        c.sweep = s;
    }
    c.trajectories = detail::get_bool(j, "trajectories", "$", false);
    c.output = detail::get_string(j, "output", "$", "results");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path, std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Sweeps.

// Evenly spaced supports in [0.1, 0.7], snapped to a 1/100 grid.
inline std::vector<double> spaced_supports(std::size_t K) {
    std::vector<double> out;
    for (std::size_t k = 0; k < K; ++k) {
        const double x = K == 1 ? 0.4 : 0.1 + 0.6 * static_cast<double>(k) / static_cast<double>(K - 1);
        out.push_back(std::round(x * 100.0) / 100.0);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline StreamSpec apply_axis(StreamSpec s, const std::string& axis, double value) {
    const double T = static_cast<double>(s.T);
    if (axis == "T") {
        s.T = static_cast<std::size_t>(std::llround(value));
    } else if (axis == "q") {
        s.q = std::isinf(value) ? QNorm::infinity() : QNorm(value);
    } else if (axis == "sigma") {
        s.sigma = value;
        s.sparse.noise = value;
    } else if (axis == "epsilon") {
        s.epsilon = value;
    } else if (axis == "K") {
        s.sparse.supports = spaced_supports(static_cast<std::size_t>(std::llround(value)));
    } else if (axis == "L") {
        // Total hint error L = sum sigma_t.
        switch (s.family) {
            case Family::two_point: s.sigma = value / T; break;
            case Family::single_hint_lb: s.epsilon = std::sqrt(value / (2.0 * T)); break;
            case Family::blocks: s.L = value; break;
            case Family::sparse: s.sparse.noise = value / T; break;
            case Family::csv: throw ConfigError("$.sweep.axis", "L cannot be swept on a csv stream");
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Running.

inline std::size_t resolve_levels(const AlgorithmSpec& a, const StreamSpec& s) {
    if (a.levels) return *a.levels;
    if (s.family == Family::sparse) return std::max<std::size_t>(s.sparse.supports.size(), 1);
    return 2;
}

inline Trajectory run_algorithm(const AlgorithmSpec& a, const StreamSpec& spec, const Stream& stream,
                                std::uint64_t seed) {
    const DpConfig dp{a.bins, resolve_levels(a, spec), a.grid};
    const std::size_t n_grid = a.n_grid.value_or(stream.size());
    switch (a.kind) {
        case AlgorithmKind::alg1: {
            if (stream.sigma_hidden) {
                Stream vis = stream;
                vis.sigma_hidden = false;
                return run_alg1(vis, n_grid, stream.q, seed);
            }
            return run_alg1(stream, n_grid, stream.q, seed);
        }
        case AlgorithmKind::single_hint: return run_single_hint(stream, n_grid, a.n_offsets, seed, a.known_error);
        case AlgorithmKind::sparse_dp: return run_sparse_dp(stream, dp, seed, a.hint);
        case AlgorithmKind::meta:
        case AlgorithmKind::doubling_meta: {
            MetaConfig mc;
            mc.dp = dp;
            mc.mode = a.mode;
            mc.n_offsets = a.n_offsets;
            mc.known_error = a.known_error;
            if (a.kind == AlgorithmKind::meta) return run_meta(stream, mc, seed);
            return doubling_k_run(stream, mc, seed).trajectory;
        }
        case AlgorithmKind::no_hint: return run_no_hint(stream, dp, seed);
        case AlgorithmKind::bid_hint_only: return run_bid_hint_only(stream);
        case AlgorithmKind::binned: {
            BinnedParams p = a.binned;
            p.n_grid = n_grid;
            return binned_replay(stream, p, seed);
        }
    }
    throw std::logic_error("run_algorithm: unknown algorithm");
}

inline OracleResult evaluate_oracle(const OracleSpec& o, const StreamSpec& spec, const Stream& stream) {
    const std::size_t B = o.grid.value_or(std::max<std::size_t>(1000, stream.size()));
    OracleKind kind = o.kind;
    if (kind == OracleKind::automatic) {
        const double v0 = stream.rounds.front().v;
        const bool fixed_v =
            std::all_of(stream.rounds.begin(), stream.rounds.end(), [&](const AuctionRound& r) { return r.v == v0; });
        if (fixed_v) kind = OracleKind::constant;
        else if (spec.family == Family::sparse) kind = OracleKind::sparse;
        else kind = OracleKind::lipschitz;
    }
    switch (kind) {
        case OracleKind::constant: return constant_oracle(stream.rounds, true);
        case OracleKind::lipschitz: return lipschitz_oracle(stream.rounds, o.bins, B);
        case OracleKind::sparse: {
            std::vector<double> sup = o.supports.empty() ? spec.sparse.supports : o.supports;
            if (sup.empty()) throw ConfigError("$.oracle.supports", "sparse oracle needs supports");
            std::sort(sup.begin(), sup.end());
            return sparse_oracle(stream.rounds, sup, o.bins);
        }
        case OracleKind::automatic: break;
    }
    throw std::logic_error("evaluate_oracle: unresolved kind");
}

inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

struct ResultRow {
    std::string stream_id;
    std::string algorithm;
    std::uint64_t seed = 0;
    std::size_t t = 0;
    double bid = 0.0;
    double reward = 0.0;
    double cum_reward = 0.0;
    double oracle_cum_reward = 0.0;
    double cum_regret = 0.0;
    std::string param_axis = "none";
    double param_value = std::nan("");
    std::string base_stream;
};

struct AggregateRow {
    std::string stream_id;
    std::string algorithm;
    std::string param_axis;
    double param_value = std::nan("");
    double mean_final_regret = 0.0;
    double std_final_regret = 0.0;
    std::size_t n_seeds = 0;
};

struct SlopeRow {
    std::string stream_id;
    std::string algorithm;
    std::string param_axis;
    double slope = std::nan("");
    double intercept = std::nan("");
    std::size_t n_points = 0;
};

struct LogLogFit {
    double slope = std::nan("");
    double intercept = std::nan("");
    std::size_t n = 0;
};

// Least squares of log y on log x; points with x <= 0 or y <= 0 are skipped.
inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    LogLogFit f;
    f.n = lx.size();
    if (f.n < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < f.n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(f.n);
    my /= static_cast<double>(f.n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < f.n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates;
    std::vector<SlopeRow> slopes;
};

inline ExperimentResult run_experiment(const ExperimentConfig& c,
                                       const std::filesystem::path* trajectory_dir = nullptr) {
    ExperimentResult res;
    struct Cell {
        std::string axis;
        double value;
        StreamSpec spec;
    };
    for (const auto& base : c.streams) {
        std::vector<Cell> cells;
        if (c.sweep) {
            for (double v : c.sweep->values) {
                Cell cell{c.sweep->axis, v, apply_axis(base, c.sweep->axis, v)};
                cell.spec.id = base.id + "@" + c.sweep->axis + "=" + fmt(v);
                cells.push_back(cell);
            }
        } else {
            cells.push_back({"none", std::nan(""), base});
        }
        for (const auto& cell : cells) {
            for (const auto& alg : c.algorithms) {
                std::vector<double> finals;
                for (std::uint64_t seed : c.seeds) {
                    const Stream stream = generate(cell.spec, mix_seed(c.base_seed ^ cell.spec.seed, seed));
                    const OracleResult oracle = evaluate_oracle(c.oracle, cell.spec, stream);
                    const Trajectory traj = run_algorithm(alg, cell.spec, stream, seed);
                    const RegretReport rep = regret_curve(traj, oracle, c.basis);
                    const auto& last = traj.records().back();
                    ResultRow row;
                    row.stream_id = cell.spec.id;
                    row.algorithm = alg.label;
                    row.seed = seed;
                    row.t = last.t;
                    row.bid = last.bid;
                    row.reward = c.basis == RewardBasis::realized ? last.reward : last.expected_reward;
                    row.cum_reward = rep.policy_reward;
                    row.oracle_cum_reward = rep.oracle_reward;
                    row.cum_regret = rep.regret;
                    row.param_axis = cell.axis;
                    row.param_value = cell.value;
                    row.base_stream = base.id;
                    res.rows.push_back(row);
                    finals.push_back(rep.regret);

                    if (trajectory_dir) {
                        const auto p = *trajectory_dir / (cell.spec.id + "__" + alg.label + "__" + std::to_string(seed) + ".csv");
                        std::ofstream out(p);
                        if (!out) throw std::runtime_error("cannot write " + p.string());
                        out << "stream_id,algorithm,seed,t,bid,reward,cum_reward,oracle_cum_reward,cum_regret\n";
                        for (std::size_t i = 0; i < traj.size(); ++i) {
                            const auto& r = traj.records()[i];
                            out << cell.spec.id << ',' << alg.label << ',' << seed << ',' << r.t << ',' << fmt(r.bid)
                                << ',' << fmt(c.basis == RewardBasis::realized ? r.reward : r.expected_reward) << ','
                                << fmt(rep.policy_cumulative[i]) << ',' << fmt(rep.oracle_cumulative[i]) << ','
                                << fmt(rep.regret_curve[i]) << '\n';
                        }
                    }
                }
                AggregateRow agg;
                agg.stream_id = base.id;
                agg.algorithm = alg.label;
                agg.param_axis = cell.axis;
                agg.param_value = cell.value;
                agg.n_seeds = finals.size();
                double mean = 0;
                for (double x : finals) mean += x;
                mean /= static_cast<double>(finals.size());
                double var = 0;
                for (double x : finals) var += (x - mean) * (x - mean);
                agg.mean_final_regret = mean;
                agg.std_final_regret = finals.size() > 1 ? std::sqrt(var / static_cast<double>(finals.size() - 1)) : 0.0;
                res.aggregates.push_back(agg);
            }
        }
        if (c.sweep) {
            for (const auto& alg : c.algorithms) {
                std::vector<double> xs, ys;
                for (const auto& a : res.aggregates)
                    if (a.stream_id == base.id && a.algorithm == alg.label) {
                        xs.push_back(a.param_value);
                        ys.push_back(a.mean_final_regret);
                    }
                const LogLogFit f = fit_loglog(xs, ys);
                res.slopes.push_back({base.id, alg.label, c.sweep->axis, f.slope, f.intercept, f.n});
            }
        }
    }
    return res;
}

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "stream_id,algorithm,seed,t,bid,reward,cum_reward,oracle_cum_reward,cum_regret\n";
    for (const auto& r : rows)
        out << r.stream_id << ',' << r.algorithm << ',' << r.seed << ',' << r.t << ',' << fmt(r.bid) << ','
            << fmt(r.reward) << ',' << fmt(r.cum_reward) << ',' << fmt(r.oracle_cum_reward) << ','
            << fmt(r.cum_regret) << '\n';
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "stream_id,algorithm,param_axis,param_value,mean_final_regret,std_final_regret,n_seeds\n";
    for (const auto& a : rows)
        out << a.stream_id << ',' << a.algorithm << ',' << a.param_axis << ','
            << (std::isnan(a.param_value) ? std::string() : fmt(a.param_value)) << ',' << fmt(a.mean_final_regret)
            << ',' << fmt(a.std_final_regret) << ',' << a.n_seeds << '\n';
}

inline void write_slopes_csv(std::ostream& out, const std::vector<SlopeRow>& rows) {
    out << "stream_id,algorithm,param_axis,slope,intercept,n_points\n";
    for (const auto& s : rows)
        out << s.stream_id << ',' << s.algorithm << ',' << s.param_axis << ',' << fmt(s.slope) << ','
            << fmt(s.intercept) << ',' << s.n_points << '\n';
}

// Writes results.csv, aggregate.csv and (for sweeps) slopes.csv under dir.
inline ExperimentResult run_and_write(const ExperimentConfig& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::optional<std::filesystem::path> traj_dir;
    if (c.trajectories) {
        traj_dir = dir / "trajectories";
        std::filesystem::create_directories(*traj_dir);
    }
    ExperimentResult res = run_experiment(c, traj_dir ? &*traj_dir : nullptr);
    auto open = [&](const std::string& name) {
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("results.csv");
        write_results_csv(out, res.rows);
    }
    {
        auto out = open("aggregate.csv");
        write_aggregate_csv(out, res.aggregates);
    }
    if (c.sweep) {
        auto out = open("slopes.csv");
        write_slopes_csv(out, res.slopes);
    }
    return res;
}

}  // namespace hintbid
