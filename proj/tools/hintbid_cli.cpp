#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hintbid/bench.hpp"

namespace fs = std::filesystem;
using namespace hintbid;

namespace {

struct Options {
    std::string config;
    std::string stream;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string q = "1";
    std::size_t samples = 1000000;
};

QNorm parse_q(const std::string& s) {
    if (s == "inf" || s == "infinity") return QNorm::infinity();
    try {
        return QNorm(std::stod(s));
    } catch (const std::exception&) {
        throw ConfigError("--q", "expected a number >= 1 or inf");
    }
}

ExperimentConfig default_replay_config() {
    nlohmann::json j = {
        {"streams", nlohmann::json::array({{{"family", "csv"}, {"path", "-"}}})},
        {"algorithms", {"bid_hint_only", {{"name", "binned"}}, {{"name", "alg1"}}}},
    };
    return parse_config(j);
}

ExperimentConfig resolve(const Options& o, bool need_config) {
    ExperimentConfig c;
    if (!o.config.empty()) {
        c = load_config(o.config);
    } else if (need_config) {
        throw ConfigError("--config", "required");
    } else {
        c = default_replay_config();
    }
    if (!o.stream.empty()) {
        StreamSpec s;
        s.id = fs::path(o.stream).stem().string();
        s.family = Family::csv;
        s.path = o.stream;
        s.q = o.config.empty() ? parse_q(o.q) : c.streams.front().q;
        c.streams = {s};
        c.sweep.reset();
    }
    if (o.seed) c.seeds = {*o.seed};
    return c;
}

fs::path out_dir(const Options& o, const ExperimentConfig& c) { return o.out.empty() ? fs::path(c.output) : fs::path(o.out); }

int cmd_run(const Options& o, bool sweep) {
    ExperimentConfig c = resolve(o, true);
    if (sweep && !c.sweep) throw ConfigError("$.sweep", "required for the sweep command");
    if (!sweep) c.sweep.reset();
    const fs::path dir = out_dir(o, c);
    const ExperimentResult r = run_and_write(c, dir);
    std::printf("%zu result rows, %zu aggregate rows -> %s\n", r.rows.size(), r.aggregates.size(), dir.string().c_str());
    for (const auto& s : r.slopes)
        std::printf("slope %s %s vs %s: %s (%zu points)\n", s.stream_id.c_str(), s.algorithm.c_str(),
                    s.param_axis.c_str(), fmt(s.slope).c_str(), s.n_points);
    return 0;
}

int cmd_replay(const Options& o) {
    if (o.stream.empty()) throw ConfigError("--stream", "required for replay");
    const CsvLoad load = load_csv(o.stream);
    std::printf("loaded %zu rows, dropped %zu\n", load.stream.size(), load.dropped);
    ExperimentConfig c = resolve(o, false);
    const fs::path dir = out_dir(o, c);
    const ExperimentResult r = run_and_write(c, dir);
    std::printf("%zu result rows -> %s\n", r.rows.size(), dir.string().c_str());
    return 0;
}

int cmd_oracle(const Options& o) {
    const ExperimentConfig c = resolve(o, o.stream.empty());
    const fs::path dir = out_dir(o, c);
    fs::create_directories(dir);
    std::ofstream out(dir / "oracle.csv");
    if (!out) throw std::runtime_error("cannot write " + (dir / "oracle.csv").string());
    out << "stream_id,seed,oracle,oracle_reward,discretization_bound\n";
    for (const auto& spec : c.streams) {
        for (std::uint64_t seed : c.seeds) {
            const Stream s = generate(spec, mix_seed(c.base_seed ^ spec.seed, seed));
            const OracleResult r = evaluate_oracle(c.oracle, spec, s);
            out << spec.id << ',' << seed << ',' << r.name << ',' << fmt(r.total) << ',' << fmt(r.discretization_bound)
                << '\n';
            if (spec.family == Family::csv) break;
        }
    }
    std::printf("oracle values -> %s\n", (dir / "oracle.csv").string().c_str());
    return 0;
}

int cmd_validate(const Options& o) {
    const ExperimentConfig c = resolve(o, o.stream.empty());
    bool ok = true;
    for (const auto& spec : c.streams) {
        StreamSpec s = spec;
        if (o.seed) s.seed = *o.seed;
        const MomentReport r = check_moment(s, o.samples);
        std::printf("%s q=%s rounds=%zu error_moment=%s bound=%s flagged=%zu %s\n", spec.id.c_str(),
                    r.q.to_string().c_str(), r.rounds, fmt(r.mean_error_power).c_str(),
                    fmt(r.mean_sigma_power).c_str(), r.flagged_rounds.size(), r.pass ? "PASS" : "FAIL");
        ok = ok && r.pass;
    }
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hint-augmented bidding for repeated first-price auctions"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment config (JSON)");
        sub->add_option("--seed", o.seed, "run a single seed instead of the configured list");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--stream", o.stream, "CSV stream v,m,h,sigma");
    };
    auto* simulate = app.add_subcommand("simulate", "generate streams and run algorithms");
    auto* replay = app.add_subcommand("replay", "run algorithms on a CSV stream");
    auto* oracle = app.add_subcommand("oracle", "hindsight oracle values only");
    auto* sweep = app.add_subcommand("sweep", "grid runs with log-log slope fits");
    auto* validate = app.add_subcommand("validate", "check the hint-accuracy moment condition");
    for (auto* sub : {simulate, replay, oracle, sweep, validate}) add_common(sub);
    for (auto* sub : {replay, oracle, validate}) sub->add_option("--q", o.q, "accuracy order for a CSV stream (number or inf)");
    validate->add_option("--samples", o.samples, "Monte-Carlo rounds for generated streams");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*simulate) return cmd_run(o, false);
        if (*sweep) return cmd_run(o, true);
        if (*replay) return cmd_replay(o);
        if (*oracle) return cmd_oracle(o);
        if (*validate) return cmd_validate(o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
