// Command-line front end: match, gen, bench, score.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtmatch/mtmatch.hpp"

namespace {

using namespace mtmatch;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> parallelism;
    std::string embedder;
    std::string out;
    std::vector<std::string> overrides; // key=value
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "TOML-style key = value config file");
    app->add_option("--seed", f.seed, "RNG seed");
    app->add_option("--parallelism", f.parallelism, "worker threads");
    app->add_option("--embedder", f.embedder, "hashing or remote");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--set", f.overrides, "extra setting, key=value (repeatable)");
}

std::pair<std::string, std::vector<std::string>> split_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::invalid_params, "--set expects key=value, got '" + text + "'");
    }
    return {text.substr(0, eq), {text.substr(eq + 1)}};
}

void apply_flags(MatchJob& job, const CommonFlags& f) {
    if (f.seed) job.config.seed = *f.seed;
    if (f.parallelism) job.config.parallelism = *f.parallelism;
    if (!f.embedder.empty()) job.config.embedder.kind = parse_embedder_kind(f.embedder);
    if (!f.out.empty()) job.out_dir = f.out;
    for (const auto& o : f.overrides) {
        auto [key, values] = split_override(o);
        apply_setting(job, key, values, fs::current_path());
    }
}

int emit_error(const std::string& code, const std::string& message) {
    nlohmann::json err{{"error", {{"code", code}, {"message", message}}}};
    std::cerr << err.dump() << std::endl;
    return 1;
}

int cmd_match(const CommonFlags& f, const std::vector<std::string>& tables, const std::string& truth, bool trace) {
    MatchJob job = f.config.empty() ? MatchJob{} : load_match_job(f.config);
    apply_env_overrides(job);
    if (!tables.empty()) {
        job.tables.assign(tables.begin(), tables.end());
    }
    if (!truth.empty()) job.truth = fs::path(truth);
    if (trace) job.write_trace = true;
    apply_flags(job, f);
    if (job.tables.empty()) {
        throw Error(ErrorCode::invalid_params, "no input tables (use --tables or a config file)");
    }
    const auto manifest = run_pipeline(job);
    nlohmann::json summary{{"tuples", manifest.tuples_path.string()},
                           {"manifest", manifest.manifest_path.string()},
                           {"tuples_before_pruning", manifest.candidate_tuples},
                           {"tuples_after_pruning", manifest.pruned_tuples},
                           {"total_seconds", manifest.total_seconds}};
    if (manifest.score) summary["score"] = manifest.score->to_json();
    std::cout << summary.dump(2) << std::endl;
    return 0;
}

int cmd_gen(const CommonFlags& f, SyntheticSpec spec) {
    if (f.seed) spec.seed = *f.seed;
    const fs::path dir = f.out.empty() ? fs::path("synthetic") : fs::path(f.out);
    const auto files = write_synthetic(generate_synthetic(spec), dir);
    nlohmann::json j{{"truth", files.truth.string()}, {"tables", nlohmann::json::array()}};
    for (const auto& t : files.tables) j["tables"].push_back(t.string());
    std::cout << j.dump(2) << std::endl;
    return 0;
}

int cmd_bench(const CommonFlags& f, const std::vector<std::string>& strategies, const std::vector<std::size_t>& s_values,
              std::optional<std::size_t> n, std::optional<std::size_t> repeats) {
    BenchJob job = f.config.empty() ? BenchJob{} : load_bench_job(f.config);
    {
        MatchJob carrier;
        carrier.config = job.config;
        apply_env_overrides(carrier);
        job.config = carrier.config;
    }
    if (!strategies.empty()) {
        job.options.strategies.clear();
        for (const auto& s : strategies) job.options.strategies.push_back(parse_strategy(s));
    }
    if (!s_values.empty()) job.options.table_counts = s_values;
    if (n) job.options.n = *n;
    if (repeats) job.options.repeats = *repeats;
    if (f.seed) job.config.seed = *f.seed;
    if (!f.out.empty()) job.out_dir = f.out;
    for (const auto& o : f.overrides) {
        auto [key, values] = split_override(o);
        apply_bench_setting(job, key, values, fs::current_path());
    }
    const auto runs = run_bench(job);
    std::cout << scaling_csv(runs) << '\n' << scaling_summary(runs);
    return 0;
}

int cmd_score(const std::string& pred, const std::string& truth, const std::string& out) {
    const auto predicted = parse_tuples_jsonl(read_file(pred));
    const auto report = score(predicted, load_truth(truth));
    const auto text = report.to_json().dump(2) + "\n";
    if (!out.empty()) write_file(fs::path(out) / "score.json", text);
    std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-table entity matching"};
    app.require_subcommand(1);

    CommonFlags match_flags;
    std::vector<std::string> match_tables;
    std::string match_truth;
    bool match_trace = false;
    auto* match = app.add_subcommand("match", "run the matching pipeline");
    add_common(match, match_flags);
    match->add_option("--tables", match_tables, "input CSV tables");
    match->add_option("--truth", match_truth, "truth JSONL for scoring");
    match->add_flag("--trace", match_trace, "also write merge_trace.jsonl");

    CommonFlags gen_flags;
    SyntheticSpec gen_spec;
    auto* gen = app.add_subcommand("gen", "write a synthetic multi-table dataset");
    add_common(gen, gen_flags);
    gen->add_option("-S,--tables", gen_spec.tables, "number of tables");
    gen->add_option("-n,--rows", gen_spec.rows, "rows per table");
    gen->add_option("--clusters", gen_spec.clusters, "planted duplicate groups");
    gen->add_option("--noise", gen_spec.noise, "per-character perturbation rate");

    CommonFlags bench_flags;
    std::vector<std::string> bench_strategies;
    std::vector<std::size_t> bench_s;
    std::optional<std::size_t> bench_n;
    std::optional<std::size_t> bench_repeats;
    auto* bench = app.add_subcommand("bench", "scaling benchmark of merge strategies");
    add_common(bench, bench_flags);
    bench->add_option("--strategies", bench_strategies, "pairwise, chain, hierarchical");
    bench->add_option("--S", bench_s, "table counts");
    bench->add_option("-n,--rows", bench_n, "rows per table");
    bench->add_option("--repeats", bench_repeats, "timed repeats per cell (>= 3)");

    std::string score_pred;
    std::string score_truth;
    std::string score_out;
    auto* score_cmd = app.add_subcommand("score", "score predicted tuples against truth");
    score_cmd->add_option("--pred", score_pred, "predicted tuples JSONL")->required();
    score_cmd->add_option("--truth", score_truth, "truth JSONL")->required();
    score_cmd->add_option("--out", score_out, "directory for score.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        return emit_error("usage", e.what());
    }

    try {
        if (*match) return cmd_match(match_flags, match_tables, match_truth, match_trace);
        if (*gen) return cmd_gen(gen_flags, gen_spec);
        if (*bench) return cmd_bench(bench_flags, bench_strategies, bench_s, bench_n, bench_repeats);
        if (*score_cmd) return cmd_score(score_pred, score_truth, score_out);
    } catch (const Error& e) {
        return emit_error(to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return emit_error("internal", e.what());
    }
    return 1;
}
