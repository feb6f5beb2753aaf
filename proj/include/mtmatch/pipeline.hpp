#ifndef MTMATCH_PIPELINE_HPP
#define MTMATCH_PIPELINE_HPP

#include <cctype>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtmatch/bench.hpp"
#include "mtmatch/config.hpp"
#include "mtmatch/core.hpp"
#include "mtmatch/embedding.hpp"
#include "mtmatch/evaluation.hpp"
#include "mtmatch/io.hpp"
#include "mtmatch/merging.hpp"
#include "mtmatch/pruning.hpp"

namespace mtmatch {

/// A `match` run: hyperparameters plus where to read and write.
struct MatchJob {
    PipelineConfig config;
    std::vector<fs::path> tables;
    std::optional<fs::path> truth;
    fs::path out_dir = "out";
    bool write_trace = false;
};

namespace detail {

inline std::string single(const std::string& key, const std::vector<std::string>& values) {
    if (values.size() != 1) {
        throw Error(ErrorCode::invalid_params, "setting '" + key + "' takes exactly one value");
    }
    return values.front();
}

inline double as_double(const std::string& key, const std::vector<std::string>& values) {
    const auto text = single(key, values);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_params, "setting '" + key + "' is not a number: '" + text + "'");
    }
}

inline std::uint64_t as_uint(const std::string& key, const std::vector<std::string>& values) {
    const auto text = single(key, values);
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorCode::invalid_params, "setting '" + key + "' is not a non-negative integer: '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_params, "setting '" + key + "' is out of range");
    }
}

inline bool as_bool(const std::string& key, const std::vector<std::string>& values) {
    const auto text = single(key, values);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw Error(ErrorCode::invalid_params, "setting '" + key + "' is not a boolean: '" + text + "'");
}

using Setter = std::function<void(MatchJob&, const std::vector<std::string>&, const fs::path& base)>;

inline fs::path resolve(const fs::path& base, const std::string& value) {
    fs::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

inline const std::map<std::string, Setter>& match_settings() {
    static const std::map<std::string, Setter> settings = [] {
        std::map<std::string, Setter> s;
        s["k"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.k = as_uint("k", v); };
        s["m"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.m = as_double("m", v); };
        s["epsilon"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.epsilon = as_double("epsilon", v); };
        s["min_pts"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.min_pts = as_uint("min_pts", v); };
        s["gamma"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.gamma = as_double("gamma", v); };
        s["r"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.r = as_double("r", v); };
        s["seed"] = [](MatchJob& j, const auto& v, const fs::path&) { j.config.seed = as_uint("seed", v); };
        s["parallelism"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.parallelism = as_uint("parallelism", v);
        };
        s["embedder"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.kind = parse_embedder_kind(single("embedder", v));
        };
        s["embedder.kind"] = s["embedder"];
        s["embedder.dim"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.dim = as_uint("embedder.dim", v);
        };
        s["embedder.ngram_lo"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.ngram_lo = as_uint("embedder.ngram_lo", v);
        };
        s["embedder.ngram_hi"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.ngram_hi = as_uint("embedder.ngram_hi", v);
        };
        s["embedder.fold_digits"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.fold_digits = as_bool("embedder.fold_digits", v);
        };
        s["embedder.endpoint"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.endpoint = single("embedder.endpoint", v);
        };
        s["embedder.batch_size"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.batch_size = as_uint("embedder.batch_size", v);
        };
        s["embedder.timeout"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.embedder.timeout_seconds = as_double("embedder.timeout", v);
        };
        s["index.backend"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.index.backend = parse_index_backend(single("index.backend", v));
        };
        s["index.graph_degree"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.index.graph_degree = as_uint("index.graph_degree", v);
        };
        s["index.ef_construction"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.index.ef_construction = as_uint("index.ef_construction", v);
        };
        s["index.ef_search"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.index.ef_search = as_uint("index.ef_search", v);
        };
        s["index.exact_cutover"] = [](MatchJob& j, const auto& v, const fs::path&) {
            j.config.index.exact_cutover = as_uint("index.exact_cutover", v);
        };
        s["tables"] = [](MatchJob& j, const auto& v, const fs::path& base) {
            j.tables.clear();
            for (const auto& p : v) j.tables.push_back(resolve(base, p));
        };
        s["truth"] = [](MatchJob& j, const auto& v, const fs::path& base) {
            const auto text = single("truth", v);
            j.truth = text.empty() ? std::nullopt : std::optional<fs::path>(resolve(base, text));
        };
        s["out"] = [](MatchJob& j, const auto& v, const fs::path& base) {
            j.out_dir = resolve(base, single("out", v));
        };
        s["trace"] = [](MatchJob& j, const auto& v, const fs::path&) { j.write_trace = as_bool("trace", v); };
        return s;
    }();
    return settings;
}

} // namespace detail

/// Applies one `key = value(s)` setting. Relative paths resolve against `base`.
inline void apply_setting(MatchJob& job, const std::string& key, const std::vector<std::string>& values,
                          const fs::path& base = {}) {
    const auto& settings = detail::match_settings();
    auto it = settings.find(key);
    if (it == settings.end()) {
        throw Error(ErrorCode::invalid_params, "unknown setting '" + key + "'");
    }
    it->second(job, values, base);
}

/// TOML-style `key = value` settings (sections `[embedder]`, `[index]` allowed).
inline void apply_config_text(MatchJob& job, const std::string& text, const fs::path& base = {}) {
    std::istringstream in(text);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
        throw Error(ErrorCode::invalid_params, std::string("config parse error: ") + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") {
            continue;
        }
        apply_setting(job, item.fullname(), item.inputs, base);
    }
}

inline MatchJob load_match_job(const fs::path& config_path) {
    MatchJob job;
    apply_config_text(job, read_file(config_path), config_path.parent_path());
    return job;
}

/// Every setting can be overridden by MTMATCH_<KEY> with dots as underscores,
/// e.g. MTMATCH_SEED, MTMATCH_INDEX_BACKEND. List values are comma separated.
inline void apply_env_overrides(MatchJob& job, const std::string& prefix = "MTMATCH_") {
    for (const auto& [key, setter] : detail::match_settings()) {
        std::string name = prefix;
        for (char c : key) {
            name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
        const char* value = std::getenv(name.c_str());
        if (!value) {
            continue;
        }
        std::vector<std::string> values;
        std::string current;
        for (const char* p = value;; ++p) {
            if (*p == ',' || *p == '\0') {
                values.push_back(current);
                current.clear();
                if (*p == '\0') break;
            } else {
                current.push_back(*p);
            }
        }
        setter(job, key == "tables" ? values : std::vector<std::string>{value}, fs::current_path());
    }
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
    return {{"k", c.k},
            {"m", c.m},
            {"epsilon", c.epsilon},
            {"min_pts", c.min_pts},
            {"gamma", c.gamma},
            {"r", c.r},
            {"seed", c.seed},
            {"parallelism", c.parallelism},
            {"embedder",
             {{"kind", to_string(c.embedder.kind)},
              {"dim", c.embedder.dim},
              {"ngram_lo", c.embedder.ngram_lo},
              {"ngram_hi", c.embedder.ngram_hi},
              {"fold_digits", c.embedder.fold_digits},
              {"endpoint", c.embedder.endpoint},
              {"batch_size", c.embedder.batch_size},
              {"timeout", c.embedder.timeout_seconds}}},
            {"index",
             {{"backend", to_string(c.index.backend)},
              {"graph_degree", c.index.graph_degree},
              {"ef_construction", c.index.ef_construction},
              {"ef_search", c.index.ef_search},
              {"exact_cutover", c.index.exact_cutover}}}};
}

struct StageTime {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    nlohmann::json config;
    std::vector<std::string> tables;
    std::vector<StageTime> stages;
    double total_seconds = 0.0;
    AttributeReport attributes;
    std::size_t entities = 0;
    std::size_t candidate_tuples = 0;
    std::size_t pruned_tuples = 0;
    std::optional<ScoreReport> score;
    fs::path tuples_path;
    fs::path manifest_path;
    std::optional<fs::path> trace_path;
    TupleList<EntityRef> tuples;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = config;
        j["tables"] = tables;
        j["entities"] = entities;
        nlohmann::json stage_list = nlohmann::json::array();
        for (const auto& s : stages) {
            stage_list.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
        }
        j["stages"] = stage_list;
        j["total_seconds"] = total_seconds;
        nlohmann::json attrs = nlohmann::json::array();
        for (const auto& a : attributes.attributes) {
            attrs.push_back({{"name", a.name}, {"significance", a.significance}, {"selected", a.selected}});
        }
        j["attributes"] = {{"sample_size", attributes.sample_size},
                           {"fallback", attributes.fallback},
                           {"scores", attrs}};
        j["tuples_before_pruning"] = candidate_tuples;
        j["tuples_after_pruning"] = pruned_tuples;
        j["score"] = score ? score->to_json() : nlohmann::json(nullptr);
        j["outputs"] = {{"tuples", tuples_path.string()},
                        {"manifest", manifest_path.string()},
                        {"trace", trace_path ? nlohmann::json(trace_path->string()) : nlohmann::json(nullptr)}};
        return j;
    }
};

/// load -> validate -> select attributes -> embed -> merge -> extract -> prune
/// -> score (when truth is given) -> write tuples.jsonl and manifest.json.
inline RunManifest run_pipeline(const MatchJob& job) {
    using clock = std::chrono::steady_clock;
    job.config.validate();
    const auto& cfg = job.config;

    RunManifest manifest;
    manifest.config = config_to_json(cfg);
    const auto run_start = clock::now();
    auto stage_start = run_start;
    auto finish_stage = [&](const char* name) {
        const auto now = clock::now();
        manifest.stages.push_back(StageTime{name, std::chrono::duration<double>(now - stage_start).count()});
        stage_start = now;
    };

    std::vector<RawTable> raw;
    for (const auto& p : job.tables) {
        raw.push_back(read_csv_table(p));
        manifest.tables.push_back(p.string());
    }
    std::optional<TruthSet<EntityRef>> truth;
    if (job.truth) {
        truth = load_truth(*job.truth);
    }
    finish_stage("load");

    const Dataset dataset = validate_dataset(raw);
    raw.clear();
    manifest.entities = dataset.entity_count();
    finish_stage("validate");

    manifest.attributes = select_attributes(dataset, cfg.embedder, cfg.r, cfg.gamma, cfg.seed, cfg.parallelism);
    finish_stage("select_attributes");

    auto initial = init_working_tables(dataset, manifest.attributes.selected(), cfg.embedder, cfg.parallelism);
    finish_stage("embed");

    HierarchyTrace trace;
    const auto merged = hierarchical_merge(std::move(initial.tables), initial.store, cfg, &trace);
    finish_stage("merge");

    const auto candidates = extract_candidate_tuples(merged);
    manifest.candidate_tuples = candidates.size();
    finish_stage("extract");

    const auto pruned = prune_tuples(candidates, initial.store, cfg.epsilon, cfg.min_pts, cfg.parallelism);
    manifest.pruned_tuples = pruned.size();
    for (const auto& g : pruned) {
        manifest.tuples.push_back(g.members);
    }
    finish_stage("prune");

    if (truth) {
        manifest.score = score(manifest.tuples, *truth);
        finish_stage("score");
    }

    manifest.tuples_path = job.out_dir / "tuples.jsonl";
    manifest.manifest_path = job.out_dir / "manifest.json";
    write_file(manifest.tuples_path, format_tuples_jsonl(manifest.tuples));
    if (job.write_trace) {
        manifest.trace_path = job.out_dir / "merge_trace.jsonl";
        write_file(*manifest.trace_path, trace.to_jsonl());
    }
    if (manifest.score) {
        write_file(job.out_dir / "score.json", manifest.score->to_json().dump(2) + "\n");
    }
    finish_stage("write");

    manifest.total_seconds = std::chrono::duration<double>(clock::now() - run_start).count();
    write_file(manifest.manifest_path, manifest.to_json().dump(2) + "\n");
    return manifest;
}

inline RunManifest run_pipeline(const fs::path& config_path) { return run_pipeline(load_match_job(config_path)); }

/// A `bench` run: strategy scaling sweep on planted embeddings.
struct BenchJob {
    PipelineConfig config = [] {
        PipelineConfig c;
        c.m = 0.2;
        c.index.backend = IndexBackend::exact;
        return c;
    }();
    ScalingOptions options;
    fs::path out_dir = "bench_out";
};

inline void apply_bench_setting(BenchJob& job, const std::string& key, const std::vector<std::string>& values,
                                const fs::path& base = {}) {
    if (key == "strategies") {
        job.options.strategies.clear();
        for (const auto& v : values) job.options.strategies.push_back(parse_strategy(v));
    } else if (key == "S_values" || key == "tables") {
        job.options.table_counts.clear();
        for (const auto& v : values) job.options.table_counts.push_back(detail::as_uint(key, {v}));
    } else if (key == "n") {
        job.options.n = detail::as_uint(key, values);
    } else if (key == "repeats") {
        job.options.repeats = detail::as_uint(key, values);
    } else if (key == "dim") {
        job.options.dim = detail::as_uint(key, values);
    } else if (key == "cluster_fraction") {
        job.options.cluster_fraction = detail::as_double(key, values);
    } else if (key == "out") {
        job.out_dir = detail::resolve(base, detail::single(key, values));
    } else if (key == "truth" || key == "trace" || key.rfind("embedder", 0) == 0) {
        throw Error(ErrorCode::invalid_params, "setting '" + key + "' does not apply to bench");
    } else {
        MatchJob carrier;
        carrier.config = job.config;
        apply_setting(carrier, key, values, base);
        job.config = carrier.config;
    }
}

inline BenchJob load_bench_job(const fs::path& config_path) {
    BenchJob job;
    std::istringstream in(read_file(config_path));
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
        throw Error(ErrorCode::invalid_params, std::string("config parse error: ") + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        apply_bench_setting(job, item.fullname(), item.inputs, config_path.parent_path());
    }
    return job;
}

inline std::string scaling_summary(const std::vector<StrategyRun>& runs) {
    std::ostringstream out;
    std::map<Strategy, std::vector<const StrategyRun*>> by_strategy;
    for (const auto& r : runs) by_strategy[r.strategy].push_back(&r);
    for (const auto& [strategy, list] : by_strategy) {
        out << to_string(strategy) << ":";
        for (std::size_t i = 0; i < list.size(); ++i) {
            out << "  S=" << list[i]->tables << " evals=" << list[i]->distance_evals;
            if (i > 0 && list[i - 1]->distance_evals > 0) {
                out << " (x" << static_cast<double>(list[i]->distance_evals) /
                                    static_cast<double>(list[i - 1]->distance_evals)
                    << ")";
            }
        }
        out << "\n";
    }
    return out.str();
}

/// Writes scaling.csv and summary.txt into the job's output directory.
inline std::vector<StrategyRun> run_bench(const BenchJob& job) {
    job.config.validate();
    const auto runs = scaling_report(job.options, job.config);
    write_file(job.out_dir / "scaling.csv", scaling_csv(runs));
    write_file(job.out_dir / "summary.txt", scaling_summary(runs));
    return runs;
}

inline std::vector<StrategyRun> run_bench(const fs::path& config_path) { return run_bench(load_bench_job(config_path)); }

} // namespace mtmatch

#endif
