#ifndef MTMATCH_BENCH_HPP
#define MTMATCH_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mtmatch/ann_index.hpp"
#include "mtmatch/config.hpp"
#include "mtmatch/evaluation.hpp"
#include "mtmatch/merging.hpp"
#include "mtmatch/random.hpp"

namespace mtmatch {

enum class Strategy { pairwise, chain, hierarchical };

inline const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::pairwise: return "pairwise";
    case Strategy::chain: return "chain";
    case Strategy::hierarchical: return "hierarchical";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view text) {
    if (text == "pairwise") return Strategy::pairwise;
    if (text == "chain") return Strategy::chain;
    if (text == "hierarchical") return Strategy::hierarchical;
    throw Error(ErrorCode::invalid_params, "unknown strategy '" + std::string(text) + "'");
}

struct StrategyRun {
    Strategy strategy = Strategy::hierarchical;
    std::size_t tables = 0;       // S
    std::size_t n = 0;            // rows per table
    double seconds = 0.0;
    std::uint64_t distance_evals = 0;
    std::uint64_t pairs_found = 0;
    std::size_t jobs = 0;         // two-table matching calls
    std::size_t levels = 0;       // hierarchy depth; 0 for the flat strategies
};

struct StrategyResult {
    TupleList<EntityRef> tuples;
    StrategyRun run;
};

namespace detail {

inline void require_singletons(const std::vector<WorkingTable>& tables) {
    if (tables.size() < 2) {
        throw Error(ErrorCode::precondition, "strategies need at least 2 tables");
    }
    for (const auto& t : tables) {
        for (const auto& g : t.groups) {
            if (g.members.size() != 1) {
                throw Error(ErrorCode::precondition, "strategies start from singleton tables");
            }
        }
    }
}

inline std::size_t mean_rows(const std::vector<WorkingTable>& tables) {
    std::size_t total = 0;
    for (const auto& t : tables) total += t.groups.size();
    return total / tables.size();
}

inline TupleList<EntityRef> tuples_of(const WorkingTable& table) {
    TupleList<EntityRef> out;
    for (const auto& g : extract_candidate_tuples(table)) {
        out.push_back(g.members);
    }
    return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

/// Mutual top-K on every unordered table pair, then pairs -> tuples by
/// connected components.
inline StrategyResult run_pairwise(const std::vector<WorkingTable>& tables, const PipelineConfig& cfg) {
    detail::require_singletons(tables);
    const auto start = std::chrono::steady_clock::now();

    StrategyResult result;
    result.run.strategy = Strategy::pairwise;
    result.run.tables = tables.size();
    result.run.n = detail::mean_rows(tables);

    std::vector<std::vector<Embedding>> vectors(tables.size());
    std::vector<EntityRef> entities;
    for (std::size_t s = 0; s < tables.size(); ++s) {
        for (const auto& g : tables[s].groups) {
            vectors[s].push_back(g.centroid);
            entities.push_back(g.members.front());
        }
    }

    DistanceCounter counter;
    PairSet<EntityRef> pairs;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        for (std::size_t j = i + 1; j < tables.size(); ++j) {
            const auto found = mutual_topk(vectors[i], vectors[j], cfg.k, cfg.m, cfg.index,
                                           derive_seed(cfg.seed, i, j), &counter, cfg.parallelism);
            ++result.run.jobs;
            result.run.pairs_found += found.size();
            for (const auto& p : found) {
                pairs.insert(std::minmax(tables[i].groups[p.left].members.front(),
                                         tables[j].groups[p.right].members.front()));
            }
        }
    }
    result.tuples = pairs_to_tuples(pairs, entities);
    result.run.distance_evals = counter.value();
    result.run.seconds = detail::seconds_since(start);
    return result;
}

/// Table 0 is the base; every other table is merged into it in input order.
/// Unmatched entities stay in the base, so it grows as the chain proceeds.
inline StrategyResult run_chain(const std::vector<WorkingTable>& tables, const EmbeddingStore& store,
                                const PipelineConfig& cfg) {
    detail::require_singletons(tables);
    const auto start = std::chrono::steady_clock::now();

    StrategyResult result;
    result.run.strategy = Strategy::chain;
    result.run.tables = tables.size();
    result.run.n = detail::mean_rows(tables);

    MergeStats stats;
    WorkingTable base = tables.front();
    for (std::size_t j = 1; j < tables.size(); ++j) {
        base = merge_two_tables(base, tables[j], store, cfg, derive_seed(cfg.seed, 0xc4, j), &stats,
                                cfg.parallelism);
        ++result.run.jobs;
    }
    result.tuples = detail::tuples_of(base);
    result.run.distance_evals = stats.distance_evals;
    result.run.pairs_found = stats.matched.size();
    result.run.seconds = detail::seconds_since(start);
    return result;
}

inline StrategyResult run_hierarchical(const std::vector<WorkingTable>& tables, const EmbeddingStore& store,
                                       const PipelineConfig& cfg) {
    detail::require_singletons(tables);
    const auto start = std::chrono::steady_clock::now();

    StrategyResult result;
    result.run.strategy = Strategy::hierarchical;
    result.run.tables = tables.size();
    result.run.n = detail::mean_rows(tables);

    HierarchyTrace trace;
    const auto merged = hierarchical_merge(tables, store, cfg, &trace);
    result.tuples = detail::tuples_of(merged);
    result.run.distance_evals = trace.distance_evals;
    result.run.pairs_found = trace.matched.size();
    result.run.jobs = trace.merges.size();
    result.run.levels = trace.plan.levels.size();
    result.run.seconds = detail::seconds_since(start);
    return result;
}

inline StrategyResult run_strategy(Strategy strategy, const std::vector<WorkingTable>& tables,
                                   const EmbeddingStore& store, const PipelineConfig& cfg) {
    switch (strategy) {
    case Strategy::pairwise: return run_pairwise(tables, cfg);
    case Strategy::chain: return run_chain(tables, store, cfg);
    case Strategy::hierarchical: return run_hierarchical(tables, store, cfg);
    }
    throw Error(ErrorCode::invalid_params, "unknown strategy");
}

/// Planted-cluster embedding data.
///
/// Cluster centers and singleton entities are random unit vectors, redrawn
/// until every pair of them is at least `min_center_angle` apart. A cluster
/// member is its center rotated by an angle below `spread` toward a random
/// orthogonal direction, so two members of one cluster are at most 2*spread
/// apart and members of different clusters at least min_center_angle - 2*spread.
struct PlantedSpec {
    std::size_t tables = 4;
    std::size_t dim = 64;
    // cluster c has sizes[c] members placed on distinct tables unless
    // allow_shared_table is set (then only >= 2 distinct tables are required)
    std::vector<std::size_t> cluster_sizes;
    std::size_t singletons_per_table = 0;
    bool allow_shared_table = false;
    double spread = 0.15;            // radians
    double min_center_angle = 1.0472; // radians
    std::uint64_t seed = 1;
};

struct PlantedData {
    EmbeddingStore store;
    TupleList<EntityRef> truth;
};

namespace detail {

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t dim) {
    // Box-Muller on the seeded generator
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; i += 2) {
        const double u1 = 1.0 - uniform_unit(rng);
        const double u2 = uniform_unit(rng);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        out[i] = radius * std::cos(2.0 * std::numbers::pi * u2);
        if (i + 1 < dim) out[i + 1] = radius * std::sin(2.0 * std::numbers::pi * u2);
    }
    return out;
}

inline Embedding random_unit(Rng& rng, std::size_t dim) { return Embedding::normalized(gaussian_vector(rng, dim)); }

/// center * cos(angle) + u * sin(angle), u a random unit vector orthogonal to center.
inline Embedding rotate_toward_random(const Embedding& center, double angle, Rng& rng) {
    auto g = gaussian_vector(rng, center.dim());
    const double along = dot(g, center.values());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= along * center[i];
    const auto u = Embedding::normalized(std::move(g));
    std::vector<double> v(center.dim());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(angle) * center[i] + std::sin(angle) * u[i];
    return Embedding::normalized(std::move(v));
}

} // namespace detail

inline PlantedData generate_planted(const PlantedSpec& spec) {
    if (spec.tables < 2) {
        throw Error(ErrorCode::invalid_params, "planted data needs at least 2 tables");
    }
    for (auto size : spec.cluster_sizes) {
        if (size < 2 || (!spec.allow_shared_table && size > spec.tables)) {
            throw Error(ErrorCode::invalid_params, "cluster size must be in [2, tables]");
        }
    }
    Rng rng(derive_seed(spec.seed, 0x9a));

    const std::size_t center_count = spec.cluster_sizes.size() + spec.singletons_per_table * spec.tables;
    const double max_cos = std::cos(spec.min_center_angle);
    std::vector<Embedding> centers;
    centers.reserve(center_count);
    std::size_t attempts = 0;
    while (centers.size() < center_count) {
        if (++attempts > 1000 * (center_count + 10)) {
            throw Error(ErrorCode::invalid_params, "cannot place planted centers; raise dim or lower min_center_angle");
        }
        auto candidate = detail::random_unit(rng, spec.dim);
        const bool far = std::all_of(centers.begin(), centers.end(),
                                     [&](const Embedding& c) { return dot(c.values(), candidate.values()) < max_cos; });
        if (far) centers.push_back(std::move(candidate));
    }

    std::vector<std::vector<Embedding>> rows(spec.tables);
    std::vector<std::vector<std::size_t>> owner(spec.tables); // cluster index or npos
    constexpr std::size_t none = static_cast<std::size_t>(-1);

    for (std::size_t c = 0; c < spec.cluster_sizes.size(); ++c) {
        const std::size_t size = spec.cluster_sizes[c];
        std::vector<std::size_t> order(spec.tables);
        for (std::size_t t = 0; t < spec.tables; ++t) order[t] = t;
        fisher_yates(std::span<std::size_t>(order), rng);

        std::vector<std::size_t> placement;
        if (!spec.allow_shared_table) {
            placement.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
        } else {
            placement = {order[0], order[1]};
            while (placement.size() < size) {
                placement.push_back(static_cast<std::size_t>(uniform_below(rng, spec.tables)));
            }
        }
        for (std::size_t t : placement) {
            const double angle = spec.spread * uniform_unit(rng);
            rows[t].push_back(detail::rotate_toward_random(centers[c], angle, rng));
            owner[t].push_back(c);
        }
    }
    std::size_t next_center = spec.cluster_sizes.size();
    for (std::size_t t = 0; t < spec.tables; ++t) {
        for (std::size_t i = 0; i < spec.singletons_per_table; ++i) {
            rows[t].push_back(centers[next_center++]);
            owner[t].push_back(none);
        }
    }

    // shuffle rows so cluster members do not line up by position
    TupleList<EntityRef> truth(spec.cluster_sizes.size());
    for (std::size_t t = 0; t < spec.tables; ++t) {
        std::vector<std::size_t> perm(rows[t].size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        fisher_yates(std::span<std::size_t>(perm), rng);
        std::vector<Embedding> shuffled;
        shuffled.reserve(perm.size());
        for (std::size_t r = 0; r < perm.size(); ++r) {
            shuffled.push_back(rows[t][perm[r]]);
            const std::size_t c = owner[t][perm[r]];
            if (c != none) {
                truth[c].push_back(EntityRef{static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(r)});
            }
        }
        rows[t] = std::move(shuffled);
    }
    for (auto& t : truth) std::sort(t.begin(), t.end());
    std::sort(truth.begin(), truth.end());

    return PlantedData{EmbeddingStore(std::move(rows)), std::move(truth)};
}

/// Benchmark data shape: n rows per table, `cluster_fraction` of them members
/// of clusters that span every table, the rest unmatched singletons.
inline PlantedSpec scaling_spec(std::size_t tables, std::size_t n, double cluster_fraction, std::size_t dim,
                                std::uint64_t seed) {
    PlantedSpec spec;
    spec.tables = tables;
    spec.dim = dim;
    const auto clustered = static_cast<std::size_t>(std::llround(cluster_fraction * static_cast<double>(n)));
    spec.cluster_sizes.assign(std::min(clustered, n), tables);
    spec.singletons_per_table = n - spec.cluster_sizes.size();
    spec.seed = seed;
    return spec;
}

struct ScalingOptions {
    std::vector<Strategy> strategies{Strategy::pairwise, Strategy::chain, Strategy::hierarchical};
    std::vector<std::size_t> table_counts{4, 8, 16};
    std::size_t n = 500;
    std::size_t repeats = 3;
    std::size_t dim = 64;
    double cluster_fraction = 0.9;
};

/// Runs every strategy on planted data for each table count; reports the
/// median wall time of `repeats` runs and the (deterministic) counters.
inline std::vector<StrategyRun> scaling_report(const ScalingOptions& options, const PipelineConfig& base_cfg) {
    if (options.repeats < 3) {
        throw Error(ErrorCode::invalid_params, "repeats must be >= 3");
    }
    if (!std::is_sorted(options.table_counts.begin(), options.table_counts.end())) {
        throw Error(ErrorCode::invalid_params, "table counts must be ascending");
    }
    PipelineConfig cfg = base_cfg;
    cfg.parallelism = 1;

    std::vector<StrategyRun> report;
    for (std::size_t tables : options.table_counts) {
        const auto data = generate_planted(
            scaling_spec(tables, options.n, options.cluster_fraction, options.dim, derive_seed(cfg.seed, tables)));
        const auto working = singleton_tables(data.store);
        for (Strategy strategy : options.strategies) {
            std::vector<double> times;
            StrategyRun run;
            for (std::size_t rep = 0; rep < options.repeats; ++rep) {
                run = run_strategy(strategy, working, data.store, cfg).run;
                times.push_back(run.seconds);
            }
            std::sort(times.begin(), times.end());
            run.seconds = times[times.size() / 2];
            report.push_back(run);
        }
    }
    return report;
}

inline std::string scaling_csv(const std::vector<StrategyRun>& runs) {
    std::ostringstream out;
    out << "strategy,S,n,median_seconds,distance_evals,pairs_found\n";
    out.precision(6);
    for (const auto& r : runs) {
        out << to_string(r.strategy) << ',' << r.tables << ',' << r.n << ',' << std::fixed << r.seconds << ','
            << r.distance_evals << ',' << r.pairs_found << '\n';
        out.unsetf(std::ios::fixed);
    }
    return out.str();
}

} // namespace mtmatch

#endif
