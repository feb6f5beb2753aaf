#ifndef MTMATCH_MERGING_HPP
#define MTMATCH_MERGING_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtmatch/ann_index.hpp"
#include "mtmatch/config.hpp"
#include "mtmatch/core.hpp"
#include "mtmatch/embedding.hpp"
#include "mtmatch/parallel.hpp"
#include "mtmatch/random.hpp"
#include "mtmatch/union_find.hpp"
#include "mtmatch/vector.hpp"

namespace mtmatch {

/// Per-entity embeddings, indexed by EntityRef.
class EmbeddingStore {
public:
    EmbeddingStore() = default;

    explicit EmbeddingStore(std::vector<std::vector<Embedding>> by_source) : by_source_(std::move(by_source)) {
        for (const auto& table : by_source_) {
            if (table.empty()) {
                throw Error(ErrorCode::empty_table, "embedding store table is empty");
            }
            require_uniform_dim(table, by_source_.front().front().dim(), "embedding store");
        }
    }

    const Embedding& at(EntityRef ref) const { return by_source_.at(ref.source).at(ref.row); }
    std::size_t table_count() const noexcept { return by_source_.size(); }
    const std::vector<Embedding>& table(std::size_t source) const { return by_source_.at(source); }
    std::size_t dim() const noexcept { return by_source_.empty() ? 0 : by_source_.front().front().dim(); }

private:
    std::vector<std::vector<Embedding>> by_source_;
};

/// A set of entities believed equivalent, represented by the normalized mean
/// of their embeddings. Members are kept sorted.
struct EntityGroup {
    std::vector<EntityRef> members;
    Embedding centroid;

    bool operator==(const EntityGroup&) const = default;
};

struct WorkingTable {
    std::vector<EntityGroup> groups;
    std::size_t level = 0;

    std::size_t entity_count() const {
        std::size_t n = 0;
        for (const auto& g : groups) {
            n += g.members.size();
        }
        return n;
    }
};

inline Embedding group_centroid(const std::vector<EntityRef>& members, const EmbeddingStore& store) {
    std::vector<const Embedding*> vectors;
    vectors.reserve(members.size());
    for (const auto& ref : members) {
        vectors.push_back(&store.at(ref));
    }
    return mean_direction(vectors);
}

/// One table of singleton groups per source.
inline std::vector<WorkingTable> singleton_tables(const EmbeddingStore& store) {
    std::vector<WorkingTable> tables(store.table_count());
    for (std::size_t s = 0; s < store.table_count(); ++s) {
        const auto& rows = store.table(s);
        tables[s].groups.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            tables[s].groups.push_back(
                EntityGroup{{EntityRef{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(r)}}, rows[r]});
        }
    }
    return tables;
}

struct InitialTables {
    EmbeddingStore store;
    std::vector<WorkingTable> tables;
};

/// Embeds every entity on the selected attributes and wraps each one in a
/// singleton group. Rows of one table are never merged here.
inline InitialTables init_working_tables(const Dataset& dataset, const std::vector<std::string>& selected,
                                         const EmbedderSpec& spec, std::size_t parallelism = 1) {
    if (selected.empty()) {
        throw Error(ErrorCode::precondition, "init_working_tables needs at least one selected attribute");
    }
    std::vector<std::string> texts;
    texts.reserve(dataset.entity_count());
    for (const auto& table : dataset.tables()) {
        for (const auto& e : table) {
            texts.push_back(serialize_entity(e, selected));
        }
    }
    auto flat = embed_batch(texts, spec, parallelism);

    std::vector<std::vector<Embedding>> by_source(dataset.table_count());
    std::size_t next = 0;
    for (std::size_t s = 0; s < dataset.table_count(); ++s) {
        auto& rows = by_source[s];
        rows.reserve(dataset.table(s).size());
        for (std::size_t r = 0; r < dataset.table(s).size(); ++r) {
            rows.push_back(std::move(flat[next++]));
        }
    }
    InitialTables out{EmbeddingStore(std::move(by_source)), {}};
    out.tables = singleton_tables(out.store);
    return out;
}

/// Entity-level record of what one merge matched; each matched group pair is
/// logged as (smallest member of left group, smallest member of right group).
struct MergeStats {
    std::uint64_t distance_evals = 0;
    std::vector<std::pair<EntityRef, EntityRef>> matched;
};

/// Merges two working tables: mutual top-K pairs between their group centroids
/// are united transitively, everything unmatched is carried over unchanged.
inline WorkingTable merge_two_tables(const WorkingTable& a, const WorkingTable& b, const EmbeddingStore& store,
                                     const PipelineConfig& cfg, std::uint64_t seed, MergeStats* stats = nullptr,
                                     std::size_t query_parallelism = 1) {
    {
        std::vector<EntityRef> all;
        all.reserve(a.entity_count() + b.entity_count());
        for (const auto* t : {&a, &b}) {
            for (const auto& g : t->groups) {
                all.insert(all.end(), g.members.begin(), g.members.end());
            }
        }
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
            throw Error(ErrorCode::precondition, "merge_two_tables inputs share an entity");
        }
    }

    WorkingTable out;
    out.level = std::max(a.level, b.level) + 1;
    if (a.groups.empty() || b.groups.empty()) {
        out.groups = a.groups;
        out.groups.insert(out.groups.end(), b.groups.begin(), b.groups.end());
    } else {
        std::vector<Embedding> left;
        std::vector<Embedding> right;
        left.reserve(a.groups.size());
        right.reserve(b.groups.size());
        for (const auto& g : a.groups) left.push_back(g.centroid);
        for (const auto& g : b.groups) right.push_back(g.centroid);

        DistanceCounter counter;
        const auto pairs = mutual_topk(left, right, cfg.k, cfg.m, cfg.index, seed, &counter, query_parallelism);

        // one element per group: prior matches are already folded into the groups
        const std::size_t offset = a.groups.size();
        UnionFind sets(offset + b.groups.size());
        for (const auto& p : pairs) {
            sets.unite(p.left, offset + p.right);
        }
        if (stats) {
            stats->distance_evals += counter.value();
            for (const auto& p : pairs) {
                stats->matched.emplace_back(a.groups[p.left].members.front(), b.groups[p.right].members.front());
            }
        }

        auto group_at = [&](std::size_t i) -> const EntityGroup& {
            return i < offset ? a.groups[i] : b.groups[i - offset];
        };
        for (const auto& component : sets.components()) {
            if (component.size() == 1) {
                out.groups.push_back(group_at(component.front()));
                continue;
            }
            EntityGroup merged;
            for (std::size_t i : component) {
                const auto& m = group_at(i).members;
                merged.members.insert(merged.members.end(), m.begin(), m.end());
            }
            std::sort(merged.members.begin(), merged.members.end());
            merged.centroid = group_centroid(merged.members, store);
            out.groups.push_back(std::move(merged));
        }
    }

    std::sort(out.groups.begin(), out.groups.end(), [](const EntityGroup& x, const EntityGroup& y) {
        return x.members.front() < y.members.front();
    });
    return out;
}

struct MergeLevel {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // indices into the level's table list
    std::optional<std::size_t> pass_through;
};

/// Random pairing schedule. At each level the current tables are shuffled with
/// a level-specific seed and paired off in order; with an odd count the table
/// left at the end of the shuffle moves up unmerged. The next level's list is
/// the merged tables in pair order followed by the pass-through.
struct MergePlan {
    std::vector<MergeLevel> levels;
};

inline MergePlan make_merge_plan(std::size_t table_count, std::uint64_t seed) {
    if (table_count == 0) {
        throw Error(ErrorCode::precondition, "cannot plan a merge of zero tables");
    }
    MergePlan plan;
    std::size_t current = table_count;
    while (current > 1) {
        std::vector<std::size_t> order(current);
        for (std::size_t i = 0; i < current; ++i) order[i] = i;
        Rng rng(derive_seed(seed, 0x91, plan.levels.size()));
        fisher_yates(std::span<std::size_t>(order), rng);

        MergeLevel level;
        for (std::size_t i = 0; i + 1 < current; i += 2) {
            level.pairs.emplace_back(order[i], order[i + 1]);
        }
        if (current % 2 == 1) {
            level.pass_through = order.back();
        }
        current = level.pairs.size() + (level.pass_through ? 1 : 0);
        plan.levels.push_back(std::move(level));
    }
    return plan;
}

struct MergeRecord {
    std::size_t level = 0;
    std::size_t pair = 0;
    std::size_t left_groups = 0;
    std::size_t right_groups = 0;
    std::size_t merged_groups = 0;
    std::size_t matched_pairs = 0;
    std::uint64_t distance_evals = 0;
};

/// Everything hierarchical_merge did, in plan order.
struct HierarchyTrace {
    MergePlan plan;
    std::vector<MergeRecord> merges;
    std::vector<std::pair<EntityRef, EntityRef>> matched;
    std::uint64_t distance_evals = 0;

    /// One JSON object per merge: level, pair, table sizes, matched-pair count.
    std::string to_jsonl() const {
        std::string out;
        for (const auto& m : merges) {
            nlohmann::json line = {{"level", m.level},
                                   {"pair", m.pair},
                                   {"left_groups", m.left_groups},
                                   {"right_groups", m.right_groups},
                                   {"merged_groups", m.merged_groups},
                                   {"matched_pairs", m.matched_pairs},
                                   {"distance_evals", m.distance_evals}};
            out += line.dump();
            out += '\n';
        }
        return out;
    }
};

/// Merges the tables two at a time, level by level, until one remains.
/// Merges within a level run on up to cfg.parallelism workers; the result
/// depends only on cfg.seed.
inline WorkingTable hierarchical_merge(std::vector<WorkingTable> tables, const EmbeddingStore& store,
                                       const PipelineConfig& cfg, HierarchyTrace* trace = nullptr) {
    if (tables.empty()) {
        throw Error(ErrorCode::precondition, "hierarchical_merge needs at least one table");
    }
    const auto plan = make_merge_plan(tables.size(), cfg.seed);
    if (trace) {
        trace->plan = plan;
    }

    for (std::size_t level = 0; level < plan.levels.size(); ++level) {
        const auto& step = plan.levels[level];
        std::vector<WorkingTable> next(step.pairs.size());
        std::vector<MergeStats> stats(step.pairs.size());
        const std::size_t query_workers = std::max<std::size_t>(1, cfg.parallelism / step.pairs.size());

        parallel_for(step.pairs.size(), cfg.parallelism, [&](std::size_t p) {
            const auto [l, r] = step.pairs[p];
            next[p] = merge_two_tables(tables[l], tables[r], store, cfg, derive_seed(cfg.seed, level, p), &stats[p],
                                       query_workers);
        });

        if (trace) {
            for (std::size_t p = 0; p < step.pairs.size(); ++p) {
                const auto [l, r] = step.pairs[p];
                trace->merges.push_back(MergeRecord{level, p, tables[l].groups.size(), tables[r].groups.size(),
                                                    next[p].groups.size(), stats[p].matched.size(),
                                                    stats[p].distance_evals});
                trace->matched.insert(trace->matched.end(), stats[p].matched.begin(), stats[p].matched.end());
                trace->distance_evals += stats[p].distance_evals;
            }
        }
        if (step.pass_through) {
            next.push_back(std::move(tables[*step.pass_through]));
        }
        tables = std::move(next);
    }
    return std::move(tables.front());
}

/// Groups of two or more members; singletons are unmatched entities.
inline std::vector<EntityGroup> extract_candidate_tuples(const WorkingTable& final_table) {
    std::vector<EntityGroup> out;
    for (const auto& g : final_table.groups) {
        if (g.members.size() >= 2) {
            out.push_back(g);
        }
    }
    return out;
}

} // namespace mtmatch

#endif
