#ifndef MTMATCH_PRUNING_HPP
#define MTMATCH_PRUNING_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mtmatch/core.hpp"
#include "mtmatch/merging.hpp"
#include "mtmatch/parallel.hpp"
#include "mtmatch/vector.hpp"

namespace mtmatch {

enum class EntityClass { core, reachable, outlier };

inline const char* to_string(EntityClass c) {
    switch (c) {
    case EntityClass::core: return "core";
    case EntityClass::reachable: return "reachable";
    case EntityClass::outlier: return "outlier";
    }
    return "?";
}

/// Density classes of a tuple's members, as positions into the member list.
struct Classification {
    std::vector<EntityClass> labels;
    std::vector<std::size_t> core;
    std::vector<std::size_t> reachable;
    std::vector<std::size_t> outlier;
};

/// Classifies n points given a pairwise distance function.
///
/// The epsilon-neighborhood of a point includes the point itself. A point is
/// core when its neighborhood holds at least min_pts points, reachable when it
/// is not core but has a core point within epsilon, and an outlier otherwise.
/// Reachability is a single hop from a core point.
template <typename Distance>
Classification classify_by_distance(std::size_t n, Distance&& distance, double epsilon, std::size_t min_pts) {
    if (n < 2) {
        throw Error(ErrorCode::tuple_too_small, "a tuple needs at least 2 members to be classified");
    }
    if (!(epsilon > 0.0)) {
        throw Error(ErrorCode::invalid_params, "epsilon must be > 0");
    }
    if (min_pts < 1) {
        throw Error(ErrorCode::invalid_params, "min_pts must be >= 1");
    }

    // within[i * n + j]: j lies in i's epsilon-neighborhood
    std::vector<char> within(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        within[i * n + i] = 1;
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool close = distance(i, j) <= epsilon;
            within[i * n + j] = close;
            within[j * n + i] = close;
        }
    }

    Classification out;
    out.labels.assign(n, EntityClass::outlier);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            count += static_cast<std::size_t>(within[i * n + j]);
        }
        if (count >= min_pts) {
            out.labels[i] = EntityClass::core;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (out.labels[i] == EntityClass::core) {
            out.core.push_back(i);
            continue;
        }
        bool near_core = false;
        for (std::size_t j = 0; j < n && !near_core; ++j) {
            near_core = within[i * n + j] && out.labels[j] == EntityClass::core;
        }
        if (near_core) {
            out.labels[i] = EntityClass::reachable;
            out.reachable.push_back(i);
        } else {
            out.outlier.push_back(i);
        }
    }
    return out;
}

/// Euclidean-distance classification of embedded tuple members.
inline Classification classify_entities(std::span<const Embedding> members, double epsilon, std::size_t min_pts) {
    return classify_by_distance(
        members.size(), [&](std::size_t i, std::size_t j) { return euclidean_distance(members[i], members[j]); },
        epsilon, min_pts);
}

/// Drops the outliers of every tuple. Tuples left with fewer than two members
/// disappear; untouched tuples are returned as-is; order is preserved.
inline std::vector<EntityGroup> prune_tuples(const std::vector<EntityGroup>& candidates, const EmbeddingStore& store,
                                             double epsilon, std::size_t min_pts, std::size_t parallelism = 1) {
    std::vector<std::optional<EntityGroup>> slots(candidates.size());
    parallel_for(candidates.size(), parallelism, [&](std::size_t t) {
        const auto& group = candidates[t];
        if (group.members.size() < 2) {
            return;
        }
        std::vector<Embedding> vectors;
        vectors.reserve(group.members.size());
        for (const auto& ref : group.members) {
            vectors.push_back(store.at(ref));
        }
        const auto classes = classify_entities(vectors, epsilon, min_pts);
        if (classes.outlier.empty()) {
            slots[t] = group;
            return;
        }
        EntityGroup kept;
        for (std::size_t i = 0; i < group.members.size(); ++i) {
            if (classes.labels[i] != EntityClass::outlier) {
                kept.members.push_back(group.members[i]);
            }
        }
        if (kept.members.size() >= 2) {
            kept.centroid = group_centroid(kept.members, store);
            slots[t] = std::move(kept);
        }
    });

    std::vector<EntityGroup> out;
    for (auto& slot : slots) {
        if (slot) {
            out.push_back(std::move(*slot));
        }
    }
    return out;
}

} // namespace mtmatch

#endif
