#ifndef MTMATCH_ANN_INDEX_HPP
#define MTMATCH_ANN_INDEX_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtmatch/core.hpp"
#include "mtmatch/hnsw.hpp"
#include "mtmatch/parallel.hpp"
#include "mtmatch/random.hpp"
#include "mtmatch/vector.hpp"

namespace mtmatch {

enum class IndexBackend { exact, graph };

inline const char* to_string(IndexBackend backend) { return backend == IndexBackend::exact ? "exact" : "graph"; }

inline IndexBackend parse_index_backend(std::string_view text) {
    if (text == "exact") return IndexBackend::exact;
    if (text == "graph") return IndexBackend::graph;
    throw Error(ErrorCode::invalid_params, "unknown index backend '" + std::string(text) + "'");
}

struct IndexParams {
    IndexBackend backend = IndexBackend::graph;
    std::size_t graph_degree = 16;
    std::size_t ef_construction = 200;
    std::size_t ef_search = 64;
    std::size_t exact_cutover = 1024; // sets this small are searched exhaustively

    void validate() const {
        if (graph_degree < 2) {
            throw Error(ErrorCode::invalid_params, "graph_degree must be >= 2");
        }
        if (ef_construction < 1 || ef_search < 1) {
            throw Error(ErrorCode::invalid_params, "ef parameters must be >= 1");
        }
    }
};

/// Immutable k-NN index under cosine distance. Exhaustive when the backend is
/// exact or the set has at most exact_cutover items, HNSW otherwise.
class Index {
public:
    static Index build(std::span<const Embedding> vectors, const IndexParams& params, std::uint64_t seed,
                       DistanceCounter* counter = nullptr) {
        params.validate();
        if (vectors.empty()) {
            throw Error(ErrorCode::precondition, "cannot index an empty vector set");
        }
        Index index;
        index.params_ = params;
        index.data_ = std::make_shared<const VectorSet>(vectors);
        if (params.backend == IndexBackend::graph && vectors.size() > params.exact_cutover) {
            index.graph_ = std::make_shared<const HnswGraph>(*index.data_, params.graph_degree,
                                                             params.ef_construction, seed, counter);
        }
        return index;
    }

    /// Up to k nearest items, ascending by distance, ties by ascending id.
    std::vector<Neighbor> query(std::span<const double> q, std::size_t k, DistanceCounter* counter = nullptr) const {
        if (k < 1) {
            throw Error(ErrorCode::precondition, "k must be >= 1");
        }
        if (q.size() != data_->dim()) {
            throw Error(ErrorCode::dimension_mismatch,
                        "query dim " + std::to_string(q.size()) + " != index dim " + std::to_string(data_->dim()));
        }
        if (graph_) {
            return graph_->search(q, k, std::max(params_.ef_search, 4 * k), counter);
        }

        const std::size_t n = data_->size();
        std::vector<Neighbor> all(n);
        for (std::size_t i = 0; i < n; ++i) {
            all[i] = Neighbor{i, cosine_distance(q, data_->row(i))};
        }
        if (counter) {
            counter->add(n);
        }
        const std::size_t take = std::min(k, n);
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), closer);
        all.resize(take);
        return all;
    }

    std::vector<Neighbor> query(const Embedding& q, std::size_t k, DistanceCounter* counter = nullptr) const {
        return query(q.values(), k, counter);
    }

    std::size_t size() const noexcept { return data_ ? data_->size() : 0; }
    std::size_t dim() const noexcept { return data_ ? data_->dim() : 0; }
    bool is_exact() const noexcept { return !graph_; }

private:
    Index() = default;

    IndexParams params_;
    std::shared_ptr<const VectorSet> data_;
    std::shared_ptr<const HnswGraph> graph_;
};

inline Index build_index(std::span<const Embedding> vectors, const IndexParams& params, std::uint64_t seed,
                         DistanceCounter* counter = nullptr) {
    return Index::build(vectors, params, seed, counter);
}

inline std::vector<Neighbor> query_topk(const Index& index, const Embedding& query, std::size_t k,
                                        DistanceCounter* counter = nullptr) {
    return index.query(query, k, counter);
}

struct MutualPair {
    std::size_t left = 0;
    std::size_t right = 0;
    double dist = 0.0;

    bool operator==(const MutualPair&) const = default;
};

/// All (i, j) with j in topK(left[i]) over `right`, i in topK(right[j]) over
/// `left`, and cosine distance <= m. Sorted by (i, j). m = 0 turns matching
/// off entirely, exact duplicates included; the searches still run.
inline std::vector<MutualPair> mutual_topk(std::span<const Embedding> left, std::span<const Embedding> right,
                                           std::size_t k, double m, const IndexParams& params, std::uint64_t seed,
                                           DistanceCounter* counter = nullptr, std::size_t parallelism = 1) {
    if (left.empty() || right.empty()) {
        throw Error(ErrorCode::precondition, "mutual_topk needs two non-empty sets");
    }
    if (k < 1) {
        throw Error(ErrorCode::precondition, "k must be >= 1");
    }
    if (left.front().dim() != right.front().dim()) {
        throw Error(ErrorCode::dimension_mismatch, "left and right embeddings differ in dimension");
    }

    const auto right_index = Index::build(right, params, derive_seed(seed, 0x71), counter);
    const auto left_index = Index::build(left, params, derive_seed(seed, 0x72), counter);

    std::vector<std::vector<Neighbor>> of_left(left.size());
    std::vector<std::vector<Neighbor>> of_right(right.size());
    parallel_for(left.size(), parallelism,
                 [&](std::size_t i) { of_left[i] = right_index.query(left[i], k, counter); });
    parallel_for(right.size(), parallelism,
                 [&](std::size_t j) { of_right[j] = left_index.query(right[j], k, counter); });

    std::vector<MutualPair> out;
    for (std::size_t i = 0; i < left.size(); ++i) {
        for (const auto& nb : of_left[i]) {
            if (m <= 0.0 || nb.dist > m) {
                continue;
            }
            const auto& back = of_right[nb.id];
            if (std::any_of(back.begin(), back.end(), [&](const Neighbor& b) { return b.id == i; })) {
                out.push_back(MutualPair{i, nb.id, nb.dist});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const MutualPair& a, const MutualPair& b) {
        return a.left < b.left || (a.left == b.left && a.right < b.right);
    });
    return out;
}

} // namespace mtmatch

#endif
