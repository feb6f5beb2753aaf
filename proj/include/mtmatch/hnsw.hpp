#ifndef MTMATCH_HNSW_HPP
#define MTMATCH_HNSW_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <vector>

#include "mtmatch/random.hpp"
#include "mtmatch/vector.hpp"

namespace mtmatch {

/// Counts distance evaluations. Shared by concurrent queries.
struct DistanceCounter {
    std::atomic<std::uint64_t> evals{0};

    void add(std::uint64_t n) noexcept { evals.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t value() const noexcept { return evals.load(std::memory_order_relaxed); }
};

struct Neighbor {
    std::size_t id = 0;
    double dist = 0.0;

    bool operator==(const Neighbor&) const = default;
};

/// Total order used everywhere: ascending distance, ties by ascending id.
inline bool closer(const Neighbor& a, const Neighbor& b) noexcept {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
}

/// Row-major block of equal-length vectors.
class VectorSet {
public:
    VectorSet() = default;

    explicit VectorSet(std::span<const Embedding> vectors) {
        if (vectors.empty()) {
            return;
        }
        dim_ = vectors.front().dim();
        require_uniform_dim(vectors, dim_, "index input");
        data_.reserve(vectors.size() * dim_);
        for (const auto& v : vectors) {
            data_.insert(data_.end(), v.values().begin(), v.values().end());
        }
    }

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> row(std::size_t i) const noexcept {
        return std::span<const double>(data_).subspan(i * dim_, dim_);
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// Hierarchical navigable small-world graph over a VectorSet, cosine distance.
///
/// Construction is single-threaded and fully determined by the seed: node
/// levels come from the seeded generator and nodes are inserted in id order.
/// Searches are const and may run concurrently.
class HnswGraph {
public:
    HnswGraph(const VectorSet& data, std::size_t degree, std::size_t ef_construction, std::uint64_t seed,
              DistanceCounter* counter = nullptr)
        : data_(&data), degree_(std::max<std::size_t>(2, degree)),
          ef_construction_(std::max(ef_construction, degree_)) {
        const std::size_t n = data.size();
        levels_.resize(n);
        links_.resize(n);

        Rng rng(seed);
        const double level_mult = 1.0 / std::log(static_cast<double>(degree_));
        std::uint64_t evals = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = 1.0 - uniform_unit(rng); // (0, 1]
            const auto level = static_cast<int>(std::floor(-std::log(u) * level_mult));
            levels_[i] = level;
            links_[i].resize(static_cast<std::size_t>(level) + 1);
            insert(static_cast<std::uint32_t>(i), evals);
        }
        if (counter) {
            counter->add(evals);
        }
    }

    std::vector<Neighbor> search(std::span<const double> query, std::size_t k, std::size_t ef,
                                 DistanceCounter* counter = nullptr) const {
        std::uint64_t evals = 0;
        std::vector<Neighbor> out;
        if (levels_.empty()) {
            return out;
        }
        ef = std::max(ef, k);
        Neighbor ep{entry_, distance(query, entry_, evals)};
        for (int level = max_level_; level > 0; --level) {
            ep = greedy(query, ep, level, evals);
        }
        out = search_layer(query, {ep}, ef, 0, evals);
        if (out.size() > k) {
            out.resize(k);
        }
        if (counter) {
            counter->add(evals);
        }
        return out;
    }

    std::size_t size() const noexcept { return levels_.size(); }
    int max_level() const noexcept { return max_level_; }

private:
    struct Farther {
        bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closer(b, a); }
    };
    struct Nearer {
        bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closer(a, b); }
    };

    double distance(std::span<const double> q, std::size_t id, std::uint64_t& evals) const {
        ++evals;
        return cosine_distance(q, data_->row(id));
    }

    std::size_t max_links(int level) const noexcept { return level == 0 ? 2 * degree_ : degree_; }

    Neighbor greedy(std::span<const double> q, Neighbor ep, int level, std::uint64_t& evals) const {
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::uint32_t next : links_[ep.id][static_cast<std::size_t>(level)]) {
                Neighbor cand{next, distance(q, next, evals)};
                if (closer(cand, ep)) {
                    ep = cand;
                    moved = true;
                }
            }
        }
        return ep;
    }

    /// Best-first search on one layer; returns up to ef results sorted by closer().
    std::vector<Neighbor> search_layer(std::span<const double> q, const std::vector<Neighbor>& entries,
                                       std::size_t ef, int level, std::uint64_t& evals) const {
        std::vector<char> visited(levels_.size(), 0);
        std::priority_queue<Neighbor, std::vector<Neighbor>, Farther> frontier; // pops nearest
        std::priority_queue<Neighbor, std::vector<Neighbor>, Nearer> best;      // pops farthest
        for (const auto& e : entries) {
            if (visited[e.id]) {
                continue;
            }
            visited[e.id] = 1;
            frontier.push(e);
            best.push(e);
        }
        while (best.size() > ef) {
            best.pop();
        }

        while (!frontier.empty()) {
            const Neighbor current = frontier.top();
            if (best.size() >= ef && closer(best.top(), current)) {
                break;
            }
            frontier.pop();
            for (std::uint32_t next : links_[current.id][static_cast<std::size_t>(level)]) {
                if (visited[next]) {
                    continue;
                }
                visited[next] = 1;
                Neighbor cand{next, distance(q, next, evals)};
                if (best.size() < ef || closer(cand, best.top())) {
                    frontier.push(cand);
                    best.push(cand);
                    if (best.size() > ef) {
                        best.pop();
                    }
                }
            }
        }

        std::vector<Neighbor> out;
        out.reserve(best.size());
        while (!best.empty()) {
            out.push_back(best.top());
            best.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// than to every neighbor kept so far; pad with the pruned ones if short.
    std::vector<Neighbor> select_neighbors(const std::vector<Neighbor>& sorted_candidates, std::size_t limit,
                                           std::uint64_t& evals) const {
        std::vector<Neighbor> kept;
        std::vector<Neighbor> pruned;
        for (const auto& cand : sorted_candidates) {
            if (kept.size() >= limit) {
                break;
            }
            bool diverse = true;
            for (const auto& k : kept) {
                if (distance(data_->row(cand.id), k.id, evals) < cand.dist) {
                    diverse = false;
                    break;
                }
            }
            (diverse ? kept : pruned).push_back(cand);
        }
        for (std::size_t i = 0; i < pruned.size() && kept.size() < limit; ++i) {
            kept.push_back(pruned[i]);
        }
        std::sort(kept.begin(), kept.end(), closer);
        return kept;
    }

    void insert(std::uint32_t id, std::uint64_t& evals) {
        const int level = levels_[id];
        if (id == 0) {
            entry_ = 0;
            max_level_ = level;
            return;
        }
        const auto q = data_->row(id);
        Neighbor ep{entry_, distance(q, entry_, evals)};
        for (int l = max_level_; l > level; --l) {
            ep = greedy(q, ep, l, evals);
        }

        std::vector<Neighbor> entries{ep};
        for (int l = std::min(level, max_level_); l >= 0; --l) {
            auto candidates = search_layer(q, entries, ef_construction_, l, evals);
            auto chosen = select_neighbors(candidates, degree_, evals);
            auto& mine = links_[id][static_cast<std::size_t>(l)];
            for (const auto& nb : chosen) {
                mine.push_back(static_cast<std::uint32_t>(nb.id));
                connect(static_cast<std::uint32_t>(nb.id), id, nb.dist, l, evals);
            }
            entries = std::move(candidates);
        }

        if (level > max_level_) {
            max_level_ = level;
            entry_ = id;
        }
    }

    void connect(std::uint32_t from, std::uint32_t to, double dist, int level, std::uint64_t& evals) {
        auto& list = links_[from][static_cast<std::size_t>(level)];
        list.push_back(to);
        const std::size_t limit = max_links(level);
        if (list.size() <= limit) {
            return;
        }
        std::vector<Neighbor> candidates;
        candidates.reserve(list.size());
        const auto base = data_->row(from);
        for (std::uint32_t other : list) {
            candidates.push_back(Neighbor{other, other == to ? dist : distance(base, other, evals)});
        }
        std::sort(candidates.begin(), candidates.end(), closer);
        auto kept = select_neighbors(candidates, limit, evals);
        list.clear();
        for (const auto& nb : kept) {
            list.push_back(static_cast<std::uint32_t>(nb.id));
        }
    }

    const VectorSet* data_;
    std::size_t degree_;
    std::size_t ef_construction_;
    std::vector<int> levels_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::size_t entry_ = 0;
    int max_level_ = 0;
};

} // namespace mtmatch

#endif
