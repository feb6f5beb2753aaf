#ifndef MTMATCH_UNION_FIND_HPP
#define MTMATCH_UNION_FIND_HPP

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace mtmatch {

/// Disjoint sets over [0, n) with path halving and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (size_[a] < size_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    std::size_t size() const noexcept { return parent_.size(); }

    /// Members of each set, sets ordered by their smallest element.
    std::vector<std::vector<std::size_t>> components() {
        std::vector<std::size_t> slot(parent_.size(), parent_.size());
        std::vector<std::vector<std::size_t>> out;
        for (std::size_t i = 0; i < parent_.size(); ++i) {
            const std::size_t root = find(i);
            if (slot[root] == parent_.size()) {
                slot[root] = out.size();
                out.emplace_back();
            }
            out[slot[root]].push_back(i);
        }
        return out;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

} // namespace mtmatch

#endif
