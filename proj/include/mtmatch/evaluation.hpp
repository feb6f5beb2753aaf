#ifndef MTMATCH_EVALUATION_HPP
#define MTMATCH_EVALUATION_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtmatch/core.hpp"
#include "mtmatch/union_find.hpp"

namespace mtmatch {

template <typename T>
using TupleList = std::vector<std::vector<T>>;

template <typename T>
using PairSet = std::set<std::pair<T, T>>;

struct ScoreReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double pair_precision = 0.0;
    double pair_recall = 0.0;
    double pair_f1 = 0.0;
    std::size_t predicted_tuples = 0;
    std::size_t truth_tuples = 0;
    std::size_t correct_tuples = 0;
    std::size_t predicted_pairs = 0;
    std::size_t truth_pairs = 0;
    std::size_t correct_pairs = 0;

    nlohmann::json to_json() const {
        return {{"precision", precision},           {"recall", recall},
                {"f1", f1},                         {"pair_precision", pair_precision},
                {"pair_recall", pair_recall},       {"pair_f1", pair_f1},
                {"predicted_tuples", predicted_tuples}, {"truth_tuples", truth_tuples},
                {"correct_tuples", correct_tuples}, {"predicted_pairs", predicted_pairs},
                {"truth_pairs", truth_pairs},       {"correct_pairs", correct_pairs}};
    }
};

/// Harmonic mean with 0/0 defined as 0.
inline double f1_score(double precision, double recall) {
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

/// Sorted, de-duplicated copy of each tuple.
template <typename T>
std::set<std::vector<T>> canonical_tuples(const TupleList<T>& tuples) {
    std::set<std::vector<T>> out;
    for (auto t : tuples) {
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        out.insert(std::move(t));
    }
    return out;
}

/// Ground-truth tuples: each of size >= 2, pairwise disjoint.
template <typename T>
class TruthSet {
public:
    TruthSet() = default;

    explicit TruthSet(TupleList<T> tuples) {
        std::set<T> seen;
        for (auto& t : tuples) {
            std::sort(t.begin(), t.end());
            t.erase(std::unique(t.begin(), t.end()), t.end());
            if (t.size() < 2) {
                throw Error(ErrorCode::parse, "truth tuple with fewer than 2 distinct members");
            }
            for (const auto& e : t) {
                if (!seen.insert(e).second) {
                    throw Error(ErrorCode::parse, "truth tuples overlap");
                }
            }
        }
        std::sort(tuples.begin(), tuples.end());
        tuples_ = std::move(tuples);
    }

    const TupleList<T>& tuples() const noexcept { return tuples_; }
    std::size_t size() const noexcept { return tuples_.size(); }

private:
    TupleList<T> tuples_;
};

/// Exact-tuple scoring: a prediction counts only if it equals a truth tuple as a set.
template <typename T>
ScoreReport score_tuples(const TupleList<T>& predicted, const TruthSet<T>& truth) {
    const auto pred = canonical_tuples(predicted);
    const auto gold = canonical_tuples(truth.tuples());
    ScoreReport report;
    report.predicted_tuples = pred.size();
    report.truth_tuples = gold.size();
    for (const auto& t : pred) {
        report.correct_tuples += gold.count(t);
    }
    if (!pred.empty()) {
        report.precision = static_cast<double>(report.correct_tuples) / static_cast<double>(pred.size());
    }
    if (!gold.empty()) {
        report.recall = static_cast<double>(report.correct_tuples) / static_cast<double>(gold.size());
    }
    report.f1 = f1_score(report.precision, report.recall);
    return report;
}

/// Every unordered member pair of every tuple, stored as (smaller, larger).
template <typename T>
PairSet<T> tuples_to_pairs(const TupleList<T>& tuples) {
    PairSet<T> out;
    for (const auto& t : tuples) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (std::size_t j = i + 1; j < t.size(); ++j) {
                if (t[i] == t[j]) {
                    continue;
                }
                out.insert(std::minmax(t[i], t[j]));
            }
        }
    }
    return out;
}

/// Pair-level scoring after expanding both sides into member pairs.
template <typename T>
ScoreReport score_pairs(const TupleList<T>& predicted, const TruthSet<T>& truth) {
    const auto pred = tuples_to_pairs(predicted);
    const auto gold = tuples_to_pairs(truth.tuples());
    ScoreReport report;
    report.predicted_pairs = pred.size();
    report.truth_pairs = gold.size();
    for (const auto& p : pred) {
        report.correct_pairs += gold.count(p);
    }
    if (!pred.empty()) {
        report.pair_precision = static_cast<double>(report.correct_pairs) / static_cast<double>(pred.size());
    }
    if (!gold.empty()) {
        report.pair_recall = static_cast<double>(report.correct_pairs) / static_cast<double>(gold.size());
    }
    report.pair_f1 = f1_score(report.pair_precision, report.pair_recall);
    return report;
}

/// Both tuple-level and pair-level scores.
template <typename T>
ScoreReport score(const TupleList<T>& predicted, const TruthSet<T>& truth) {
    auto report = score_tuples(predicted, truth);
    const auto pairs = score_pairs(predicted, truth);
    report.pair_precision = pairs.pair_precision;
    report.pair_recall = pairs.pair_recall;
    report.pair_f1 = pairs.pair_f1;
    report.predicted_pairs = pairs.predicted_pairs;
    report.truth_pairs = pairs.truth_pairs;
    report.correct_pairs = pairs.correct_pairs;
    return report;
}

/// Groups matched pairs into tuples: connected components of the pair graph
/// over `entities`, size >= 2 only. Pairs touching an entity outside
/// `entities` are ignored. Tuples are sorted, and listed in sorted order.
template <typename T>
TupleList<T> pairs_to_tuples(const PairSet<T>& pairs, const std::vector<T>& entities) {
    std::map<T, std::size_t> id;
    for (const auto& e : entities) {
        id.emplace(e, id.size());
    }
    std::vector<T> by_id(id.size());
    for (const auto& [e, i] : id) {
        by_id[i] = e;
    }

    UnionFind sets(id.size());
    for (const auto& [a, b] : pairs) {
        auto ia = id.find(a);
        auto ib = id.find(b);
        if (ia != id.end() && ib != id.end()) {
            sets.unite(ia->second, ib->second);
        }
    }

    TupleList<T> out;
    for (const auto& component : sets.components()) {
        if (component.size() < 2) {
            continue;
        }
        std::vector<T> tuple;
        for (std::size_t i : component) {
            tuple.push_back(by_id[i]);
        }
        std::sort(tuple.begin(), tuple.end());
        out.push_back(std::move(tuple));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mtmatch

#endif
