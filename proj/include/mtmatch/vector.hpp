#ifndef MTMATCH_VECTOR_HPP
#define MTMATCH_VECTOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mtmatch/core.hpp"

namespace mtmatch {

/// Unit-L2-norm embedding. Construction normalizes; a zero (or non-finite)
/// raw vector maps to the basis vector e_0 so every instance is unit length.
class Embedding {
public:
    Embedding() = default;

    static Embedding normalized(std::vector<double> raw) {
        if (raw.empty()) {
            throw Error(ErrorCode::dimension_mismatch, "embedding must have dim >= 1");
        }
        double sq = 0.0;
        bool finite = true;
        for (double v : raw) {
            finite = finite && std::isfinite(v);
            sq += v * v;
        }
        Embedding out;
        if (!finite || sq == 0.0 || !std::isfinite(sq)) {
            std::fill(raw.begin(), raw.end(), 0.0);
            raw[0] = 1.0;
        } else {
            const double inv = 1.0 / std::sqrt(sq);
            for (double& v : raw) {
                v *= inv;
            }
        }
        out.data_ = std::move(raw);
        return out;
    }

    static Embedding basis(std::size_t dim, std::size_t axis = 0) {
        std::vector<double> raw(dim, 0.0);
        raw.at(axis) = 1.0;
        Embedding out;
        out.data_ = std::move(raw);
        return out;
    }

    std::size_t dim() const noexcept { return data_.size(); }
    std::span<const double> values() const noexcept { return data_; }
    double operator[](std::size_t i) const { return data_[i]; }

    double norm() const {
        double sq = 0.0;
        for (double v : data_) {
            sq += v * v;
        }
        return std::sqrt(sq);
    }

    bool operator==(const Embedding&) const = default;

private:
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

/// 1 - <a,b> on unit vectors, clamped to [0, 2].
inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
    return std::clamp(1.0 - dot(a, b), 0.0, 2.0);
}

inline double cosine_distance(const Embedding& a, const Embedding& b) {
    return cosine_distance(a.values(), b.values());
}

inline double euclidean_distance(const Embedding& a, const Embedding& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

inline void require_uniform_dim(std::span<const Embedding> vectors, std::size_t dim, const char* what) {
    for (const auto& v : vectors) {
        if (v.dim() != dim) {
            throw Error(ErrorCode::dimension_mismatch,
                        std::string(what) + ": expected dim " + std::to_string(dim) + ", got " +
                            std::to_string(v.dim()));
        }
    }
}

/// Normalized sum of the given vectors (the direction of their mean).
inline Embedding mean_direction(std::span<const Embedding* const> members) {
    if (members.empty()) {
        throw Error(ErrorCode::precondition, "mean of an empty vector set");
    }
    std::vector<double> sum(members.front()->dim(), 0.0);
    for (const Embedding* e : members) {
        if (e->dim() != sum.size()) {
            throw Error(ErrorCode::dimension_mismatch, "mixed embedding dimensions in one group");
        }
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += (*e)[i];
        }
    }
    return Embedding::normalized(std::move(sum));
}

} // namespace mtmatch

#endif
