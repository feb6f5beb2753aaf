#ifndef MTMATCH_SYNTHETIC_HPP
#define MTMATCH_SYNTHETIC_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtmatch/core.hpp"
#include "mtmatch/evaluation.hpp"
#include "mtmatch/io.hpp"
#include "mtmatch/random.hpp"

namespace mtmatch {

struct SyntheticSpec {
    std::size_t tables = 4;     // S
    std::size_t rows = 100;     // n, rows per table
    std::size_t clusters = 50;  // planted duplicate groups
    double noise = 0.05;        // per-character perturbation rate of duplicates
    std::uint64_t seed = 7;
};

struct SyntheticData {
    std::vector<RawTable> tables;
    TupleList<EntityRef> truth;
};

namespace detail {

inline std::string pseudo_word(Rng& rng, std::size_t syllables) {
    static constexpr std::string_view onsets[] = {"b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p",
                                                  "r", "s", "t", "v", "w", "z", "br", "ch", "cr", "dr", "fl",
                                                  "gr", "kl", "pr", "sh", "st", "th", "tr"};
    static constexpr std::string_view vowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "ie", "ou", "y"};
    static constexpr std::string_view codas[] = {"", "", "", "n", "r", "s", "l", "x", "m", "nd", "rk", "st"};
    std::string word;
    for (std::size_t s = 0; s < syllables; ++s) {
        word += onsets[uniform_below(rng, std::size(onsets))];
        word += vowels[uniform_below(rng, std::size(vowels))];
        word += codas[uniform_below(rng, std::size(codas))];
    }
    return word;
}

inline std::string pseudo_phrase(Rng& rng, std::size_t min_words, std::size_t max_words) {
    const std::size_t words = min_words + uniform_below(rng, max_words - min_words + 1);
    std::string out;
    for (std::size_t w = 0; w < words; ++w) {
        if (w) out.push_back(' ');
        out += pseudo_word(rng, 2 + uniform_below(rng, 2));
    }
    return out;
}

inline std::string digits(Rng& rng, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(static_cast<char>('0' + uniform_below(rng, 10)));
    }
    return out;
}

/// title, brand, city, code
inline std::vector<std::string> synthetic_record(Rng& rng) {
    std::string title = pseudo_phrase(rng, 4, 6);
    std::string brand = pseudo_word(rng, 2);
    brand[0] = static_cast<char>(brand[0] - 'a' + 'A');
    std::string city = pseudo_phrase(rng, 1, 2);
    std::string code = "sku-" + digits(rng, 7);
    return {std::move(title), std::move(brand), std::move(city), std::move(code)};
}

/// Each character is, with probability `noise`, dropped or swapped with its successor.
inline std::string perturb(const std::string& value, double noise, Rng& rng) {
    if (noise <= 0.0) {
        return value;
    }
    std::string out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (uniform_unit(rng) >= noise) {
            out.push_back(value[i]);
            continue;
        }
        if (uniform_below(rng, 2) == 0 && i + 1 < value.size()) {
            out.push_back(value[i + 1]);
            out.push_back(value[i]);
            ++i;
        }
        // otherwise dropped
    }
    return out;
}

} // namespace detail

inline const std::vector<std::string>& synthetic_schema() {
    static const std::vector<std::string> schema{"title", "brand", "city", "code"};
    return schema;
}

/// S tables of n rows with `clusters` planted duplicate groups.
///
/// Every cluster has a prototype record; its members are perturbed copies
/// placed on 2..S distinct tables (uniform size). All remaining rows are
/// independent records. Rows are shuffled within each table.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.tables < 2 || spec.rows < 1) {
        throw Error(ErrorCode::invalid_params, "need at least 2 tables of at least 1 row");
    }
    if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) {
        throw Error(ErrorCode::invalid_params, "noise must be in [0, 1]");
    }
    const double mean_cluster_size = static_cast<double>(2 + spec.tables) / 2.0;
    if (static_cast<double>(spec.clusters) * mean_cluster_size > static_cast<double>(spec.tables * spec.rows)) {
        throw Error(ErrorCode::invalid_params, "clusters * mean cluster size exceeds S * n");
    }

    Rng rng(derive_seed(spec.seed, 0x5e));
    std::vector<std::vector<std::vector<std::string>>> rows(spec.tables);
    std::vector<std::vector<std::size_t>> owner(spec.tables);
    constexpr std::size_t none = static_cast<std::size_t>(-1);

    for (std::size_t c = 0; c < spec.clusters; ++c) {
        std::vector<std::size_t> open;
        for (std::size_t t = 0; t < spec.tables; ++t) {
            if (rows[t].size() < spec.rows) open.push_back(t);
        }
        if (open.size() < 2) {
            throw Error(ErrorCode::invalid_params, "not enough free rows to place every cluster");
        }
        fisher_yates(std::span<std::size_t>(open), rng);
        std::size_t size = 2 + static_cast<std::size_t>(uniform_below(rng, spec.tables - 1));
        size = std::min(size, open.size());

        const auto prototype = detail::synthetic_record(rng);
        for (std::size_t i = 0; i < size; ++i) {
            std::vector<std::string> copy;
            for (const auto& v : prototype) copy.push_back(detail::perturb(v, spec.noise, rng));
            rows[open[i]].push_back(std::move(copy));
            owner[open[i]].push_back(c);
        }
    }

    SyntheticData data;
    data.truth.resize(spec.clusters);
    for (std::size_t t = 0; t < spec.tables; ++t) {
        while (rows[t].size() < spec.rows) {
            rows[t].push_back(detail::synthetic_record(rng));
            owner[t].push_back(none);
        }
        std::vector<std::size_t> perm(rows[t].size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        fisher_yates(std::span<std::size_t>(perm), rng);

        RawTable table;
        table.name = "table_" + std::to_string(t);
        table.header = synthetic_schema();
        for (std::size_t r = 0; r < perm.size(); ++r) {
            table.rows.push_back(rows[t][perm[r]]);
            if (owner[t][perm[r]] != none) {
                data.truth[owner[t][perm[r]]].push_back(
                    EntityRef{static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(r)});
            }
        }
        data.tables.push_back(std::move(table));
    }
    for (auto& tuple : data.truth) std::sort(tuple.begin(), tuple.end());
    std::sort(data.truth.begin(), data.truth.end());
    return data;
}

struct SyntheticFiles {
    std::vector<std::filesystem::path> tables;
    std::filesystem::path truth;
};

/// Writes table_<i>.csv and truth.jsonl into dir.
inline SyntheticFiles write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
    SyntheticFiles files;
    for (std::size_t t = 0; t < data.tables.size(); ++t) {
        auto path = dir / ("table_" + std::to_string(t) + ".csv");
        write_file(path, format_csv(data.tables[t].header, data.tables[t].rows));
        files.tables.push_back(std::move(path));
    }
    files.truth = dir / "truth.jsonl";
    write_file(files.truth, format_truth_jsonl(data.truth));
    return files;
}

} // namespace mtmatch

#endif
