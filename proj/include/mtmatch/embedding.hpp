#ifndef MTMATCH_EMBEDDING_HPP
#define MTMATCH_EMBEDDING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtmatch/core.hpp"
#include "mtmatch/parallel.hpp"
#include "mtmatch/random.hpp"
#include "mtmatch/remote_embedder.hpp"
#include "mtmatch/vector.hpp"

namespace mtmatch {

enum class EmbedderKind { hashing, remote };

inline const char* to_string(EmbedderKind kind) {
    return kind == EmbedderKind::hashing ? "hashing" : "remote";
}

inline EmbedderKind parse_embedder_kind(std::string_view text) {
    if (text == "hashing") return EmbedderKind::hashing;
    if (text == "remote") return EmbedderKind::remote;
    throw Error(ErrorCode::invalid_params, "unknown embedder '" + std::string(text) + "'");
}

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::hashing;
    std::size_t dim = 512;
    std::size_t ngram_lo = 2;
    std::size_t ngram_hi = 4;
    // Map every ASCII digit to '0' before hashing, so codes like "wom14513028"
    // and "wom94369364" share their n-grams.
    bool fold_digits = true;
    std::string endpoint;
    std::size_t batch_size = 64;
    double timeout_seconds = 30.0;

    void validate() const {
        if (dim < 8) {
            throw Error(ErrorCode::invalid_params, "embedder dim must be >= 8");
        }
        if (kind == EmbedderKind::hashing && (ngram_lo < 1 || ngram_lo > ngram_hi)) {
            throw Error(ErrorCode::invalid_params, "ngram range must satisfy 1 <= lo <= hi");
        }
        if ((kind == EmbedderKind::remote) != !endpoint.empty()) {
            throw Error(ErrorCode::invalid_params, "endpoint is required iff embedder kind is remote");
        }
    }
};

/// Projects the selected attributes of an entity to one normalized line of text:
/// values only (no attribute names) in schema order, lowercased, whitespace
/// runs collapsed to one space and trimmed.
inline std::string serialize_entity(const Entity& entity, const std::vector<std::string>& selected) {
    if (selected.empty()) {
        throw Error(ErrorCode::precondition, "serialize_entity needs at least one selected attribute");
    }
    for (const auto& name : selected) {
        if (std::none_of(entity.values.begin(), entity.values.end(),
                         [&](const Attribute& a) { return a.name == name; })) {
            throw Error(ErrorCode::precondition, "selected attribute '" + name + "' is not in the schema");
        }
    }

    std::string out;
    bool pending_space = false;
    for (const auto& attr : entity.values) {
        if (std::find(selected.begin(), selected.end(), attr.name) == selected.end()) {
            continue;
        }
        pending_space = !out.empty();
        for (char raw : attr.value) {
            const auto c = static_cast<unsigned char>(raw);
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
                pending_space = !out.empty();
                continue;
            }
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : raw);
        }
    }
    return out;
}

/// Character n-gram feature hashing with a sign bit, then L2 normalization.
class HashingEmbedder {
public:
    explicit HashingEmbedder(const EmbedderSpec& spec)
        : dim_(spec.dim), lo_(spec.ngram_lo), hi_(spec.ngram_hi), fold_digits_(spec.fold_digits) {}

    Embedding embed(std::string_view text) const {
        std::vector<double> raw(dim_, 0.0);
        if (!text.empty()) {
            std::string padded;
            padded.reserve(text.size() + 2);
            padded.push_back(' ');
            for (char c : text) {
                padded.push_back(fold_digits_ && c >= '0' && c <= '9' ? '0' : c);
            }
            padded.push_back(' ');

            for (std::size_t n = lo_; n <= hi_; ++n) {
                for (std::size_t i = 0; i + n <= padded.size(); ++i) {
                    const std::uint64_t h = hash_gram(std::string_view(padded).substr(i, n));
                    raw[h % dim_] += (h >> 63) ? -1.0 : 1.0;
                }
            }
        }
        return Embedding::normalized(std::move(raw));
    }

    /// FNV-1a followed by a splitmix finalizer; stable across platforms.
    static std::uint64_t hash_gram(std::string_view gram) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : gram) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return splitmix64(h);
    }

private:
    std::size_t dim_;
    std::size_t lo_;
    std::size_t hi_;
    bool fold_digits_;
};

/// One unit vector per input text, in input order.
inline std::vector<Embedding> embed_batch(const std::vector<std::string>& texts, const EmbedderSpec& spec,
                                          std::size_t parallelism = 1) {
    spec.validate();
    if (spec.kind == EmbedderKind::remote) {
        return RemoteEmbedder(spec.endpoint, spec.dim, spec.batch_size, spec.timeout_seconds).embed(texts);
    }
    HashingEmbedder embedder(spec);
    std::vector<Embedding> out(texts.size());
    constexpr std::size_t chunk = 256;
    const std::size_t chunks = (texts.size() + chunk - 1) / chunk;
    parallel_for(chunks, parallelism, [&](std::size_t c) {
        const std::size_t end = std::min(texts.size(), (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            out[i] = embedder.embed(texts[i]);
        }
    });
    return out;
}

struct AttributeScore {
    std::string name;
    double significance = 0.0; // mean cosine similarity between original and shuffled embeddings
    bool selected = false;
};

struct AttributeReport {
    std::vector<AttributeScore> attributes;
    std::size_t sample_size = 0;
    bool fallback = false; // nothing cleared the threshold, so everything was selected

    std::vector<std::string> selected() const {
        std::vector<std::string> out;
        for (const auto& a : attributes) {
            if (a.selected) {
                out.push_back(a.name);
            }
        }
        return out;
    }
};

/// Scores every attribute by how much shuffling its column moves the entity
/// embeddings, and keeps those whose mean post-shuffle similarity is below gamma.
///
/// A ceil(r*N) row sample of the concatenated tables is embedded with all
/// attributes. Each column is then permuted (seeded Fisher-Yates) and the
/// sample re-embedded. High similarity means the attribute barely shapes the
/// representation and is dropped.
inline AttributeReport select_attributes(const Dataset& dataset, const EmbedderSpec& spec, double r, double gamma,
                                         std::uint64_t seed, std::size_t parallelism = 1) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw Error(ErrorCode::invalid_params, "sampling ratio r must be in (0, 1]");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error(ErrorCode::invalid_params, "gamma must be in (0, 1)");
    }
    spec.validate();

    std::vector<const Entity*> all;
    all.reserve(dataset.entity_count());
    for (const auto& table : dataset.tables()) {
        for (const auto& e : table) {
            all.push_back(&e);
        }
    }
    const std::size_t total = all.size();
    const auto wanted = static_cast<std::size_t>(std::ceil(r * static_cast<double>(total) - 1e-9));
    const std::size_t count = std::clamp<std::size_t>(wanted, 1, total);

    Rng sampler(derive_seed(seed, 0x5a3b1e));
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(sampler, total - i));
        std::swap(all[i], all[j]);
    }
    all.resize(count);

    const auto& schema = dataset.schema();
    std::vector<std::string> original_texts;
    original_texts.reserve(count);
    for (const Entity* e : all) {
        original_texts.push_back(serialize_entity(*e, schema));
    }
    const auto original = embed_batch(original_texts, spec, parallelism);

    AttributeReport report;
    report.sample_size = count;
    report.attributes.resize(schema.size());

    const bool remote = spec.kind == EmbedderKind::remote;
    parallel_for(schema.size(), remote ? 1 : parallelism, [&](std::size_t a) {
        std::vector<std::string> column;
        column.reserve(count);
        for (const Entity* e : all) {
            column.push_back(e->values[a].value);
        }
        Rng shuffler(derive_seed(seed, 0x5f1e, a));
        fisher_yates(std::span<std::string>(column), shuffler);

        std::vector<std::string> texts;
        texts.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            Entity shuffled = *all[i];
            shuffled.values[a].value = column[i];
            texts.push_back(serialize_entity(shuffled, schema));
        }
        const auto moved = embed_batch(texts, spec, 1);

        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            sum += dot(original[i].values(), moved[i].values());
        }
        auto& score = report.attributes[a];
        score.name = schema[a];
        score.significance = sum / static_cast<double>(count);
        score.selected = score.significance < gamma;
    });

    if (std::none_of(report.attributes.begin(), report.attributes.end(),
                     [](const AttributeScore& s) { return s.selected; })) {
        report.fallback = true;
        for (auto& s : report.attributes) {
            s.selected = true;
        }
    }
    return report;
}

} // namespace mtmatch

#endif
