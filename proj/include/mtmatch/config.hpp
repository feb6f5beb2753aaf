#ifndef MTMATCH_CONFIG_HPP
#define MTMATCH_CONFIG_HPP

#include <cstddef>
#include <cstdint>

#include "mtmatch/ann_index.hpp"
#include "mtmatch/core.hpp"
#include "mtmatch/embedding.hpp"

namespace mtmatch {

/// Every tunable of a matching run.
struct PipelineConfig {
    std::size_t k = 1;          // top-K width of the mutual search
    double m = 0.35;            // merge threshold, cosine distance
    double epsilon = 1.0;       // pruning radius, Euclidean distance
    std::size_t min_pts = 2;    // neighborhood size (self included) that makes an entity core
    double gamma = 0.9;         // attribute kept iff its post-shuffle similarity is below this
    double r = 0.2;             // attribute-selection sample ratio
    std::uint64_t seed = 42;
    EmbedderSpec embedder;
    IndexParams index;
    std::size_t parallelism = 1;

    void validate() const {
        if (k < 1) throw Error(ErrorCode::invalid_params, "k must be >= 1");
        if (!(m >= 0.0 && m <= 2.0)) throw Error(ErrorCode::invalid_params, "m must be in [0, 2]");
        if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_params, "epsilon must be > 0");
        if (min_pts < 1) throw Error(ErrorCode::invalid_params, "min_pts must be >= 1");
        if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::invalid_params, "gamma must be in (0, 1)");
        if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::invalid_params, "r must be in (0, 1]");
        if (parallelism < 1) throw Error(ErrorCode::invalid_params, "parallelism must be >= 1");
        embedder.validate();
        index.validate();
    }
};

} // namespace mtmatch

#endif
