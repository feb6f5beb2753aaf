#ifndef MTMATCH_REMOTE_EMBEDDER_HPP
#define MTMATCH_REMOTE_EMBEDDER_HPP

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mtmatch/core.hpp"
#include "mtmatch/vector.hpp"

namespace mtmatch {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;   // starts with '/'
};

inline Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
        throw Error(ErrorCode::invalid_params, "embedder endpoint must be an http:// URL, got '" + url + "'");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return Endpoint{url, "/"};
    }
    return Endpoint{url.substr(0, path_start), url.substr(path_start)};
}

/// Client for an embedding service speaking
///   POST {"texts": [...]}  ->  {"embeddings": [[...], ...]}
/// Texts are sent in batches; every returned vector is re-normalized.
class RemoteEmbedder {
public:
    RemoteEmbedder(std::string endpoint, std::size_t dim, std::size_t batch_size = 64,
                   double timeout_seconds = 30.0)
        : endpoint_(split_endpoint(endpoint)), dim_(dim), batch_size_(batch_size == 0 ? 1 : batch_size),
          timeout_seconds_(timeout_seconds) {}

    std::vector<Embedding> embed(const std::vector<std::string>& texts) const {
        std::vector<Embedding> out;
        out.reserve(texts.size());

        httplib::Client client(endpoint_.origin);
        const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::duration<double>(timeout_seconds_));
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
            const std::size_t end = std::min(texts.size(), begin + batch_size_);
            nlohmann::json request;
            request["texts"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                        texts.begin() + static_cast<std::ptrdiff_t>(end));
            auto response = client.Post(endpoint_.path, request.dump(), "application/json");
            if (!response) {
                throw Error(ErrorCode::remote_unavailable,
                            "embedding service at " + endpoint_.origin + endpoint_.path + " unreachable: " +
                                httplib::to_string(response.error()));
            }
            if (response->status != 200) {
                throw Error(ErrorCode::remote_unavailable,
                            "embedding service returned HTTP " + std::to_string(response->status));
            }

            nlohmann::json body;
            try {
                body = nlohmann::json::parse(response->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::remote_unavailable, std::string("malformed embedding response: ") + e.what());
            }
            const auto it = body.find("embeddings");
            if (it == body.end() || !it->is_array() || it->size() != end - begin) {
                throw Error(ErrorCode::remote_unavailable, "embedding response has wrong shape");
            }
            for (const auto& row : *it) {
                if (!row.is_array() || row.size() != dim_) {
                    throw Error(ErrorCode::dimension_mismatch,
                                "embedding service returned dim " + std::to_string(row.is_array() ? row.size() : 0) +
                                    ", expected " + std::to_string(dim_));
                }
                std::vector<double> raw;
                raw.reserve(dim_);
                for (const auto& v : row) {
                    if (!v.is_number()) {
                        throw Error(ErrorCode::remote_unavailable, "non-numeric embedding component");
                    }
                    raw.push_back(v.get<double>());
                }
                out.push_back(Embedding::normalized(std::move(raw)));
            }
        }
        return out;
    }

private:
    Endpoint endpoint_;
    std::size_t dim_;
    std::size_t batch_size_;
    double timeout_seconds_;
};

} // namespace mtmatch

#endif
