#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mtmatch/mtmatch.hpp"

using namespace mtmatch;

namespace {

// Local stand-in for an embedding service: returns the hashing embedding of
// each text scaled by 3 (so the client must re-normalize), optionally with a
// wrong dimension or an error status.
class FakeService {
public:
    explicit FakeService(std::size_t dim_out, int status = 200) : dim_out_(dim_out), status_(status) {
        server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            if (status_ != 200) {
                res.status = status_;
                return;
            }
            auto body = nlohmann::json::parse(req.body);
            EmbedderSpec spec;
            spec.dim = dim_out_;
            nlohmann::json out;
            out["embeddings"] = nlohmann::json::array();
            for (const auto& e : embed_batch(body["texts"].get<std::vector<std::string>>(), spec)) {
                std::vector<double> v(e.values().begin(), e.values().end());
                for (auto& x : v) x *= 3.0;
                out["embeddings"].push_back(v);
            }
            res.set_content(out.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeService() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }
    int requests() const { return requests_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::size_t dim_out_;
    int status_;
    std::atomic<int> requests_{0};
};

EmbedderSpec remote_spec(const std::string& url, std::size_t dim) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::remote;
    spec.endpoint = url;
    spec.dim = dim;
    spec.batch_size = 4;
    spec.timeout_seconds = 5;
    return spec;
}

} // namespace

TEST(RemoteEmbedder, BatchesAndNormalizes) {
    FakeService service(32);
    std::vector<std::string> texts{"a", "bb", "ccc", "dddd", "eeeee", "ffffff", "g", "h", "i", "j"};
    auto vectors = embed_batch(texts, remote_spec(service.url(), 32));
    ASSERT_EQ(vectors.size(), texts.size());
    EXPECT_EQ(service.requests(), 3);
    EmbedderSpec local;
    local.dim = 32;
    auto expected = embed_batch(texts, local);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        EXPECT_NEAR(vectors[i].norm(), 1.0, 1e-9);
        EXPECT_NEAR(cosine_distance(vectors[i], expected[i]), 0.0, 1e-12);
    }
}

TEST(RemoteEmbedder, WrongDimension) {
    FakeService service(16);
    try {
        embed_batch({"x"}, remote_spec(service.url(), 32));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
    }
}

TEST(RemoteEmbedder, ServerErrorIsUnavailable) {
    FakeService service(16, 503);
    try {
        embed_batch({"x"}, remote_spec(service.url(), 16));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::remote_unavailable);
    }
}

TEST(RemoteEmbedder, NoServerIsUnavailable) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    try {
        auto spec = remote_spec("http://127.0.0.1:" + std::to_string(port) + "/embed", 16);
        spec.timeout_seconds = 1;
        embed_batch({"x"}, spec);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::remote_unavailable);
    }
}

TEST(RemoteEmbedder, EndpointMustBeHttp) {
    EXPECT_THROW(split_endpoint("ftp://x/y"), Error);
    auto e = split_endpoint("http://host:9/a/b");
    EXPECT_EQ(e.origin, "http://host:9");
    EXPECT_EQ(e.path, "/a/b");
}
