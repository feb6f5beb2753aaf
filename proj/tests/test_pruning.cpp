#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "mtmatch/mtmatch.hpp"
#include "oracles.hpp"

using namespace mtmatch;

namespace {

// points on a plane embedded in 3-d, then normalized; callers pick coordinates
// so the resulting Euclidean distances are the ones under test
Embedding unit_at_angle(double theta) { return Embedding::normalized({std::cos(theta), std::sin(theta), 0.0}); }

std::vector<oracle::Label> labels(const Classification& c) {
    std::vector<oracle::Label> out;
    for (auto l : c.labels)
        out.push_back(l == EntityClass::core ? oracle::Label::core
                      : l == EntityClass::reachable ? oracle::Label::reachable
                                                    : oracle::Label::outlier);
    return out;
}

EntityGroup group_of(std::uint32_t source, std::size_t count, const EmbeddingStore& store) {
    EntityGroup g;
    for (std::uint32_t r = 0; r < count; ++r) g.members.push_back(EntityRef{source, r});
    g.centroid = group_centroid(g.members, store);
    return g;
}

} // namespace

TEST(Classify, IdenticalPairBothCore) {
    std::vector<Embedding> x{Embedding::basis(4, 0), Embedding::basis(4, 0)};
    for (double eps : {1e-9, 0.5, 2.0}) {
        auto c = classify_entities(x, eps, 2);
        EXPECT_EQ(c.core, (std::vector<std::size_t>{0, 1}));
    }
}

TEST(Classify, FarMemberIsOutlier) {
    std::vector<Embedding> x{unit_at_angle(0.0), unit_at_angle(0.1), unit_at_angle(2.0)};
    auto c = classify_entities(x, 0.5, 2);
    EXPECT_EQ(c.core, (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(c.reachable.empty());
    EXPECT_EQ(c.outlier, (std::vector<std::size_t>{2}));
}

TEST(Classify, ChainCenterIsCore) {
    // a, b, c on an arc with d(a,b) = d(b,c) = eps and d(a,c) > eps
    const double step = 0.3;
    std::vector<Embedding> x{unit_at_angle(0.0), unit_at_angle(step), unit_at_angle(2 * step)};
    const double eps = std::max(oracle::euclid(x[0], x[1]), oracle::euclid(x[1], x[2]));
    ASSERT_GT(oracle::euclid(x[0], x[2]), eps);
    auto c = classify_entities(x, eps, 3);
    EXPECT_EQ(labels(c), oracle::classify(x, eps, 3));
    EXPECT_EQ(c.core, (std::vector<std::size_t>{1}));
    EXPECT_EQ(c.reachable, (std::vector<std::size_t>{0, 2}));
}

TEST(Classify, MatchesOracleAndPartitions) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 150; ++trial) {
        auto x = oracle::clumpy_set(rng, 2 + rng() % 29, 8 + rng() % 16);
        double eps = 0.05 + 0.3 * double(rng() % 6);
        if (rng() % 3 == 0) eps = oracle::euclid(x[rng() % x.size()], x[rng() % x.size()]) + 1e-12;
        const std::size_t min_pts = 1 + rng() % 5;
        auto c = classify_entities(x, eps, min_pts);
        EXPECT_EQ(labels(c), oracle::classify(x, eps, min_pts));
        std::vector<std::size_t> all = c.core;
        all.insert(all.end(), c.reachable.begin(), c.reachable.end());
        all.insert(all.end(), c.outlier.begin(), c.outlier.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expected(x.size());
        std::iota(expected.begin(), expected.end(), 0);
        EXPECT_EQ(all, expected);

        auto wider = classify_entities(x, eps * 1.5, min_pts);
        for (auto i : c.core) EXPECT_EQ(wider.labels[i], EntityClass::core);
    }
}

TEST(Classify, MinPtsOneMakesEveryoneCore) {
    std::mt19937_64 rng(32);
    auto x = oracle::clumpy_set(rng, 20, 10);
    auto c = classify_entities(x, 1e-6, 1);
    EXPECT_EQ(c.core.size(), x.size());
}

TEST(Classify, Errors) {
    std::vector<Embedding> one{Embedding::basis(2, 0)};
    try {
        classify_entities(one, 1.0, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::tuple_too_small);
    }
    std::vector<Embedding> two{Embedding::basis(2, 0), Embedding::basis(2, 1)};
    EXPECT_THROW(classify_entities(two, 0.0, 2), Error);
    EXPECT_THROW(classify_entities(two, 1.0, 0), Error);
}

TEST(PruneTuples, AllOutliersDropped) {
    EmbeddingStore store({{Embedding::basis(3, 0), Embedding::basis(3, 1), Embedding::basis(3, 2)}});
    auto pruned = prune_tuples({group_of(0, 3, store)}, store, 0.5, 2);
    EXPECT_TRUE(pruned.empty());
}

TEST(PruneTuples, OnlyChangedTupleDiffers) {
    EmbeddingStore store({{unit_at_angle(0.0), unit_at_angle(0.05)},
                          {unit_at_angle(1.0), unit_at_angle(1.02), unit_at_angle(2.5)},
                          {unit_at_angle(3.0), unit_at_angle(3.01)}});
    std::vector<EntityGroup> in{group_of(0, 2, store), group_of(1, 3, store), group_of(2, 2, store)};
    auto out = prune_tuples(in, store, 0.3, 2);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0], in[0]);
    EXPECT_EQ(out[2], in[2]);
    EXPECT_EQ(out[1].members, (std::vector<EntityRef>{{1, 0}, {1, 1}}));
}

TEST(PruneTuples, NeverAddsAndParallelAgrees) {
    std::mt19937_64 rng(33);
    std::vector<std::vector<Embedding>> by_source;
    for (int t = 0; t < 40; ++t) by_source.push_back(oracle::clumpy_set(rng, 2 + rng() % 10, 12));
    EmbeddingStore store(by_source);
    std::vector<EntityGroup> in;
    for (std::uint32_t t = 0; t < 40; ++t) in.push_back(group_of(t, by_source[t].size(), store));
    auto out = prune_tuples(in, store, 0.4, 2, 1);
    EXPECT_EQ(prune_tuples(in, store, 0.4, 2, 4), out);
    std::size_t j = 0;
    for (const auto& g : out) {
        EXPECT_GE(g.members.size(), 2u);
        while (in[j].members.front().source != g.members.front().source) ++j;
        EXPECT_TRUE(std::includes(in[j].members.begin(), in[j].members.end(), g.members.begin(), g.members.end()));
    }
}
