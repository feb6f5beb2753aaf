#include <gtest/gtest.h>

#include <random>

#include "mtmatch/mtmatch.hpp"
#include "oracles.hpp"

using namespace mtmatch;

namespace {

PipelineConfig config(std::size_t k, double m) {
    PipelineConfig cfg;
    cfg.k = k;
    cfg.m = m;
    cfg.index.backend = IndexBackend::exact;
    return cfg;
}

Embedding near(const Embedding& base, std::size_t axis, double amount) {
    std::vector<double> v(base.values().begin(), base.values().end());
    v[axis] += amount;
    return Embedding::normalized(v);
}

std::vector<EntityRef> all_members(const WorkingTable& t) {
    std::vector<EntityRef> out;
    for (const auto& g : t.groups) out.insert(out.end(), g.members.begin(), g.members.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EntityRef> all_refs(const EmbeddingStore& store) {
    std::vector<EntityRef> out;
    for (std::size_t s = 0; s < store.table_count(); ++s)
        for (std::size_t r = 0; r < store.table(s).size(); ++r)
            out.push_back(EntityRef{std::uint32_t(s), std::uint32_t(r)});
    return out;
}

RawTable raw(std::vector<std::vector<std::string>> rows) {
    RawTable t;
    t.header = {"v"};
    t.rows = std::move(rows);
    return t;
}

EmbeddingStore random_store(std::mt19937_64& rng, std::size_t tables, std::size_t max_rows, std::size_t dim) {
    std::vector<std::vector<Embedding>> by_source(tables);
    for (auto& t : by_source) t = oracle::clumpy_set(rng, 1 + rng() % max_rows, dim);
    return EmbeddingStore(std::move(by_source));
}

} // namespace

TEST(InitWorkingTables, SingletonsPerRow) {
    auto ds = validate_dataset({raw({{"a"}, {"b"}, {"c"}}), raw({{"a"}, {"a"}})});
    auto init = init_working_tables(ds, {"v"}, EmbedderSpec{});
    ASSERT_EQ(init.tables.size(), 2u);
    EXPECT_EQ(init.tables[0].groups.size(), 3u);
    ASSERT_EQ(init.tables[1].groups.size(), 2u);
    EXPECT_EQ(init.tables[1].groups[0].centroid, init.tables[1].groups[1].centroid);
    EXPECT_NE(init.tables[1].groups[0].members, init.tables[1].groups[1].members);
    for (const auto& t : init.tables)
        for (const auto& g : t.groups) EXPECT_EQ(g.members.size(), 1u);
}

TEST(InitWorkingTables, EmptySelectionIsPrecondition) {
    auto ds = validate_dataset({raw({{"a"}}), raw({{"b"}})});
    try {
        init_working_tables(ds, {}, EmbedderSpec{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::precondition);
    }
}

TEST(MergeTwoTables, IdenticalPairMerges) {
    EmbeddingStore store({{Embedding::basis(4, 0)}, {Embedding::basis(4, 0)}});
    auto t = singleton_tables(store);
    auto out = merge_two_tables(t[0], t[1], store, config(1, 0.5), 1);
    ASSERT_EQ(out.groups.size(), 1u);
    EXPECT_EQ(out.groups[0].members, (std::vector<EntityRef>{{0, 0}, {1, 0}}));
    EXPECT_EQ(out.level, 1u);
}

TEST(MergeTwoTables, FarPairPassesThrough) {
    EmbeddingStore store({{Embedding::basis(4, 0)}, {Embedding::basis(4, 1)}});
    auto t = singleton_tables(store);
    auto out = merge_two_tables(t[0], t[1], store, config(1, 0.5), 1);
    ASSERT_EQ(out.groups.size(), 2u);
    EXPECT_EQ(out.groups[0], t[0].groups[0]);
    EXPECT_EQ(out.groups[1], t[1].groups[0]);
}

TEST(MergeTwoTables, TransitiveUnion) {
    const auto b0 = Embedding::basis(8, 0);
    EmbeddingStore store({{near(b0, 1, 0.1), near(b0, 2, 0.15)}, {b0}});
    auto t = singleton_tables(store);
    MergeStats stats;
    auto out = merge_two_tables(t[0], t[1], store, config(2, 0.5), 1, &stats);
    ASSERT_EQ(stats.matched.size(), 2u);
    auto expected = oracle::components(all_refs(store), stats.matched);
    std::set<std::set<EntityRef>> got;
    for (const auto& g : out.groups)
        if (g.members.size() >= 2) got.insert(std::set<EntityRef>(g.members.begin(), g.members.end()));
    EXPECT_EQ(got, expected);
    ASSERT_EQ(out.groups.size(), 1u);
    EXPECT_EQ(out.groups[0].members.size(), 3u);
}

TEST(MergeTwoTables, CentroidIsNormalizedMean) {
    const auto a = Embedding::basis(4, 0);
    const auto b = near(a, 1, 0.3);
    EmbeddingStore store({{a}, {b}});
    auto t = singleton_tables(store);
    auto out = merge_two_tables(t[0], t[1], store, config(1, 0.5), 1);
    std::vector<double> mean(4);
    for (int i = 0; i < 4; ++i) mean[i] = (a[i] + b[i]) / 2;
    EXPECT_NEAR(cosine_distance(out.groups[0].centroid, Embedding::normalized(mean)), 0.0, 1e-12);
    EXPECT_NEAR(out.groups[0].centroid.norm(), 1.0, 1e-12);
}

TEST(MergeTwoTables, SharedEntityIsPrecondition) {
    EmbeddingStore store({{Embedding::basis(4, 0)}, {Embedding::basis(4, 0)}});
    auto t = singleton_tables(store);
    EXPECT_THROW(merge_two_tables(t[0], t[0], store, config(1, 0.5), 1), Error);
}

TEST(MergePlanTest, LevelShapes) {
    EXPECT_TRUE(make_merge_plan(1, 3).levels.empty());

    auto four = make_merge_plan(4, 3);
    ASSERT_EQ(four.levels.size(), 2u);
    EXPECT_EQ(four.levels[0].pairs.size(), 2u);
    EXPECT_EQ(four.levels[1].pairs.size(), 1u);
    EXPECT_FALSE(four.levels[0].pass_through);

    auto five = make_merge_plan(5, 3);
    ASSERT_EQ(five.levels.size(), 3u);
    EXPECT_EQ(five.levels[0].pairs.size(), 2u);
    EXPECT_TRUE(five.levels[0].pass_through);
    EXPECT_EQ(five.levels[1].pairs.size(), 1u);
    EXPECT_TRUE(five.levels[1].pass_through);
    EXPECT_EQ(five.levels[2].pairs.size(), 1u);
    EXPECT_FALSE(five.levels[2].pass_through);

    for (std::size_t s = 1; s <= 40; ++s) {
        std::size_t expected = 0;
        while ((std::size_t{1} << expected) < s) ++expected;
        auto plan = make_merge_plan(s, s * 31);
        EXPECT_EQ(plan.levels.size(), expected) << s;
        std::size_t current = s;
        for (const auto& level : plan.levels) {
            std::set<std::size_t> used;
            for (auto [l, r] : level.pairs) {
                EXPECT_TRUE(used.insert(l).second);
                EXPECT_TRUE(used.insert(r).second);
            }
            if (level.pass_through) {
                EXPECT_TRUE(used.insert(*level.pass_through).second);
            }
            EXPECT_EQ(used.size(), current);
            EXPECT_EQ(*used.rbegin(), current - 1);
            current = level.pairs.size() + (level.pass_through ? 1 : 0);
        }
        EXPECT_EQ(current, 1u);
    }
}

TEST(HierarchicalMerge, SingleTableUnchanged) {
    EmbeddingStore store({{Embedding::basis(4, 0), Embedding::basis(4, 1)}});
    auto t = singleton_tables(store);
    auto out = hierarchical_merge(t, store, config(1, 0.5));
    EXPECT_EQ(out.groups, t[0].groups);
}

TEST(HierarchicalMerge, ConservationClosureAndDeterminism) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t tables = 2 + rng() % 7;
        auto store = random_store(rng, tables, 50 / tables, 12);
        auto cfg = config(1 + rng() % 3, 0.05 + 0.1 * double(rng() % 6));
        cfg.seed = rng();

        HierarchyTrace trace;
        auto out = hierarchical_merge(singleton_tables(store), store, cfg, &trace);
        EXPECT_EQ(all_members(out), all_refs(store));

        std::set<std::set<EntityRef>> got;
        for (const auto& g : out.groups) {
            EXPECT_TRUE(std::is_sorted(g.members.begin(), g.members.end()));
            if (g.members.size() >= 2) got.insert(std::set<EntityRef>(g.members.begin(), g.members.end()));
        }
        EXPECT_EQ(got, oracle::components(all_refs(store), trace.matched));

        for (std::size_t p : {2, 4}) {
            auto par = cfg;
            par.parallelism = p;
            EXPECT_EQ(hierarchical_merge(singleton_tables(store), store, par).groups, out.groups);
        }
    }
}

TEST(HierarchicalMerge, SeedChangesPlanNotConservation) {
    std::mt19937_64 rng(22);
    auto store = random_store(rng, 6, 8, 8);
    auto a = config(1, 0.4);
    auto b = a;
    b.seed = a.seed + 1;
    EXPECT_EQ(all_members(hierarchical_merge(singleton_tables(store), store, a)),
              all_members(hierarchical_merge(singleton_tables(store), store, b)));
}

TEST(HierarchicalMerge, PlantedClustersRecovered) {
    PlantedSpec spec;
    spec.tables = 6;
    spec.dim = 48;
    spec.cluster_sizes = {2, 3, 4, 5, 6, 6, 2, 3};
    spec.singletons_per_table = 3;
    spec.spread = 0.1;
    spec.min_center_angle = 1.2;
    spec.seed = 4;
    auto data = generate_planted(spec);
    auto cfg = config(1, 0.2);
    auto out = hierarchical_merge(singleton_tables(data.store), data.store, cfg);
    TupleList<EntityRef> tuples;
    for (const auto& g : extract_candidate_tuples(out)) tuples.push_back(g.members);
    EXPECT_EQ(oracle::as_sets(tuples), oracle::as_sets(data.truth));
}

TEST(ExtractCandidates, Examples) {
    auto group = [](std::initializer_list<std::uint32_t> rows) {
        EntityGroup g;
        for (auto r : rows) g.members.push_back(EntityRef{0, r});
        g.centroid = Embedding::basis(2, 0);
        return g;
    };
    WorkingTable singles{{group({0}), group({1})}, 1};
    EXPECT_TRUE(extract_candidate_tuples(singles).empty());

    WorkingTable one{{group({0, 1, 2, 3}), group({4}), group({5}), group({6})}, 1};
    ASSERT_EQ(extract_candidate_tuples(one).size(), 1u);
    EXPECT_EQ(extract_candidate_tuples(one)[0].members.size(), 4u);

    WorkingTable mixed{{group({0, 1}), group({2, 3, 4}), group({5}), group({6})}, 1};
    auto c = extract_candidate_tuples(mixed);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].members.size(), 2u);
    EXPECT_EQ(c[1].members.size(), 3u);
}
