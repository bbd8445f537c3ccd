#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ratingraph/graph.hpp"

using namespace ratingraph;
using namespace ratingraph::testing;

TEST_CASE("G0 builds with the hand-counted shape") {
    const BipartiteGraph g = g0();
    CHECK(g.num_users() == 3);
    CHECK(g.num_businesses() == 2);
    CHECK(g.num_edges() == 4);
    CHECK(g.edge_density() == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("empty edge list builds an empty graph") {
    const BipartiteGraph g = BipartiteGraph::build({});
    CHECK(g.num_users() == 0);
    CHECK(g.num_edges() == 0);
    CHECK(g.empty());
}

TEST_CASE("degree and weighted degree on G0") {
    const BipartiteGraph g = g0();
    CHECK(g.business_degree(kB1) == 2);
    CHECK(g.business_weighted_degree(kB1) == 8);
    CHECK(g.user_degree(kU1) == 2);
    CHECK(g.user_weighted_degree(kU1) == 9);

    CHECK_THROWS_AS(g.user_degree(99), NodeNotFoundError);
    CHECK_THROWS_AS(g.business_weighted_degree(99), NodeNotFoundError);
}

TEST_CASE("single-edge graph aggregates") {
    const BipartiteGraph g = BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}});
    CHECK(g.user_weighted_degree(0) == 4);
    CHECK(g.avg_rating_given(0) == 4.0);
    CHECK(g.avg_rating_received(0) == 4.0);
}

TEST_CASE("rating aggregates on G0") {
    const BipartiteGraph g = g0();
    CHECK(g.avg_rating_given(kU1) == doctest::Approx(4.5));
    CHECK(g.avg_rating_received(kB2) == doctest::Approx(3.0));
    CHECK_THROWS_AS(g.avg_rating_given(7), NodeNotFoundError);
}

TEST_CASE("neighbors are sorted and mirrored") {
    const BipartiteGraph g = g0();
    const auto nbrs = g.user_neighbors(kU1);
    REQUIRE(nbrs.size() == 2);
    CHECK(nbrs[0].node == kB1);
    CHECK(nbrs[0].stars == 5);
    CHECK(nbrs[1].node == kB2);
    CHECK(nbrs[1].stars == 4);
    CHECK_THROWS_AS(g.user_neighbors(42), NodeNotFoundError);

    // Mirror invariant checked by full scan.
    uint64_t user_total = 0, business_total = 0;
    for (uint32_t u = 0; u < g.user_space(); ++u)
        if (g.has_user(u)) user_total += g.user_degree(u);
    for (uint32_t b = 0; b < g.business_space(); ++b)
        if (g.has_business(b)) business_total += g.business_degree(b);
    CHECK(user_total == g.num_edges());
    CHECK(business_total == g.num_edges());

    for (uint32_t u = 0; u < g.user_space(); ++u) {
        if (!g.has_user(u)) continue;
        for (const auto& e : g.user_neighbors(u)) {
            const auto back = g.business_neighbors(e.node);
            const auto it = std::find_if(back.begin(), back.end(),
                                         [&](const AdjEntry& a) { return a.node == u; });
            REQUIRE(it != back.end());
            CHECK(it->stars == e.stars);
            CHECK(it->timestamp == e.timestamp);
        }
    }
}

TEST_CASE("duplicate pair is a construction error") {
    const std::vector<ReviewEdge> edges{{0, 0, 5, 1}, {0, 0, 3, 2}};
    CHECK_THROWS_AS(BipartiteGraph::build(edges), ConstructionError);
}

TEST_CASE("bad stars are rejected at build") {
    CHECK_THROWS_AS(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 0, 1}}), ValidationError);
    CHECK_THROWS_AS(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 6, 1}}), ValidationError);
}

TEST_CASE("temporal_split on 10 distinct timestamps gives 8/<=1/<=1") {
    std::vector<ReviewEdge> edges;
    for (uint32_t i = 0; i < 10; ++i) edges.push_back({i, i % 3, 3, static_cast<int64_t>(i + 1)});
    const BipartiteGraph g = BipartiteGraph::build(edges);
    const TemporalSplit split = temporal_split(g, 0.8, 0.1);
    CHECK(split.train.num_edges() == 8);
    CHECK(split.validation.num_edges() + split.dropped_validation == 1);
    CHECK(split.test.num_edges() + split.dropped_test == 1);
}

TEST_CASE("temporal_split with shared endpoints gives exact 80/10/10") {
    // Four users x 25 cycling businesses: every endpoint occurs within the
    // first 80 edges, so closure drops nothing, and all pairs are distinct.
    std::vector<ReviewEdge> edges;
    for (uint32_t i = 0; i < 100; ++i) {
        edges.push_back({i / 25, i % 25, static_cast<int32_t>(1 + i % 5), static_cast<int64_t>(i)});
    }
    const BipartiteGraph g = BipartiteGraph::build(edges);
    const TemporalSplit split = temporal_split(g, 0.8, 0.1);
    CHECK(split.train.num_edges() == 80);
    CHECK(split.validation.num_edges() == 10);
    CHECK(split.test.num_edges() == 10);
    CHECK(split.dropped_validation == 0);
    CHECK(split.dropped_test == 0);
    CHECK(split.t1 == 80);
    CHECK(split.t2 == 90);
}

TEST_CASE("temporal_split contract on random graphs") {
    for (const uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const auto edges = random_graph_edges(seed, 30, 12, 150);
        const BipartiteGraph g = BipartiteGraph::build(edges);
        const TemporalSplit s = temporal_split(g, 0.8, 0.1);

        // Pairwise disjoint and union + drops = original.
        const auto train = s.train.edges();
        const auto val = s.validation.edges();
        const auto test = s.test.edges();
        CHECK(train.size() + val.size() + test.size() + s.dropped_validation + s.dropped_test ==
              g.num_edges());

        std::set<std::pair<UserId, BusinessId>> seen;
        for (const auto* part : {&train, &val, &test}) {
            for (const auto& e : *part) {
                CHECK(seen.emplace(e.user, e.business).second);
            }
        }

        // Time ordering against the cuts.
        for (const auto& e : train) CHECK(e.timestamp < s.t1);
        for (const auto& e : val) {
            CHECK(e.timestamp >= s.t1);
            CHECK(e.timestamp < s.t2);
        }
        for (const auto& e : test) CHECK(e.timestamp >= s.t2);

        // Node closure.
        for (const auto* part : {&val, &test}) {
            for (const auto& e : *part) {
                CHECK(s.train.has_user(e.user));
                CHECK(s.train.has_business(e.business));
            }
        }
    }
}

TEST_CASE("temporal_split rejects an empty graph and bad fractions") {
    CHECK_THROWS_AS(temporal_split(BipartiteGraph::build({}), 0.8, 0.1), SplitError);
    const BipartiteGraph g = g0();
    CHECK_THROWS_AS(temporal_split(g, 0.0, 0.1), ConfigError);
    CHECK_THROWS_AS(temporal_split(g, 0.9, 0.2), ConfigError);
}

TEST_CASE("split snapshot round-trips bit-exactly") {
    testing::TmpDir tmp("split_roundtrip");
    const auto edges = random_graph_edges(9, 25, 10, 120);
    const BipartiteGraph g = BipartiteGraph::build(edges);
    const TemporalSplit split = temporal_split(g, 0.8, 0.1);

    save_split(tmp.file("split.graph"), split);
    const TemporalSplit loaded = load_split(tmp.file("split.graph"));
    CHECK(loaded == split);

    // Saving the loaded copy writes identical bytes.
    save_split(tmp.file("again.graph"), loaded);
    std::ifstream a(tmp.file("split.graph")), b(tmp.file("again.graph"));
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("graph equality and edges() ordering") {
    const auto edges = g0_edges();
    auto shuffled = edges;
    std::swap(shuffled[0], shuffled[3]);
    CHECK(BipartiteGraph::build(edges) == BipartiteGraph::build(shuffled));

    const auto out = g0().edges();
    CHECK(std::is_sorted(out.begin(), out.end(), [](const ReviewEdge& a, const ReviewEdge& b) {
        return std::pair(a.user, a.business) < std::pair(b.user, b.business);
    }));
}
