#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ratingraph/features.hpp"
#include "ratingraph/ingest.hpp"

using namespace ratingraph;
using namespace ratingraph::testing;

TEST_CASE("common_raters on G0") {
    const BipartiteGraph g = g0();
    CHECK(common_raters(g, kU1, kB1) == std::vector<UserId>{kU2});
    CHECK(common_raters(g, kU3, kB1) == std::vector<UserId>{kU1, kU2});
    CHECK_THROWS_AS(common_raters(g, 9, kB1), NodeNotFoundError);

    const BipartiteGraph single = BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}});
    CHECK(common_raters(single, 0, 0).empty());
}

TEST_CASE("common_businesses on G0") {
    const BipartiteGraph g = g0();
    CHECK(common_businesses(g, kU1, kB1) == std::vector<BusinessId>{kB2});
    CHECK(common_businesses(g, kU2, kB1).empty());

    const BipartiteGraph single = BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}});
    CHECK(common_businesses(single, 0, 0).empty());
}

TEST_CASE("avg_rating_common_raters on G0") {
    const BipartiteGraph g = g0();
    CHECK(avg_rating_common_raters(g, kU1, kB1) == doctest::Approx(3.0));
    CHECK(avg_rating_common_raters(g, kU3, kB1) == doctest::Approx(3.75));
    // empty set -> exactly 0
    CHECK(avg_rating_common_raters(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}}), 0,
                                   0) == 0.0);
}

TEST_CASE("avg_rating_common_businesses on G0") {
    const BipartiteGraph g = g0();
    CHECK(avg_rating_common_businesses(g, kU1, kB1) == doctest::Approx(3.0));
    CHECK(avg_rating_common_businesses(g, kU1, kB2) == doctest::Approx(4.0));
    CHECK(avg_rating_common_businesses(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}}),
                                       0, 0) == 0.0);
}

TEST_CASE("pref_attachment_rating on G0") {
    const BipartiteGraph g = g0();
    CHECK(pref_attachment_rating(g, kU1, kB1) == doctest::Approx(13.125));
    CHECK(pref_attachment_rating(g, kU2, kB2) == doctest::Approx(13.0));
    CHECK(pref_attachment_rating(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}}), 0,
                                 0) == doctest::Approx(16.0));
}

TEST_CASE("adamic_adar on G0") {
    const BipartiteGraph g = g0();
    CHECK(adamic_adar(g, kU1, kB1) == doctest::Approx(0.5));  // 1/3 + 1/6
    CHECK(adamic_adar(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}}), 0, 0) == 0.0);
}

TEST_CASE("pref_attachment_degree on G0") {
    const BipartiteGraph g = g0();
    CHECK(pref_attachment_degree(g, kU1, kB1) == doctest::Approx(4.0));
    CHECK(pref_attachment_degree(g, kU2, kB2) == doctest::Approx(2.0));
    CHECK(pref_attachment_degree(BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}}), 0,
                                 0) == doctest::Approx(1.0));
}

TEST_CASE("pagerank of a single edge is an even split") {
    const BipartiteGraph g = BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}});
    const auto pr = pagerank(g);
    CHECK(pr[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(pr[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("pagerank of a star favors the center") {
    // K_{1,5}: one business rated by five users.
    std::vector<ReviewEdge> edges;
    for (uint32_t u = 0; u < 5; ++u) edges.push_back({u, 0, 3, static_cast<int64_t>(u)});
    const BipartiteGraph g = BipartiteGraph::build(edges);
    const auto pr = pagerank(g);
    for (uint32_t u = 0; u < 5; ++u) CHECK(pr[5] > pr[u]);
}

TEST_CASE("pagerank sums to 1 and matches the dense oracle on G0") {
    const BipartiteGraph g = g0();
    const auto pr = pagerank(g, 0.85, 1e-12, 500);
    double total = 0.0;
    for (const double v : pr) {
        total += v;
        CHECK(v >= 0.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    const auto expected = oracle::pagerank_dense(g, 0.85);
    for (std::size_t i = 0; i < pr.size(); ++i)
        CHECK(std::abs(pr[i] - expected[i]) < 1e-8);
}

TEST_CASE("pagerank raises ConvergenceError when starved of iterations") {
    const auto edges = random_graph_edges(5, 30, 12, 120);
    const BipartiteGraph g = BipartiteGraph::build(edges);
    CHECK_THROWS_AS(pagerank(g, 0.85, 1e-12, 1), ConvergenceError);
}

TEST_CASE("eigenvector centrality of a single edge is 1/sqrt(2) each") {
    const BipartiteGraph g = BipartiteGraph::build(std::vector<ReviewEdge>{{0, 0, 4, 1}});
    const auto ec = eigenvector_centrality(g);
    CHECK(ec[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(ec[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("eigenvector centrality matches the dense oracle on G0") {
    const BipartiteGraph g = g0();
    const auto ec = eigenvector_centrality(g, 1e-12, 5000);
    const auto expected = oracle::centrality_dense(g);
    for (std::size_t i = 0; i < ec.size(); ++i) CHECK(std::abs(ec[i] - expected[i]) < 1e-6);

    double norm = 0.0;
    for (const double v : ec) {
        norm += v * v;
        CHECK(v >= 0.0);
    }
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eigenvector centrality concentrates on the dominant component") {
    // A 4-user star (lambda = 2) plus a lone edge (lambda = 1): all the mass
    // belongs to the star.
    std::vector<ReviewEdge> edges;
    for (uint32_t u = 0; u < 4; ++u) edges.push_back({u, 0, 3, static_cast<int64_t>(u)});
    edges.push_back({4, 1, 5, 10});
    const BipartiteGraph g = BipartiteGraph::build(edges);

    const auto ec = eigenvector_centrality(g, 1e-12, 20000);
    const auto expected = oracle::centrality_dense(g);
    for (std::size_t i = 0; i < ec.size(); ++i) CHECK(std::abs(ec[i] - expected[i]) < 1e-6);
    CHECK(ec[4] < 1e-6);                    // lone user
    CHECK(ec[g.user_space() + 1] < 1e-6);   // lone business
    CHECK(ec[g.user_space() + 0] > 0.5);    // star center
}

TEST_CASE("all 9 features match the brute-force oracle on G0 and random graphs") {
    for (const uint64_t seed : {0ull, 101ull, 102ull, 103ull}) {
        const std::vector<ReviewEdge> edges = seed == 0 ? g0_edges() : random_graph_edges(seed);
        const BipartiteGraph g = BipartiteGraph::build(edges);
        FeatureParams params;
        params.pagerank_tol = 1e-12;
        params.centrality_tol = 1e-12;
        params.centrality_max_iter = 20000;
        const FeatureExtractor extractor(g, params);
        const auto pr = oracle::pagerank_dense(g);
        const auto ec = oracle::centrality_dense(g);

        for (const auto& e : edges) {
            const auto got = extractor.row(e.user, e.business);
            const auto expected = oracle::features(edges, e.user, e.business, pr, ec, g.user_space());
            for (std::size_t j = 0; j < 9; ++j) {
                INFO("seed ", seed, " pair (", e.user, ",", e.business, ") feature ", j);
                CHECK(std::abs(got[j] - expected[j]) < (j == 6 ? 1e-6 : 1e-8));
            }
        }
    }
}

TEST_CASE("featurize keeps input order and is worker-count invariant") {
    const auto edges = random_graph_edges(17, 100, 40, 2000);
    const BipartiteGraph g = BipartiteGraph::build(edges);
    const FeatureExtractor extractor(g);

    const FeatureMatrix serial = featurize(extractor, edges, 1);
    const FeatureMatrix parallel = featurize(extractor, edges, 4);
    REQUIRE(serial.size() == edges.size());
    CHECK(serial == parallel);  // bit-identical rows regardless of workers

    for (std::size_t i = 0; i < edges.size(); ++i) {
        CHECK(serial.rows[i].user == edges[i].user);
        CHECK(serial.rows[i].business == edges[i].business);
        CHECK(serial.rows[i].target == static_cast<double>(edges[i].stars));
    }

    CHECK(featurize(extractor, std::vector<ReviewEdge>{}, 1).empty());
}

TEST_CASE("featurize names the offending pair on unknown endpoints") {
    const BipartiteGraph g = g0();
    const FeatureExtractor extractor(g);
    const std::vector<ReviewEdge> pairs{{kU1, 7, 3, 1}};
    CHECK_THROWS_WITH_AS(featurize(extractor, pairs, 1),
                         "pair (0,7): business not in train graph", NodeNotFoundError);
}

TEST_CASE("adding another rater bumps n_common_raters by exactly one") {
    auto edges = g0_edges();
    const BipartiteGraph before = BipartiteGraph::build(edges);
    const double count_before = FeatureExtractor(before).row(kU1, kB1)[0];

    edges.push_back({kU3, kB1, 4, 99});  // u3 now also rates b1
    const BipartiteGraph after = BipartiteGraph::build(edges);
    const double count_after = FeatureExtractor(after).row(kU1, kB1)[0];
    CHECK(count_after == count_before + 1.0);
}

TEST_CASE("standardizer maps training columns to zero mean and unit sample std") {
    const auto edges = random_graph_edges(23, 30, 12, 200);
    const BipartiteGraph g = BipartiteGraph::build(edges);
    const FeatureMatrix m = featurize(FeatureExtractor(g), edges, 1);

    const Standardizer s = Standardizer::fit(m);
    const FeatureMatrix t = s.apply(m);
    const double n = static_cast<double>(t.size());
    for (std::size_t j = 0; j < 9; ++j) {
        double sum = 0.0;
        for (const auto& r : t.rows) sum += r.features[j];
        const double mean = sum / n;
        CHECK(std::abs(mean) < 1e-9);
        double ss = 0.0;
        for (const auto& r : t.rows) ss += (r.features[j] - mean) * (r.features[j] - mean);
        const double std_dev = std::sqrt(ss / (n - 1.0));
        // Constant columns map to exactly 0 instead of unit variance.
        if (std_dev > 0.0) CHECK(std_dev == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("standardizer simple columns") {
    FeatureMatrix m;
    for (const double v : {1.0, 2.0, 3.0}) {
        FeatureRow r;
        r.features = {v, 4.0, 0, 0, 0, 0, 0, 0, 0};
        m.rows.push_back(r);
    }
    const Standardizer s = Standardizer::fit(m);
    const FeatureMatrix t = s.apply(m);
    CHECK(t.rows[0].features[0] == doctest::Approx(-1.0));
    CHECK(t.rows[1].features[0] == doctest::Approx(0.0));
    CHECK(t.rows[2].features[0] == doctest::Approx(1.0));
    // Zero-variance column divides by 1 and lands on 0.
    for (const auto& r : t.rows) CHECK(r.features[1] == 0.0);
}

TEST_CASE("held-out matrix transformed with train statistics keeps non-zero mean") {
    FeatureMatrix train, val;
    for (const double v : {1.0, 2.0, 3.0}) {
        FeatureRow r;
        r.features = {v, 0, 0, 0, 0, 0, 0, 0, 0};
        train.rows.push_back(r);
    }
    for (const double v : {10.0, 11.0}) {
        FeatureRow r;
        r.features = {v, 0, 0, 0, 0, 0, 0, 0, 0};
        val.rows.push_back(r);
    }
    const Standardizer s = Standardizer::fit(train);
    const FeatureMatrix t = s.apply(val);
    CHECK((t.rows[0].features[0] + t.rows[1].features[0]) / 2.0 > 1.0);
}

TEST_CASE("feature csv and standardizer sidecar round-trip") {
    TmpDir tmp("features_io");
    IdMap ids;
    const auto edges_raw = random_graph_edges(31, 15, 8, 50);
    // Give the synthetic handles real strings so the id map can resolve them.
    for (uint32_t u = 0; u < 15; ++u) ids.intern_user("u" + std::to_string(u));
    for (uint32_t b = 0; b < 8; ++b) ids.intern_business("b" + std::to_string(b));

    const BipartiteGraph g = BipartiteGraph::build(edges_raw);
    const FeatureMatrix m = featurize(FeatureExtractor(g), edges_raw, 1);
    write_features_csv(tmp.file("f.csv"), m, ids);
    const FeatureMatrix loaded = read_features_csv(tmp.file("f.csv"), ids);
    REQUIRE(loaded.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(loaded.rows[i].user == m.rows[i].user);
        CHECK(loaded.rows[i].business == m.rows[i].business);
        CHECK(loaded.rows[i].target == m.rows[i].target);
        for (std::size_t j = 0; j < 9; ++j)
            CHECK(loaded.rows[i].features[j] == m.rows[i].features[j]);  // %.17g is exact
    }

    const Standardizer s = Standardizer::fit(m);
    save_standardizer(tmp.file("s.csv"), s);
    CHECK(load_standardizer(tmp.file("s.csv")) == s);
}
