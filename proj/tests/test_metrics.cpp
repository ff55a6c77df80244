#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include <enrtrees/metrics.hpp>
#include <enrtrees/models.hpp>
#include <enrtrees/samplers.hpp>

using namespace enr;

namespace {

// shortest-path truth for a patched space: Dijkstra over a graph holding one
// weighted edge per within-patch point pair
DiameterHeight brute_patched(const PatchedSpace& ps) {
    Graph g(ps.n);
    EdgeLengths el;
    for (const auto& p : ps.patches)
        for (std::size_t a = 0; a < p.pts.size(); ++a)
            for (std::size_t b = a + 1; b < p.pts.size(); ++b) {
                g.add_edge(p.pts[a], p.pts[b]);
                el.w[EdgeLengths::key(p.pts[a], p.pts[b])] = p.d(a, b);
            }
    if (ps.n == 1) return {0.0, 0.0};
    return graph_diameter_height(g, ps.root, &el);
}

Graph tree_graph(const MaterializedTree& mt) {
    Graph g(int(mt.size()));
    for (std::size_t v = 1; v < mt.size(); ++v) g.add_edge(int(v), mt.parent[v]);
    return g;
}

} // namespace

TEST_CASE("polygon local metrics take the shorter arc") {
    auto tri = detail::polygon_matrix({1.0, 1.0, 1.0});
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            CHECK(tri[a * 3 + b] == (a == b ? 0.0 : 1.0));
    auto sq = detail::polygon_matrix({1.0, 1.0, 1.0, 1.0});
    CHECK(sq[0 * 4 + 2] == 2.0);
    CHECK(sq[1 * 4 + 3] == 2.0);
    CHECK(sq[0 * 4 + 1] == 1.0);
    // an overlong edge is bypassed the other way around
    auto skew = detail::polygon_matrix({10.0, 1.0, 1.0});
    CHECK(skew[0 * 3 + 1] == 2.0); // 10 directly, 1+1 around
    CHECK(skew[1 * 3 + 2] == 1.0);
    CHECK(skew[0 * 3 + 2] == 1.0);
}

TEST_CASE("tree spaces reduce to the graph metric") {
    auto m = builtin_model("polya");
    auto ms = std::make_shared<const ModelSampler>(m.species, 64);
    ExactSizeSampler ex(ms);
    RngStream rng(42, 300);
    for (int rep = 0; rep < 60; ++rep) {
        int n = 2 + rep % 12;
        auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
        auto mt = materialize(t);
        Graph g = tree_graph(mt);

        auto ps = build_patched_space(mt, EdgeLaw::DET1, rng);
        auto fast = diameter_height(ps);
        auto slow = graph_diameter_height(g, 0, nullptr);
        CHECK(fast.diameter == Catch::Approx(slow.diameter).margin(1e-12));
        CHECK(fast.height == Catch::Approx(slow.height).margin(1e-12));

        // random lengths: transfer the drawn patch weights onto the graph
        auto ps2 = build_patched_space(mt, EdgeLaw::EXP1, rng);
        EdgeLengths el;
        for (const auto& p : ps2.patches)
            el.w[EdgeLengths::key(p.pts[0], p.pts[1])] = p.d(0, 1);
        auto fast2 = diameter_height(ps2);
        auto slow2 = graph_diameter_height(g, 0, &el);
        CHECK(fast2.diameter == Catch::Approx(slow2.diameter).epsilon(1e-12));
        CHECK(fast2.height == Catch::Approx(slow2.height).epsilon(1e-12));
    }
}

TEST_CASE("block spaces match brute-force shortest paths under every length law") {
    auto m = builtin_model("cacti3");
    auto ms = std::make_shared<const ModelSampler>(m.species, 64);
    ExactSizeSampler ex(ms);
    RngStream rng(42, 301);
    for (int rep = 0; rep < 90; ++rep) {
        int n = 2 + rep % 10;
        auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
        auto mt = materialize(t, &m.species.catalog);
        EdgeLaw law = rep % 3 == 0 ? EdgeLaw::DET1 : (rep % 3 == 1 ? EdgeLaw::EXP1
                                                                   : EdgeLaw::UNIF01);
        auto ps = build_patched_space(mt, law, rng);
        auto fast = diameter_height(ps);
        auto slow = brute_patched(ps);
        INFO("n=" << n << " law " << int(law));
        CHECK(fast.diameter == Catch::Approx(slow.diameter).margin(1e-12));
        CHECK(fast.height == Catch::Approx(slow.height).margin(1e-12));
        // unit lengths agree with the decoded graph's hop metric
        if (law == EdgeLaw::DET1) {
            Graph dec = decode_block_graph(t, m.species.catalog);
            auto hop = graph_diameter_height(dec, 0, nullptr);
            CHECK(fast.diameter == Catch::Approx(hop.diameter).margin(1e-12));
            CHECK(fast.height == Catch::Approx(hop.height).margin(1e-12));
        }
    }
}

TEST_CASE("edge length laws sample in range") {
    RngStream rng(42, 302);
    for (int i = 0; i < 2000; ++i) {
        CHECK(draw_edge_length(EdgeLaw::DET1, rng) == 1.0);
        double e = draw_edge_length(EdgeLaw::EXP1, rng);
        CHECK(e > 0.0);
        double u = draw_edge_length(EdgeLaw::UNIF01, rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    // missing entries default to unit length
    EdgeLengths el;
    CHECK(el.at(3, 7) == 1.0);
    el.w[EdgeLengths::key(7, 3)] = 2.5;
    CHECK(el.at(3, 7) == 2.5);
    CHECK(el.at(7, 3) == 2.5);
}

TEST_CASE("per-edge draws cover every graph edge once") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(3, 0);
    RngStream rng(42, 303);
    auto el = draw_graph_edge_lengths(g, EdgeLaw::UNIF01, rng);
    CHECK(el.w.size() == 4);
    for (const auto& [k, w] : el.w) {
        CHECK(w >= 0.0);
        CHECK(w < 1.0);
    }
    auto dh = graph_diameter_height(g, 0, &el);
    CHECK(dh.diameter <= 2.0);
    CHECK(dh.height <= dh.diameter + 1e-12);
}

TEST_CASE("disconnected graphs are rejected by the distance scan") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    CHECK_THROWS_AS(graph_diameter_height(g, 0, nullptr), std::domain_error);
}

TEST_CASE("hop balls and block balls grow at their own rates") {
    // square: one block of four vertices
    Graph sq(4);
    sq.add_edge(0, 1);
    sq.add_edge(1, 2);
    sq.add_edge(2, 3);
    sq.add_edge(3, 0);
    auto hop1 = neighborhood(sq, 0, 1, BallMetric::GRAPH);
    CHECK(hop1.graph.size() == 3); // 0, 1, 3
    auto blk1 = neighborhood(sq, 0, 1, BallMetric::BLOCK);
    CHECK(blk1.graph.size() == 4); // whole block
    CHECK(blk1.graph.edge_count() == 4);

    // triangle with a pendant path 2-3-4
    Graph tp(5);
    tp.add_edge(0, 1);
    tp.add_edge(1, 2);
    tp.add_edge(0, 2);
    tp.add_edge(2, 3);
    tp.add_edge(3, 4);
    auto b0 = neighborhood(tp, 0, 1, BallMetric::BLOCK);
    std::set<int> ids0(b0.ids.begin(), b0.ids.end());
    CHECK(ids0 == std::set<int>{0, 1, 2});
    auto b02 = neighborhood(tp, 0, 2, BallMetric::BLOCK);
    std::set<int> ids02(b02.ids.begin(), b02.ids.end());
    CHECK(ids02 == std::set<int>{0, 1, 2, 3});
    auto g02 = neighborhood(tp, 0, 2, BallMetric::GRAPH);
    std::set<int> gids(g02.ids.begin(), g02.ids.end());
    CHECK(gids == std::set<int>{0, 1, 2, 3});
    // center is re-indexed to its own position
    CHECK(b0.ids[std::size_t(b0.center)] == 0);
    // induced edges survive re-indexing
    for (int u = 0; u < b0.graph.size(); ++u)
        for (int v : b0.graph.neighbors(u))
            CHECK(tp.has_edge(b0.ids[std::size_t(u)], b0.ids[std::size_t(v)]));

    CHECK_THROWS_AS(neighborhood(tp, 0, 4, BallMetric::GRAPH, 2), std::domain_error);
}
