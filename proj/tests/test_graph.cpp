#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <enrtrees/graph.hpp>

using enr::Graph;

TEST_CASE("edges are undirected, deduplicated, and validated") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 0);
    CHECK(g.edge_count() == 1);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK_THROWS_AS(g.add_edge(2, 2), std::domain_error);
    CHECK_THROWS_AS(g.add_edge(0, 4), std::domain_error);
}

TEST_CASE("connectivity") {
    Graph path(4);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    path.add_edge(2, 3);
    CHECK(path.connected());
    Graph split(3);
    split.add_edge(0, 1);
    CHECK_FALSE(split.connected());
    CHECK(Graph(0).connected());
    CHECK(Graph(1).connected());
}

TEST_CASE("large graphs fall back to adjacency lists") {
    Graph g(70);
    for (int i = 0; i + 1 < 70; ++i) g.add_edge(i, i + 1);
    CHECK(g.connected());
    CHECK(g.has_edge(68, 69));
    CHECK_FALSE(g.has_edge(0, 69));
    CHECK(g.edge_count() == 69);
}

static std::vector<std::size_t> component_sizes(const Graph& g) {
    auto comps = enr::biconnected_components(g);
    std::vector<std::size_t> sizes;
    for (auto& c : comps) sizes.push_back(c.size());
    std::sort(sizes.begin(), sizes.end());
    return sizes;
}

TEST_CASE("biconnected components: path is all bridges") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    CHECK(component_sizes(g) == std::vector<std::size_t>{1, 1, 1});
}

TEST_CASE("biconnected components: triangle with a pendant edge") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 0);
    g.add_edge(2, 3);
    CHECK(component_sizes(g) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("biconnected components: two triangles sharing a cut vertex") {
    Graph g(5);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 0);
    g.add_edge(2, 3);
    g.add_edge(3, 4);
    g.add_edge(4, 2);
    CHECK(component_sizes(g) == std::vector<std::size_t>{3, 3});
}

TEST_CASE("biconnected components: four-cycle is one block") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(3, 0);
    CHECK(component_sizes(g) == std::vector<std::size_t>{4});
}

TEST_CASE("biconnected components cover every edge exactly once") {
    Graph g(7);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 0);
    g.add_edge(1, 3);
    g.add_edge(3, 4);
    g.add_edge(4, 5);
    g.add_edge(5, 3);
    g.add_edge(5, 6);
    auto comps = enr::biconnected_components(g);
    std::size_t total = 0;
    for (auto& c : comps) total += c.size();
    CHECK(total == std::size_t(g.edge_count()));
}
