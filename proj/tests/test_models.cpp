#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <enrtrees/graph.hpp>
#include <enrtrees/models.hpp>
#include <enrtrees/oracle.hpp>
#include <enrtrees/samplers.hpp>

using namespace enr;

TEST_CASE("built-in registry serves every advertised model") {
    for (const auto& name : builtin_model_names()) {
        auto m = builtin_model(name);
        CHECK(m.name == name);
        m.species.validate();
    }
    CHECK_THROWS_AS(builtin_model("nope"), std::out_of_range);
}

TEST_CASE("block-tree codes reproduce the enumeration byte for byte") {
    auto m = builtin_model("cacti3");
    auto by_size = oracle::cacti_trees_up_to(6, 3);
    ExactSizeSampler ex(m.species, 64);
    RngStream rng(42, 200);
    // every sampled code at each size appears in the enumerated class map
    for (int n = 2; n <= 6; ++n) {
        std::set<std::string> seen;
        for (int rep = 0; rep < 400; ++rep) {
            auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
            seen.insert(structure_code(m, t));
        }
        for (const auto& code : seen) {
            INFO("n=" << n << " code " << code);
            REQUIRE(by_size[std::size_t(n)].count(code) == 1);
        }
        // small sizes are fully covered by a few hundred draws
        if (n <= 5) CHECK(seen.size() == by_size[std::size_t(n)].size());
    }
}

TEST_CASE("front-rooted complex codes reproduce the enumeration byte for byte") {
    for (int k : {2, 3}) {
        auto m = builtin_model("ktree" + std::to_string(k));
        auto by_size = oracle::ktree_objects_up_to(k, 4);
        ExactSizeSampler ex(m.species, 64);
        RngStream rng(42, 201);
        for (int n = 1; n <= 4; ++n) {
            std::set<std::string> seen;
            for (int rep = 0; rep < 500; ++rep) {
                auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
                seen.insert(structure_code(m, t));
            }
            for (const auto& code : seen) {
                INFO("k=" << k << " n=" << n << " code " << code);
                REQUIRE(by_size[std::size_t(n)].count(code) == 1);
            }
            if (n <= 3) CHECK(seen.size() == by_size[std::size_t(n)].size());
        }
    }
}

TEST_CASE("decoded block graphs are connected with polygon blocks only") {
    auto m = builtin_model("cacti3");
    ExactSizeSampler ex(m.species, 64);
    RngStream rng(42, 202);
    for (int rep = 0; rep < 300; ++rep) {
        int n = 2 + rep % 6;
        auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
        Graph g = decode_block_graph(t, m.species.catalog);
        REQUIRE(g.size() == n);
        REQUIRE(g.connected());
        auto comps = biconnected_components(g);
        for (const auto& comp : comps) {
            // a block with b edges on v vertices is an edge (b=1) or a cycle
            std::set<int> verts;
            for (auto [u, v] : comp) {
                verts.insert(u);
                verts.insert(v);
            }
            bool edge_block = comp.size() == 1 && verts.size() == 2;
            bool polygon = comp.size() == verts.size() && comp.size() >= 3 && comp.size() <= 3;
            INFO("block edges " << comp.size() << " vertices " << verts.size());
            REQUIRE((edge_block || polygon));
        }
    }
}

TEST_CASE("decoded complexes are k-trees with valid fronts") {
    for (int k : {2, 3}) {
        auto m = builtin_model("ktree" + std::to_string(k));
        ExactSizeSampler ex(m.species, 64);
        RngStream rng(42, 203);
        for (int rep = 0; rep < 200; ++rep) {
            int n = 1 + rep % 5;
            auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
            DecodedKTree d = decode_ktree(t, k);
            REQUIRE(d.graph.size() == k + n);
            REQUIRE(is_k_tree(d.graph, k));
            // every front is a k-clique
            for (const auto& f : d.fronts) {
                REQUIRE(f.size() == std::size_t(k));
                for (std::size_t i = 0; i < f.size(); ++i)
                    for (std::size_t j = i + 1; j < f.size(); ++j)
                        REQUIRE(d.graph.has_edge(f[i], f[j]));
            }
        }
    }
}

TEST_CASE("k-tree recognition rejects non-k-trees") {
    // a 4-cycle is not a 2-tree (no simplicial vertex of degree 2 forming a triangle)
    Graph c4(4);
    c4.add_edge(0, 1);
    c4.add_edge(1, 2);
    c4.add_edge(2, 3);
    c4.add_edge(3, 0);
    CHECK_FALSE(is_k_tree(c4, 2));
    // a triangle is a 2-tree with one hedron
    Graph k3(3);
    k3.add_edge(0, 1);
    k3.add_edge(1, 2);
    k3.add_edge(0, 2);
    CHECK(is_k_tree(k3, 2));
    // K4 minus an edge is a 2-tree; K4 itself is not
    Graph k4m(4);
    k4m.add_edge(0, 1);
    k4m.add_edge(0, 2);
    k4m.add_edge(1, 2);
    k4m.add_edge(1, 3);
    k4m.add_edge(2, 3);
    CHECK(is_k_tree(k4m, 2));
    Graph k4(4);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) k4.add_edge(i, j);
    CHECK_FALSE(is_k_tree(k4, 2));
    CHECK(is_k_tree(k4, 3));
    // disconnected graphs are never k-trees
    Graph two(4);
    two.add_edge(0, 1);
    two.add_edge(2, 3);
    CHECK_FALSE(is_k_tree(two, 1));
}

TEST_CASE("front chain transition matrix is stochastic with harmonic stationary law") {
    for (int k = 1; k <= 16; ++k) {
        auto P = ktree_chain_matrix(k);
        REQUIRE(P.size() == std::size_t(k));
        std::vector<double> pi(std::size_t(k), 0.0);
        double hk = 0.0;
        for (int i = 1; i <= k; ++i) hk += 1.0 / double(i);
        for (int i = 1; i <= k; ++i) pi[std::size_t(i - 1)] = 1.0 / (double(i) * hk);
        for (int i = 0; i < k; ++i) {
            double row = 0.0;
            for (int j = 0; j < k; ++j) row += P[std::size_t(i)][std::size_t(j)];
            REQUIRE(row == Catch::Approx(1.0).margin(1e-14));
        }
        // pi P = pi to machine precision
        for (int j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += pi[std::size_t(i)] * P[std::size_t(i)][std::size_t(j)];
            REQUIRE(acc == Catch::Approx(pi[std::size_t(j)]).margin(1e-12));
        }
    }
}

TEST_CASE("front chain visit rate approaches the closed-form constant") {
    CHECK(ktree_chain_bk(2) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(ktree_chain_bk(3) == Catch::Approx(2.0 / 11.0).margin(1e-15));
    RngStream rng(42, 204);
    for (int k : {2, 3, 4}) {
        const long long L = 200000;
        auto rep = ktree_chain(k, L, rng);
        CHECK(rep.d_prime == rep.visits_k + 1);
        double rate = double(rep.d_prime - 1) / double(L);
        INFO("k=" << k << " rate " << rate << " want " << rep.b_k);
        CHECK(std::abs(rate - rep.b_k) < 5e-3);
        // occupancy close to the stationary law
        double hk = 0.0;
        for (int i = 1; i <= k; ++i) hk += 1.0 / double(i);
        double tv = 0.0;
        for (int i = 1; i <= k; ++i)
            tv += std::abs(rep.occupancy[std::size_t(i - 1)] - 1.0 / (double(i) * hk));
        CHECK(0.5 * tv < 5e-3);
    }
}

TEST_CASE("json model definitions round-trip through the registry") {
    nlohmann::json j;
    j["name"] = "custom-binary";
    j["kind"] = "set";
    j["weights"] = {{"0", 1}, {"2", 1}};
    auto m = model_from_json(j);
    CHECK(m.name == "custom-binary");
    CHECK(m.species.kind == SpeciesKind::SET_WEIGHTED);
    CHECK(m.species.kappa(2) == Rational(1));
    CHECK(m.species.kappa(1) == Rational(0));
}
