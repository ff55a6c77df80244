#include <catch2/catch_amalgamated.hpp>

#include <enrtrees/oracle.hpp>

using enr::Rational;
using namespace enr::oracle;

static std::vector<long long> class_counts(const std::vector<CodeWeights>& by_size) {
    std::vector<long long> out;
    for (std::size_t n = 1; n < by_size.size(); ++n) out.push_back((long long)by_size[n].size());
    return out;
}

static std::vector<Rational> weight_totals(const std::vector<CodeWeights>& by_size) {
    std::vector<Rational> out;
    for (std::size_t n = 1; n < by_size.size(); ++n) out.push_back(total_weight(by_size[n]));
    return out;
}

TEST_CASE("unordered rooted trees, unit weights") {
    auto per = polya_trees_up_to(12, [](int) { return Rational(1); }, 12);
    CHECK(class_counts(per) ==
          std::vector<long long>{1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766});
    // with unit weights every class has weight 1
    CHECK(weight_totals(per)[6] == Rational(48));
}

TEST_CASE("unordered trees with outdegrees 0 or 2") {
    auto kappa = [](int d) { return Rational(d == 0 || d == 2 ? 1 : 0); };
    auto per = polya_trees_up_to(15, kappa, 15);
    auto c = class_counts(per);
    CHECK(c == std::vector<long long>{1, 0, 1, 0, 1, 0, 2, 0, 3, 0, 6, 0, 11, 0, 23});
}

TEST_CASE("weighted outdegrees: kappa(0)=1, kappa(2)=2, kappa(3)=1") {
    auto kappa = [](int d) {
        if (d == 0) return Rational(1);
        if (d == 2) return Rational(2);
        if (d == 3) return Rational(1);
        return Rational(0);
    };
    auto per = polya_trees_up_to(9, kappa, 9);
    CHECK(weight_totals(per) ==
          std::vector<Rational>{Rational(1), Rational(0), Rational(2), Rational(1), Rational(4),
                                Rational(4), Rational(17), Rational(20), Rational(58)});
    // size 4: only the 3-star, with weight kappa(3) * kappa(0)^3 = 1
    REQUIRE(per[4].size() == 1);
    CHECK(per[4].begin()->first == "(()()())");
    CHECK(per[4].begin()->second == Rational(1));
    // size 3: only the cherry, weight kappa(2) = 2
    REQUIRE(per[3].size() == 1);
    CHECK(per[3].begin()->second == Rational(2));
}

TEST_CASE("plane trees, unrestricted") {
    auto per = plane_trees_up_to(12, [](int) { return true; });
    CHECK(class_counts(per) == std::vector<long long>{1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862,
                                                      16796, 58786});
}

TEST_CASE("plane trees with outdegrees 0 or 2") {
    auto per = plane_trees_up_to(9, [](int d) { return d == 0 || d == 2; });
    auto c = class_counts(per);
    CHECK(c == std::vector<long long>{1, 0, 1, 0, 2, 0, 5, 0, 14});
}

TEST_CASE("rooted graphs with edge and triangle blocks") {
    auto per = cacti_trees_up_to(8, 3);
    CHECK(class_counts(per) == std::vector<long long>{1, 1, 3, 7, 21, 60, 190, 600});
}

TEST_CASE("edge-only block trees coincide with unordered rooted trees") {
    auto blocks = cacti_trees_up_to(8, 2);
    auto trees = polya_trees_up_to(8, [](int) { return Rational(1); }, 8);
    CHECK(class_counts(blocks) == class_counts(trees));
}

TEST_CASE("block-tree enumeration agrees with exhaustive graph scan") {
    auto per = cacti_trees_up_to(6, 3);
    for (int n = 2; n <= 6; ++n)
        CHECK(scan_rooted_block_graphs(n, 3) == (long long)per[std::size_t(n)].size());
}

TEST_CASE("front-rooted k-tree branches by hedron count") {
    auto k2 = ktree_objects_up_to(2, 6);
    CHECK(class_counts(k2) == std::vector<long long>{1, 2, 7, 26, 107, 458});
    auto k3 = ktree_objects_up_to(3, 6);
    CHECK(class_counts(k3) == std::vector<long long>{1, 3, 15, 82, 495, 3144});
    // k = 1 degenerates to unordered rooted trees
    auto k1 = ktree_objects_up_to(1, 8);
    CHECK(class_counts(k1) == std::vector<long long>{1, 1, 2, 4, 9, 20, 48, 115});
}

TEST_CASE("canonical codes identify isomorphic rooted graphs") {
    enr::Graph a(4), b(4);
    // same triangle-with-pendant, different labellings, root 0 in both
    a.add_edge(0, 1);
    a.add_edge(1, 2);
    a.add_edge(2, 0);
    a.add_edge(2, 3);
    b.add_edge(0, 3);
    b.add_edge(3, 1);
    b.add_edge(1, 0);
    b.add_edge(1, 2);
    CHECK(canonical_graph_code(a, 1) == canonical_graph_code(b, 1));

    // rooting a path at the end vs the middle must differ
    enr::Graph p1(3), p2(3);
    p1.add_edge(0, 1);
    p1.add_edge(1, 2); // root 0 is an endpoint
    p2.add_edge(1, 0);
    p2.add_edge(0, 2); // root 0 is the centre
    CHECK(canonical_graph_code(p1, 1) != canonical_graph_code(p2, 1));
}
