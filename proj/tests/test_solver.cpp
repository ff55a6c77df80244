#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <enrtrees/solver.hpp>

using namespace enr;

namespace {

std::vector<long long> int_coeffs(const TruncatedSeries<Rational>& s) {
    std::vector<long long> v;
    for (int n = 1; n <= s.cap(); ++n) {
        REQUIRE(s[std::size_t(n)].den() == 1);
        v.push_back(s[std::size_t(n)].num());
    }
    return v;
}

} // namespace

TEST_CASE("unrestricted multiset tree counts") {
    auto fam = solve_enriched_fixed_point<Rational>(make_polya_model_unrestricted(), 12);
    CHECK(int_coeffs(fam.unlabelled()) ==
          std::vector<long long>{1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766});
    CHECK(fam.flat);
}

TEST_CASE("binary multiset tree counts") {
    auto sp = make_polya_model({{0, Rational(1)}, {2, Rational(1)}});
    auto fam = solve_enriched_fixed_point<Rational>(sp, 15);
    CHECK(int_coeffs(fam.unlabelled()) ==
          std::vector<long long>{1, 0, 1, 0, 1, 0, 2, 0, 3, 0, 6, 0, 11, 0, 23});
}

TEST_CASE("sequence tree counts are catalan") {
    auto fam = solve_enriched_fixed_point<Rational>(make_seq_model(), 12);
    CHECK(int_coeffs(fam.unlabelled()) ==
          std::vector<long long>{1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786});
}

TEST_CASE("plane binary tree counts") {
    auto fam = solve_enriched_fixed_point<Rational>(make_seq_model(std::set<int>{0, 2}), 9);
    CHECK(int_coeffs(fam.unlabelled()) == std::vector<long long>{1, 0, 1, 0, 2, 0, 5, 0, 14});
}

TEST_CASE("weighted degree tree totals") {
    auto sp = make_polya_model({{0, Rational(1)}, {2, Rational(2)}, {3, Rational(1)}});
    auto fam = solve_enriched_fixed_point<Rational>(sp, 9);
    CHECK(int_coeffs(fam.unlabelled()) == std::vector<long long>{1, 0, 2, 1, 4, 4, 17, 20, 58});
    CHECK_FALSE(fam.flat);
    CHECK(fam.has_member(2));
    CHECK(fam.has_member(3));
}

TEST_CASE("weight powers do not collapse") {
    // kappa_0 = 3, kappa_2 = 2: the z^3 coefficient needs the squared-weight
    // member (kappa^2 on 2-cycles), giving 2*(9+9)/2 = 18 rather than 12.
    auto sp = make_polya_model({{0, Rational(3)}, {2, Rational(2)}});
    auto fam = solve_enriched_fixed_point<Rational>(sp, 5);
    CHECK(int_coeffs(fam.unlabelled()) == std::vector<long long>{3, 0, 18, 0, 108});
    CHECK(fam.member(2)[1] == Rational(9));
}

TEST_CASE("cactus tree counts") {
    auto fam = solve_enriched_fixed_point<Rational>(make_block_species(cacti_catalog(3)), 8);
    CHECK(int_coeffs(fam.unlabelled()) ==
          std::vector<long long>{1, 1, 3, 7, 21, 60, 190, 600});
}

TEST_CASE("edge blocks reproduce plain multiset trees") {
    auto blocks = solve_enriched_fixed_point<Rational>(make_block_species(edge_catalog()), 10);
    auto plain = solve_enriched_fixed_point<Rational>(make_polya_model_unrestricted(), 10);
    CHECK(int_coeffs(blocks.unlabelled()) == int_coeffs(plain.unlabelled()));
}

TEST_CASE("k-coding tree counts") {
    auto f2 = solve_enriched_fixed_point<Rational>(make_ktree_species(2), 6);
    CHECK(int_coeffs(f2.unlabelled()) == std::vector<long long>{1, 2, 7, 26, 107, 458});
    auto f3 = solve_enriched_fixed_point<Rational>(make_ktree_species(3), 6);
    CHECK(int_coeffs(f3.unlabelled()) == std::vector<long long>{1, 3, 15, 82, 495, 3144});

    auto f1 = solve_enriched_fixed_point<Rational>(make_ktree_species(1), 10);
    auto plain = solve_enriched_fixed_point<Rational>(make_polya_model_unrestricted(), 10);
    CHECK(int_coeffs(f1.unlabelled()) == int_coeffs(plain.unlabelled()));
}

TEST_CASE("gamma-weighted edge blocks carry the power family") {
    BlockCatalog heavy = edge_catalog();
    heavy.entries[0].gamma = Rational(2);
    auto fam = solve_enriched_fixed_point<Rational>(make_block_species(heavy), 8);
    // every edge carries weight 2, so a_n = (plain count) * 2^(n-1)
    CHECK(int_coeffs(fam.unlabelled()) ==
          std::vector<long long>{1, 2, 8, 32, 144, 640, 3072, 14720});
    CHECK_FALSE(fam.flat);
    // the squared member carries 4^(n-1); its cap is half the solve cap
    REQUIRE(fam.member(2).cap() == 4);
    CHECK(fam.member(2)[1] == Rational(1));
    CHECK(fam.member(2)[2] == Rational(4));
    CHECK(fam.member(2)[3] == Rational(32));
    CHECK(fam.member(2)[4] == Rational(256));
}

TEST_CASE("floating point solve matches the exact one") {
    auto ex = solve_enriched_fixed_point<Rational>(make_block_species(cacti_catalog(3)), 12);
    auto fl = solve_enriched_fixed_point<double>(make_block_species(cacti_catalog(3)), 12, 1.0);
    for (int n = 1; n <= 12; ++n)
        CHECK(fl.unlabelled()[std::size_t(n)] ==
              Catch::Approx(ex.unlabelled()[std::size_t(n)].to_double()).epsilon(1e-12));
}

TEST_CASE("overflow in weighted solves is detected") {
    auto sp = make_polya_model({{0, Rational(3)}, {2, Rational(2)}});
    CHECK_THROWS_AS(solve_enriched_fixed_point<double>(sp, 800, 1.0), std::overflow_error);
}

TEST_CASE("criticality of sequence trees") {
    auto an = analyze_criticality(make_seq_model(), 128);
    const auto& r = an.report;
    CHECK(r.rho == Catch::Approx(0.25).epsilon(1e-9));
    CHECK(r.A_rho == Catch::Approx(0.5).epsilon(1e-9));
    CHECK(r.Exi == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(r.Vxi == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(r.Ezeta == 0.0);
    CHECK(r.Vzeta == 0.0);
    CHECK(r.mu == Catch::Approx(1.0));
    CHECK(r.span == 1);
}

TEST_CASE("criticality of unrestricted multiset trees") {
    auto an = analyze_criticality(make_polya_model_unrestricted(), 128);
    const auto& r = an.report;
    // the tree-radius constant, correct far beyond the asserted precision
    CHECK(r.rho == Catch::Approx(0.3383218568992077).epsilon(1e-8));
    CHECK(r.A_rho == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(r.Exi == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(r.Vxi > 0.0);
    CHECK(r.Ezeta > 0.0);
    CHECK(r.mu > 0.0);
    CHECK(r.mu < 1.0);
    CHECK(r.span == 1);
    CHECK(r.i_max >= 4);
    CHECK(r.i_max <= 64);
}

TEST_CASE("criticality respects the binary lattice") {
    auto sp = make_polya_model({{0, Rational(1)}, {2, Rational(1)}});
    auto an = analyze_criticality(sp, 128);
    const auto& r = an.report;
    // radius squared equals the leaf-counting radius
    CHECK(r.rho * r.rho == Catch::Approx(0.4026975036714413).epsilon(1e-8));
    CHECK(r.Exi == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(r.span == 2);
}

TEST_CASE("criticality of k-coding trees pins the series value") {
    auto a2 = analyze_criticality(make_ktree_species(2), 128);
    CHECK(a2.report.A_rho == Catch::Approx(0.5).epsilon(1e-8));
    auto a3 = analyze_criticality(make_ktree_species(3), 128);
    CHECK(a3.report.A_rho == Catch::Approx(1.0 / 3).epsilon(1e-8));
}

TEST_CASE("coefficient ratios approach the radius") {
    struct Case {
        SpeciesDescriptor sp;
        const char* name;
    };
    std::vector<SpeciesDescriptor> cases{
        make_polya_model_unrestricted(),
        make_seq_model(),
        make_block_species(cacti_catalog(3)),
        make_ktree_species(2),
        make_polya_model({{0, Rational(1)}, {2, Rational(1)}}),
    };
    for (const auto& sp : cases) {
        auto an = analyze_criticality(sp, 128);
        const auto& a = an.family.member(1);
        int span = an.report.span;
        int n = a.cap();
        while (n > 0 && a[std::size_t(n)] == 0.0) --n;
        REQUIRE(n > span);
        double ratio = a[std::size_t(n - span)] / a[std::size_t(n)];
        double est = std::pow(ratio, 1.0 / span);
        CHECK(est == Catch::Approx(an.report.rho).epsilon(0.03));
    }
}

TEST_CASE("scaled solve keeps bulk coefficients bounded") {
    auto an = analyze_criticality(make_polya_model_unrestricted(), 128);
    double rho = an.report.rho;
    auto big = solve_enriched_fixed_point<double>(make_polya_model_unrestricted(), 512, rho);
    const auto& b = big.unlabelled();
    // consistency with the unscaled solve on small orders
    const auto& a = an.family.member(1);
    CHECK(b[10] == Catch::Approx(a[10] * std::pow(rho, 10)).epsilon(1e-10));
    // scaled coefficients decay like n^{-3/2}: n^{1.5} b_n flattens out
    double c256 = b[256] * std::pow(256.0, 1.5);
    double c512 = b[512] * std::pow(512.0, 1.5);
    CHECK(c512 / c256 == Catch::Approx(1.0).margin(0.05));
    for (int n = 1; n <= 512; ++n) CHECK(b[std::size_t(n)] < 10.0);
}

TEST_CASE("cycle content generating function is a pgf") {
    auto an = analyze_criticality(make_polya_model_unrestricted(), 128);
    double rho = an.report.rho, u = an.report.A_rho;
    double g1 = zeta_pgf(make_polya_model_unrestricted(), an.family, rho, u, 1.0, 128);
    CHECK(g1 == Catch::Approx(1.0).epsilon(1e-10));
    double gh = zeta_pgf(make_polya_model_unrestricted(), an.family, rho, u, 0.5, 128);
    double g9 = zeta_pgf(make_polya_model_unrestricted(), an.family, rho, u, 0.9, 128);
    CHECK(gh > 0.0);
    CHECK(gh < g9);
    CHECK(g9 < 1.0);

    auto sq = analyze_criticality(make_seq_model(), 128);
    double gs = zeta_pgf(make_seq_model(), sq.family, sq.report.rho, sq.report.A_rho, 0.5, 128);
    CHECK(gs == Catch::Approx(1.0).epsilon(1e-12)); // sequences carry no cycle content
}
