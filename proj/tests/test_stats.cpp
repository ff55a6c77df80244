#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include <enrtrees/rng.hpp>
#include <enrtrees/stats.hpp>

using namespace enr;
using Catch::Approx;

TEST_CASE("upper incomplete gamma matches closed forms") {
    // Q(1/2, x) = erfc(sqrt(x)) — exercises both the series and the
    // continued-fraction branch
    for (double x : {0.05, 0.25, 0.9, 1.4, 2.0, 4.0, 9.0, 25.0})
        CHECK(gamma_q(0.5, x) == Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    // Q(1, x) = exp(-x)
    for (double x : {0.1, 1.0, 3.0, 10.0})
        CHECK(gamma_q(1.0, x) == Approx(std::exp(-x)).epsilon(1e-12));
    // Q(3/2, x) = erfc(sqrt(x)) + 2 sqrt(x/pi) exp(-x)
    for (double x : {0.2, 1.0, 2.4, 7.0}) {
        double ref = std::erfc(std::sqrt(x)) +
                     2.0 * std::sqrt(x / 3.14159265358979323846) * std::exp(-x);
        CHECK(gamma_q(1.5, x) == Approx(ref).epsilon(1e-12));
    }
    // integer a: Q(k, x) = exp(-x) * sum_{j<k} x^j / j!
    for (int k : {2, 3, 5, 8}) {
        for (double x : {0.5, 2.0, 6.0, 15.0}) {
            double term = 1.0, sum = 1.0;
            for (int j = 1; j < k; ++j) {
                term *= x / double(j);
                sum += term;
            }
            CHECK(gamma_q(double(k), x) == Approx(std::exp(-x) * sum).epsilon(1e-12));
        }
    }
    CHECK(gamma_q(2.5, 0.0) == 1.0);
    CHECK_THROWS_AS(gamma_q(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gamma_q(1.0, -0.5), std::domain_error);
}

TEST_CASE("chi-square tail probabilities hit the standard critical values") {
    CHECK(chi_square_pvalue(3.841458820694124, 1) == Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_pvalue(5.991464547107979, 2) == Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_pvalue(9.487729036781154, 4) == Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_pvalue(18.307038053275146, 10) == Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_pvalue(2.0, 2) == Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(chi_square_pvalue(0.0, 7) == 1.0);
    CHECK(chi_square_pvalue(5.0, 0) == 1.0);
    CHECK(chi_square_pvalue(5.0, -3) == 1.0);
}

TEST_CASE("goodness of fit on hand-counted tables") {
    Census obs;
    obs.add("a", 60);
    obs.add("b", 40);
    std::map<std::string, double> fair{{"a", 0.5}, {"b", 0.5}};
    auto rep = chi_square_gof(obs, fair);
    CHECK(rep.stat == Approx(4.0).epsilon(1e-12)); // (10^2 + 10^2) / 50
    CHECK(rep.df == 1);
    CHECK(rep.n == 100);
    CHECK(rep.pvalue == Approx(chi_square_pvalue(4.0, 1)).epsilon(1e-12));
    CHECK(rep.impossible_class.empty());

    // perfect fit
    Census even;
    even.add("a", 50);
    even.add("b", 50);
    CHECK(chi_square_gof(even, fair).stat == Approx(0.0).margin(1e-12));
    CHECK(chi_square_gof(even, fair).pvalue == Approx(1.0).epsilon(1e-12));

    // a class the model forbids forces the strongest rejection
    Census bad;
    bad.add("a", 10);
    bad.add("z", 1);
    auto rb = chi_square_gof(bad, fair);
    CHECK(rb.pvalue == 0.0);
    CHECK(rb.impossible_class == "z");
    std::map<std::string, double> withzero{{"a", 0.5}, {"b", 0.5}, {"z", 0.0}};
    auto rz = chi_square_gof(bad, withzero);
    CHECK(rz.pvalue == 0.0);
    CHECK(rz.impossible_class == "z");

    // a zero-probability class merely listed does not change the table
    Census ok;
    ok.add("a", 55);
    ok.add("b", 45);
    auto rw = chi_square_gof(ok, withzero);
    CHECK(rw.df == 1);
    CHECK(rw.impossible_class.empty());

    std::map<std::string, double> short_probs{{"a", 0.5}, {"b", 0.25}};
    CHECK_THROWS_AS(chi_square_gof(obs, short_probs), std::domain_error);
    Census empty;
    CHECK_THROWS_AS(chi_square_gof(empty, fair), std::domain_error);
}

TEST_CASE("goodness of fit accepts a true multinomial") {
    RngStream rng(42, 400);
    std::map<std::string, double> probs{
        {"c0", 0.4}, {"c1", 0.3}, {"c2", 0.2}, {"c3", 0.1}};
    Census obs;
    for (int i = 0; i < 20000; ++i) {
        double u = rng.next_u01();
        if (u < 0.4) obs.add("c0");
        else if (u < 0.7) obs.add("c1");
        else if (u < 0.9) obs.add("c2");
        else obs.add("c3");
    }
    auto rep = chi_square_gof(obs, probs);
    CHECK(rep.df == 3);
    CHECK(rep.pvalue > 1e-3);
}

TEST_CASE("total variation distance on hand censuses") {
    Census a, b;
    a.add("x", 1);
    b.add("x", 1);
    CHECK(tv_distance(a, b) == Approx(0.0).margin(1e-15));
    CHECK(tv_standard_error(a, b) == Approx(1.0).epsilon(1e-12)); // 1/sqrt(1)

    Census c;
    c.add("y", 1);
    CHECK(tv_distance(a, c) == Approx(1.0).epsilon(1e-12));

    Census d, e;
    d.add("x", 1);
    d.add("y", 1);
    e.add("x", 2);
    CHECK(tv_distance(d, e) == Approx(0.5).epsilon(1e-12));

    Census f, g;
    f.add("x", 3);
    f.add("y", 1);
    g.add("x", 1);
    g.add("y", 1);
    CHECK(tv_distance(f, g) == Approx(0.25).epsilon(1e-12));
    CHECK(tv_distance(g, f) == Approx(0.25).epsilon(1e-12));

    Census big_a, big_b;
    for (int i = 0; i < 400; ++i) big_a.add("x");
    for (int i = 0; i < 100; ++i) big_b.add("x");
    CHECK(tv_standard_error(big_a, big_b) == Approx(0.1).epsilon(1e-12)); // 1/sqrt(100)

    Census empty;
    CHECK_THROWS_AS(tv_distance(empty, a), std::domain_error);
    CHECK_THROWS_AS(tv_standard_error(a, empty), std::domain_error);
}

TEST_CASE("moment summaries on known samples") {
    auto r = moments({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(r.n == 5);
    CHECK(r.mean == Approx(3.0).epsilon(1e-15));
    CHECK(r.sd == Approx(std::sqrt(2.5)).epsilon(1e-12));
    CHECK(r.se == Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(r.skewness == Approx(0.0).margin(1e-12));

    auto s = moments({0.0, 0.0, 0.0, 1.0});
    CHECK(s.mean == Approx(0.25).epsilon(1e-15));
    CHECK(s.skewness == Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));

    auto one = moments({5.0});
    CHECK(one.n == 1);
    CHECK(one.mean == 5.0);
    CHECK(one.sd == 0.0);
    CHECK(one.skewness == 0.0);

    CHECK(moments({}).n == 0);
}

TEST_CASE("lattice span detector") {
    CHECK(sample_span({}) == 0);
    CHECK(sample_span({7}) == 0);
    CHECK(sample_span({4, 4, 4}) == 0);
    CHECK(sample_span({3, 7, 11}) == 4);
    CHECK(sample_span({2, 5}) == 3);
    CHECK(sample_span({1, 3, 5, 9}) == 2);
    CHECK(sample_span({1, 3, 5, 8}) == 1);
    CHECK(sample_span({-4, 0, 8}) == 4);
}

TEST_CASE("log tail slope recovers an exponential rate") {
    RngStream rng(42, 401);
    std::vector<double> xs;
    for (int i = 0; i < 40000; ++i) xs.push_back(rng.next_exp1());
    double slope = tail_log_slope(xs);
    CHECK(slope == Approx(-1.0).margin(0.12));

    std::vector<double> tiny(30, 1.0);
    CHECK_THROWS_AS(tail_log_slope(tiny), std::domain_error);
    std::vector<double> flat(200, 1.0);
    CHECK_THROWS_AS(tail_log_slope(flat), std::domain_error);
}

TEST_CASE("scaling rows aggregate moments and normalizations") {
    RngStream rng(42, 402);
    std::vector<double> diam, height;
    for (int i = 0; i < 5000; ++i) {
        double e = rng.next_exp1();
        diam.push_back(2.0 * e);
        height.push_back(e);
    }
    auto row = scaling_row(16, diam, height);
    CHECK(row.n == 16);
    CHECK(row.samples == 5000);
    CHECK(row.ratio == Approx(2.0).epsilon(1e-12));
    CHECK(row.d_over_sqrt == Approx(row.mean_diameter / 4.0).epsilon(1e-12));
    CHECK(row.h_over_sqrt == Approx(row.mean_height / 4.0).epsilon(1e-12));
    CHECK(row.mean_diameter == Approx(2.0).margin(0.1));
    CHECK(row.d_se == Approx(row.mean_diameter / std::sqrt(5000.0)).epsilon(0.05));
    CHECK(row.tail_slope < 0.0);
}
