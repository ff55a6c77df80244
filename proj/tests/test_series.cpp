#include <catch2/catch_amalgamated.hpp>

#include <enrtrees/rational.hpp>
#include <enrtrees/series.hpp>

using enr::Rational;
using enr::TruncatedSeries;

TEST_CASE("multiplication is the truncated cauchy product") {
    TruncatedSeries<Rational> a(2);
    a[0] = Rational(1);
    a[1] = Rational(1);
    auto sq = enr::series_multiply(a, a);
    CHECK(sq[0] == Rational(1));
    CHECK(sq[1] == Rational(2));
    CHECK(sq[2] == Rational(1));

    // truncation drops z^3 and beyond
    TruncatedSeries<Rational> b(2);
    b[1] = Rational(1);
    b[2] = Rational(1);
    auto p = enr::series_multiply(b, b);
    CHECK(p[0] == Rational(0));
    CHECK(p[1] == Rational(0));
    CHECK(p[2] == Rational(1));
}

TEST_CASE("catalan fixed point converges coefficientwise") {
    const int N = 10;
    TruncatedSeries<Rational> c(N);
    c[0] = Rational(1);
    for (int it = 0; it <= N; ++it) {
        auto c2 = enr::series_multiply(c, c);
        TruncatedSeries<Rational> next(N);
        next[0] = Rational(1);
        for (int n = 1; n <= N; ++n) next[std::size_t(n)] = c2[std::size_t(n - 1)];
        c = next;
    }
    const long long cat[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796};
    for (int n = 0; n <= N; ++n) CHECK(c[std::size_t(n)] == Rational(cat[n]));
}

TEST_CASE("series exp matches the taylor expansion") {
    TruncatedSeries<double> z(6);
    z[1] = 1.0;
    auto e = enr::series_exp(z);
    CHECK(e[0] == Catch::Approx(1.0));
    CHECK(e[1] == Catch::Approx(1.0));
    CHECK(e[2] == Catch::Approx(0.5));
    CHECK(e[3] == Catch::Approx(1.0 / 6));
    CHECK(e[6] == Catch::Approx(1.0 / 720));

    TruncatedSeries<double> zero(4);
    auto one = enr::series_exp(zero);
    CHECK(one[0] == 1.0);
    CHECK(one[3] == 0.0);

    TruncatedSeries<double> bad(3);
    bad[0] = 1.0;
    CHECK_THROWS_AS(enr::series_exp(bad), std::domain_error);
}

TEST_CASE("series exp over rationals") {
    // exp(z + z^2) = 1 + z + 3/2 z^2 + 7/6 z^3 + ...
    TruncatedSeries<Rational> a(3);
    a[1] = Rational(1);
    a[2] = Rational(1);
    auto e = enr::series_exp(a);
    CHECK(e[0] == Rational(1));
    CHECK(e[1] == Rational(1));
    CHECK(e[2] == Rational(3, 2));
    CHECK(e[3] == Rational(7, 6));
}

TEST_CASE("substitute power relocates coefficients") {
    TruncatedSeries<Rational> a(6);
    a[1] = Rational(1);
    a[2] = Rational(1);
    auto s = enr::substitute_power(a, 3);
    CHECK(s.cap() == 6);
    CHECK(s[3] == Rational(1));
    CHECK(s[6] == Rational(1));
    CHECK(s[1] == Rational(0));
    CHECK(s[2] == Rational(0));

    auto id = enr::substitute_power(a, 1);
    for (int n = 0; n <= 6; ++n) CHECK(id[std::size_t(n)] == a[std::size_t(n)]);

    CHECK_THROWS_AS(enr::substitute_power(a, 0), std::domain_error);
}

TEST_CASE("cap mismatch is rejected") {
    TruncatedSeries<double> a(3), b(4);
    CHECK_THROWS_AS(enr::series_multiply(a, b), std::domain_error);
    CHECK_THROWS_AS(enr::series_add(a, b), std::domain_error);
}

TEST_CASE("evaluation and derivative") {
    TruncatedSeries<double> p(3);
    p[0] = 1;
    p[1] = 2;
    p[3] = 4; // 1 + 2x + 4x^3
    CHECK(p.eval(0.5) == Catch::Approx(1 + 1 + 0.5));
    CHECK(p.eval_derivative(0.5) == Catch::Approx(2 + 12 * 0.25));
}
