#include <catch2/catch_amalgamated.hpp>

#include <enrtrees/rational.hpp>

using enr::Rational;

TEST_CASE("construction reduces and fixes sign") {
    CHECK(Rational(6, 4) == Rational(3, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(5).den() == 1);
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("field arithmetic") {
    Rational half(1, 2), third(1, 3), sixth(1, 6);
    CHECK(half + third + sixth == Rational(1));
    CHECK(half - third == sixth);
    CHECK(half * third == sixth);
    CHECK(sixth / third == half);
    CHECK(-half == Rational(-1, 2));
    CHECK_THROWS_AS(half / Rational(0), std::domain_error);

    Rational acc(0);
    for (int k = 1; k <= 10; ++k) acc += Rational(1, k) - Rational(1, k + 1);
    CHECK(acc == Rational(10, 11)); // telescoping, exact
}

TEST_CASE("comparisons") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(1, 3));
    CHECK(Rational(2, 4) <= Rational(1, 2));
    CHECK(Rational(7, 3) > Rational(2));
    CHECK(Rational(1, 3) != Rational(1, 4));
}

TEST_CASE("pow") {
    CHECK(Rational(2, 3).pow(0) == Rational(1));
    CHECK(Rational(2, 3).pow(3) == Rational(8, 27));
    CHECK(Rational(-1, 2).pow(2) == Rational(1, 4));
    CHECK(Rational(-1, 2).pow(3) == Rational(-1, 8));
}

TEST_CASE("string form") {
    CHECK(Rational(3, 2).str() == "3/2");
    CHECK(Rational(4, 2).str() == "2");
    CHECK(Rational(-1, 3).str() == "-1/3");
}

TEST_CASE("to_double") {
    CHECK(Rational(1, 4).to_double() == 0.25);
    CHECK(Rational(1, 3).to_double() == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("overflow is detected, not wrapped") {
    Rational big(INT64_MAX);
    CHECK_THROWS_AS(big * Rational(2), std::overflow_error);
    CHECK_THROWS_AS(big + Rational(1), std::overflow_error);
    // intermediate products beyond 64 bits are fine when the result reduces
    Rational a(INT64_MAX, 2), b(2, INT64_MAX);
    CHECK(a * b == Rational(1));
}
