#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <enrtrees/rng.hpp>

using enr::RngStream;

TEST_CASE("fixed seed and stream reproduce bit-for-bit") {
    RngStream r(42, 0);
    CHECK(r.next_u64() == 0x3CD3F6BB7A29AFDEULL);
    CHECK(r.next_u64() == 0x5277A2CCFF8B1980ULL);
    CHECK(r.next_u64() == 0x61AE461FB4C4A55FULL);
    CHECK(r.next_u64() == 0x59656BDCB1470F44ULL);
    RngStream s1(42, 1);
    CHECK(s1.next_u64() == 0xDCE35C6DC7433469ULL);
}

TEST_CASE("identical construction gives identical sequences") {
    RngStream a(7, 3), b(7, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("counter tracks draws") {
    RngStream r(1, 2);
    CHECK(r.counter() == 0);
    r.next_u64();
    r.next_u01();
    CHECK(r.counter() == 2);
}

TEST_CASE("u01 lies in the unit interval with the right mean") {
    RngStream r(5, 0);
    double sum = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        double u = r.next_u01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / N - 0.5) < 0.005);
}

TEST_CASE("next_below stays in range and is roughly uniform") {
    RngStream r(9, 0);
    const std::uint64_t n = 8;
    const int N = 80000;
    std::vector<int> cnt(n, 0);
    for (int i = 0; i < N; ++i) {
        auto v = r.next_below(n);
        REQUIRE(v < n);
        ++cnt[v];
    }
    double expect = double(N) / double(n);
    double sigma = std::sqrt(expect * (1.0 - 1.0 / double(n)));
    for (auto c : cnt) CHECK(std::abs(c - expect) < 5 * sigma);
    CHECK_THROWS_AS(r.next_below(0), std::domain_error);
}

TEST_CASE("poisson moments") {
    RngStream r(11, 0);
    const double lambda = 3.0;
    const int N = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        double k = r.next_poisson(lambda);
        s += k;
        s2 += k * k;
    }
    double mean = s / N, var = s2 / N - mean * mean;
    CHECK(std::abs(mean - lambda) < 0.03);
    CHECK(std::abs(var - lambda) < 0.1);
    CHECK(r.next_poisson(0.0) == 0);
    CHECK_THROWS_AS(r.next_poisson(100.0), std::domain_error);
}

TEST_CASE("exp1 mean") {
    RngStream r(13, 0);
    const int N = 200000;
    double s = 0;
    for (int i = 0; i < N; ++i) s += r.next_exp1();
    CHECK(std::abs(s / N - 1.0) < 0.02);
}

TEST_CASE("weighted index draw matches weights") {
    RngStream r(17, 0);
    std::vector<double> w{1.0, 2.0, 3.0};
    const int N = 60000;
    std::vector<int> cnt(3, 0);
    for (int i = 0; i < N; ++i) ++cnt[r.next_index(w, 6.0)];
    CHECK(std::abs(cnt[0] - N / 6.0) < 600);
    CHECK(std::abs(cnt[1] - N / 3.0) < 600);
    CHECK(std::abs(cnt[2] - N / 2.0) < 600);
}
