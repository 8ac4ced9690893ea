#include <catch2/catch_amalgamated.hpp>

#include "gsk/gauss.hpp"

#include <cmath>
#include <random>

using namespace gsk;

TEST_CASE("pdf basics") {
    // 1/sqrt(2 pi), frozen from a high-precision oracle
    CHECK(pdf(0.0) == Catch::Approx(0.3989422804014326779).epsilon(1e-15));
    CHECK(pdf(1.7) == pdf(-1.7));
    CHECK(pdf(40.0) >= 0.0);
    CHECK(pdf(40.0) < 1e-300);
}

TEST_CASE("cdf reference values") {
    CHECK(cdf(0.0) == 0.5);
    CHECK(cdf(1.0) == Catch::Approx(0.8413447460685429486).epsilon(1e-15));
    CHECK(cdf(-8.0) == Catch::Approx(6.220960574271784e-16).epsilon(1e-13));
    CHECK(cdf(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(cdf(-std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("cdf tail accuracy and symmetry") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-37.0, 37.0);
    for (int i = 0; i < 2000; ++i) {
        double x = U(rng);
        CHECK(std::abs(cdf(x) + cdf(-x) - 1.0) <= 1e-15);
        CHECK(cdf(x) >= 0.0);
        CHECK(cdf(x) <= 1.0);
    }
    // strict monotonicity where 1 - cdf is representable; beyond ~8.3
    // the value saturates at 1.0 in double precision
    double prev = cdf(-37.0);
    for (double x = -36.5; x <= 37.0; x += 0.5) {
        double c = cdf(x);
        if (x <= 8.0) CHECK(c > prev);
        else CHECK(c >= prev);
        prev = c;
    }
    // the complementary side keeps resolving the upper tail
    prev = cdf_bar(8.0);
    for (double x = 8.5; x <= 37.0; x += 0.5) {
        CHECK(cdf_bar(x) < prev);
        prev = cdf_bar(x);
    }
}

TEST_CASE("quantile roundtrips") {
    CHECK(quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
    CHECK(quantile(0.8413447460685429486) == Catch::Approx(1.0).margin(1e-10));
    for (double x : {-3.0, -1.0, 0.0, 2.0})
        CHECK(quantile(cdf(x)) == Catch::Approx(x).margin(1e-10));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> E(-12.0, 0.0);
    for (int i = 0; i < 2000; ++i) {
        double s = std::pow(10.0, E(rng));
        if (i % 2) s = 1.0 - s;
        double x = quantile(s);
        CHECK(std::abs(cdf(x) - s) <= 1e-13);
    }
    CHECK_THROWS_AS(quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(quantile(-0.2), std::domain_error);
}

TEST_CASE("interval_mass") {
    CHECK(interval_mass(-std::numeric_limits<double>::infinity(), 0.0) == 0.5);
    CHECK(interval_mass(-1.0, 1.0) == Catch::Approx(0.6826894921370858972).epsilon(1e-14));
    // same-tail difference must not cancel to zero
    double m = interval_mass(8.0, 9.0);
    CHECK(m > 0.0);
    CHECK(m == Catch::Approx(6.219831985865830e-16).epsilon(1e-12));
    CHECK_THROWS_AS(interval_mass(1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(interval_mass(2.0, 1.0), std::domain_error);
}

TEST_CASE("interval_mass matches composite quadrature of pdf") {
    // composite Simpson over partitions of (-L, L)
    for (double L : {2.0, 5.0, 8.0}) {
        int n = 40000;
        double h = 2 * L / n, acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double a = -L + i * h;
            acc += h / 6.0 * (pdf(a) + 4.0 * pdf(a + 0.5 * h) + pdf(a + h));
        }
        CHECK(std::abs(acc - interval_mass(-L, L)) <= 1e-12);
    }
}
