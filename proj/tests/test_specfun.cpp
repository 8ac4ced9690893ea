#include <catch2/catch_amalgamated.hpp>

#include "gsk/gauss.hpp"
#include "gsk/specfun.hpp"

#include <cmath>

using namespace gsk;

namespace {

// Independent route: the recessive solution written as the Gamma-weighted
// combination of the two homogeneous Kummer solutions (Hermite-function
// form), normalized at the origin. Cancellation-limited for x << 0, so
// comparisons against it stay in the moderate range.
double recessive_kummer(double a, double x) {
    auto raw = [a](double xx) {
        double z = 0.5 * xx * xx;
        return kummer_m(0.5 * a, 0.5, z) / std::tgamma(0.5 * (1.0 + a)) +
               sqrt2 * xx * kummer_m(0.5 * (a + 1.0), 1.5, z) / std::tgamma(0.5 * a);
    };
    return raw(x) / raw(0.0);
}

// five-point stencils; callers keep x and h aligned with the cached
// trajectory nodes so interpolation is exact at the sample points
template <class F>
double fd_second(const F& y, double x, double h) {
    return (-y(x - 2 * h) + 16 * y(x - h) - 30 * y(x) + 16 * y(x + h) - y(x + 2 * h)) /
           (12 * h * h);
}

template <class F>
double fd_first(const F& y, double x, double h) {
    return (y(x - 2 * h) - 8 * y(x - h) + 8 * y(x + h) - y(x + 2 * h)) / (12 * h);
}

} // namespace

TEST_CASE("kummer_m series identities") {
    CHECK(kummer_m(0.3, 0.9, 0.0) == 1.0);
    CHECK(kummer_m(-2.0, 1.3, 0.0) == 1.0);
    // M(a,a,z) = e^z
    for (double z : {0.5, 1.0, 5.0})
        CHECK(kummer_m(0.7, 0.7, z) == Catch::Approx(std::exp(z)).epsilon(1e-13));
    // M(1,2,z) = (e^z - 1)/z
    CHECK(kummer_m(1.0, 2.0, 1.0) == Catch::Approx(1.7182818284590452354).epsilon(1e-13));
    CHECK(kummer_m(0.3, 0.7, 5.0) == Catch::Approx(36.751532725408292986).epsilon(1e-12));
}

TEST_CASE("kummer_m large argument") {
    // frozen from a high-precision oracle
    CHECK(kummer_m(0.5, 0.25, 60.0) == Catch::Approx(6.487814530243930957e+26).epsilon(1e-11));
    CHECK(kummer_m(1.5, 0.5, 120.0) == Catch::Approx(3.143075916928653794e+54).epsilon(1e-11));
    CHECK(kummer_m(2.3, 3.1, 200.0) == Catch::Approx(1.953440825330223493e+85).epsilon(1e-11));
}

TEST_CASE("kummer_m domain errors") {
    CHECK_THROWS_AS(kummer_m(1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(kummer_m(1.0, -3.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(kummer_m(1.0, 2.0, 1e4), std::overflow_error);
}

TEST_CASE("kummer_m satisfies the defining ODE") {
    // z M'' + (c - z) M' - b M = 0, derivatives by the contiguous
    // relation M'(b,c,z) = (b/c) M(b+1,c+1,z)
    for (double b : {0.25, 1.0, 2.5}) {
        for (double c : {0.5, 1.5, 3.2}) {
            for (double z : {0.3, 2.0, 10.0, 40.0}) {
                double M = kummer_m(b, c, z);
                double M1 = b / c * kummer_m(b + 1, c + 1, z);
                double M2 = b / c * (b + 1) / (c + 1) * kummer_m(b + 2, c + 2, z);
                double resid = z * M2 + (c - z) * M1 - b * M;
                double scale = std::abs(z * M2) + std::abs((c - z) * M1) + std::abs(b * M);
                CHECK(std::abs(resid) <= 1e-8 * scale);
            }
        }
    }
}

TEST_CASE("homogeneous Kummer pair solves the weighted equation") {
    // w1 = M(a/2,1/2,x^2/2) and w2 = x M((a+1)/2,3/2,x^2/2) both satisfy
    // -w'' + x w' + a w = 0; residual via central differences
    double h = 1e-4;
    for (double a : {0.5, 1.0, 2.0}) {
        auto w1 = [a](double x) { return kummer_m(0.5 * a, 0.5, 0.5 * x * x); };
        auto w2 = [a](double x) { return x * kummer_m(0.5 * (a + 1), 1.5, 0.5 * x * x); };
        for (double x : {-4.0, -1.5, 0.4, 2.0, 4.0}) {
            for (auto& w : {std::function<double(double)>(w1), std::function<double(double)>(w2)}) {
                double wpp = (w(x - h) - 2 * w(x) + w(x + h)) / (h * h);
                double wp = (w(x + h) - w(x - h)) / (2 * h);
                double resid = -wpp + x * wp + a * w(x);
                double scale = std::abs(wpp) + std::abs(x * wp) + std::abs(a * w(x)) + 1.0;
                CHECK(std::abs(resid) <= 1e-6 * scale);
            }
        }
    }
}

TEST_CASE("recessive solution decays toward -inf") {
    for (double a : {0.5, 1.0, 2.0}) {
        RecessiveSolution y(a);
        // tends to 0 like |x|^{-a}: values shrink going left, and the
        // compensated product |x|^a y(x) stays bounded
        CHECK(std::abs(y(-30.0)) < std::abs(y(-15.0)));
        CHECK(std::abs(y(-15.0)) < std::abs(y(-8.0)));
        CHECK(std::abs(y(-8.0)) < std::abs(y(-4.0)));
        for (double x : {-8.0, -15.0, -40.0, -100.0})
            CHECK(std::pow(-x, a) * std::abs(y(x)) < 10.0);
    }
    RecessiveSolution y1(1.0);
    CHECK(y1(0.0) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("recessive solution satisfies the homogeneous equation") {
    double h = 4.0 / 512.0; // multiple of the trajectory step
    for (double a : {0.5, 1.0, 2.0}) {
        RecessiveSolution y(a);
        for (double x : {-4.0, -1.0, 0.0, 1.0}) {
            double resid = -fd_second(y, x, h) + x * fd_first(y, x, h) + a * y(x);
            double scale = std::max({std::abs(y(x)), std::abs(y(x - 0.5)), std::abs(y(x + 0.5))});
            CHECK(std::abs(resid) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("recessive solution matches the Kummer-combination route") {
    // the Gamma-weighted combination loses digits to cancellation as x
    // decreases; by x = -3 it still carries ~12 good digits
    for (double a : {0.5, 1.0, 2.0}) {
        RecessiveSolution y(a);
        for (double x : {-3.0, -2.0, -1.0, -0.3, 0.5, 1.0, 2.0})
            CHECK(y(x) == Catch::Approx(recessive_kummer(a, x)).epsilon(1e-8));
    }
}

TEST_CASE("recessive solution frozen oracle values") {
    // mpmath hyp1f1/gamma combination, 40 digits, normalized at 0
    RecessiveSolution y1(1.0), y2(2.0), yh(0.5);
    CHECK(y1(-6.0) == Catch::Approx(0.12955862864889369865).epsilon(1e-9));
    CHECK(y1(-1.0) == Catch::Approx(0.52315658373024674336).epsilon(1e-10));
    CHECK(y1(2.0) == Catch::Approx(14.441908195414959242).epsilon(1e-10));
    CHECK(y2(-4.0) == Catch::Approx(0.053390468345757317504).epsilon(1e-9));
    CHECK(y2(1.0) == Catch::Approx(4.4770518117036944669).epsilon(1e-10));
    CHECK(yh(-6.0) == Catch::Approx(0.33234826953228284654).epsilon(1e-9));
    CHECK(yh(2.0) == Catch::Approx(6.8390557286084878340).epsilon(1e-10));
}

TEST_CASE("closed-form torsion boundary and tail") {
    ClosedTorsion v(-1.0, 0.0);
    CHECK(v(0.0) == Catch::Approx(0.0).margin(1e-14));
    // v -> -1/alpha at -inf, but only like |x|^{-a}: the gap scales as
    // the recessive solution itself
    double gap8 = 1.0 - v(-8.0);
    double gap100 = 1.0 - v(-100.0);
    CHECK(gap8 > 0.0);
    CHECK(gap100 > 0.0);
    CHECK(gap100 < 0.15 * gap8);
    CHECK(gap100 * 100.0 == Catch::Approx(gap8 * 8.0).epsilon(0.05)); // ~ C/|x|
    for (double x : {-5.0, -2.0, -0.5, -0.1})
        CHECK(v(x) > 0.0);
    CHECK_THROWS_AS(ClosedTorsion(0.5, 0.0), std::domain_error);
}

TEST_CASE("closed-form torsion satisfies -v'' + x v' = alpha v + 1") {
    double h = 4.0 / 512.0;
    for (double alpha : {-1.0, -3.0}) {
        for (double t : {-1.0, 0.0, 1.0}) {
            ClosedTorsion v(alpha, t);
            for (double x : {t - 3.0, t - 1.5, t - 0.5, t - 0.0625}) {
                double vpp = fd_second(v, x, h);
                double vp = fd_first(v, x, h);
                double resid = -vpp + x * vp - alpha * v(x) - 1.0;
                CHECK(std::abs(resid) <= 1e-6);
            }
        }
    }
}
