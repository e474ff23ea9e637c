#include "doctest.h"

#include <cmath>
#include <random>

#include "selfsim/quad.hpp"

using namespace selfsim;

namespace {

// int r^k rho over R^n, from the Gamma function
double gaussian_moment(int n, double k) {
    double sphere = 2 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
    return std::pow(4 * M_PI, -n / 2.0) * sphere * std::pow(2.0, n - 1 + k) * std::tgamma((n + k) / 2.0);
}

// int e^{-|y|^2/(4b)} G(y - x0, t0) dy, a convolution of two Gaussians
double gaussian_offset(int n, double b, double x0, double t0) {
    double a = -t0;
    return std::pow(b / (a + b), n / 2.0) * std::exp(-x0 * x0 / (4 * (a + b)));
}

}  // namespace

TEST_CASE("rho has unit mass for n in [1, 12]") {
    for (int n = 1; n <= 12; ++n) {
        auto rule = radial_rule(n, 64);
        CHECK(std::abs(weighted_integral(rule, [](double) { return 1.0; }) - 1.0) < 1e-12);
        auto comp = composite_rule(n);
        CHECK(std::abs(weighted_integral(comp, [](double) { return 1.0; }) - 1.0) < 1e-12);
    }
}

TEST_CASE("Gaussian moments") {
    auto r3 = radial_rule(3, 64);
    CHECK(std::abs(weighted_integral(r3, [](double r) { return r * r; }) - 6.0) < 1e-10);
    double k3 = std::sqrt(0.5);
    CHECK(weighted_integral(r3, [&](double) { return k3 * k3; }) == doctest::Approx(0.5).epsilon(1e-14));
    // int |y|^4 rho = 4n(n+2): 140 for n = 5 and 60 for n = 3
    CHECK(std::abs(weighted_integral(radial_rule(5, 64), [](double r) { return std::pow(r, 4); }) - 140.0) < 1e-9);
    CHECK(std::abs(weighted_integral(r3, [](double r) { return std::pow(r, 4); }) - 60.0) < 1e-9);
    for (int n : {1, 2, 4, 7}) {
        for (double k : {2.0, 6.0}) {
            double v = weighted_integral(radial_rule(n, 64), [&](double r) { return std::pow(r, k); });
            CHECK(v == doctest::Approx(gaussian_moment(n, k)).epsilon(1e-11));
        }
    }
}

TEST_CASE("power rule integrates the singular energy density") {
    // f = r^{-2(p+1)/(p-1)} = r^{-4} for n = 7, p = 3
    auto rule = power_rule(7, 4.0, 64);
    double v = weighted_integral(rule, [](double) { return 1.0; });
    CHECK(v == doctest::Approx(gaussian_moment(7, -4.0)).epsilon(1e-12));
}

TEST_CASE("weighted_integral rejects non-finite integrands") {
    auto rule = radial_rule(3, 16);
    CHECK_THROWS_AS(weighted_integral(rule, [](double) { return NAN; }), Error);
}

TEST_CASE("offset integral") {
    auto rr = composite_rule(3);
    auto ra = angular_rule(3);
    auto one = [](double) { return 1.0; };
    CHECK(std::abs(offset_integral(rr, ra, one, 0.0, -1.0) - 1.0) < 1e-10);
    CHECK(std::abs(offset_integral(rr, ra, one, 1.7, -1.0) - 1.0) < 1e-10);
    CHECK(std::abs(offset_integral(rr, ra, one, 3.0, -0.25) - 1.0) < 1e-10);
    CHECK_THROWS_AS(offset_integral(rr, ra, one, 0.0, 0.0), Error);
    CHECK_THROWS_AS(offset_integral(rr, ra, one, 0.0, 1.0), Error);

    auto e = [](double r) { return std::exp(-r); };
    double a = offset_integral(rr, ra, e, 0.0, -1.0), b = weighted_integral(rr, e);
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));

    for (int n : {2, 3, 5}) {
        auto rrn = composite_rule(n);
        auto ran = angular_rule(n);
        for (double x0 : {0.0, 0.8, 2.5}) {
            for (double t0 : {-0.5, -1.0, -3.0}) {
                double bw = 0.7;
                double v = offset_integral(rrn, ran, [&](double r) { return std::exp(-r * r / (4 * bw)); }, x0, t0);
                CHECK(v == doctest::Approx(gaussian_offset(n, bw, x0, t0)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("offset integral at x0 = 0 matches weighted_integral on random smooth functions") {
    std::mt19937 gen(0);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto rr = composite_rule(3);
    auto ra = angular_rule(3);
    for (int k = 0; k < 20; ++k) {
        double c0 = U(gen), c1 = U(gen), c2 = 0.5 + 0.4 * U(gen);
        auto f = [&](double r) { return c0 + c1 * std::cos(r) * std::exp(-c2 * r * r); };
        double a = offset_integral(rr, ra, f, 0.0, -1.0), b = weighted_integral(rr, f);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("offset kernel rule") {
    for (int n : {1, 2, 3, 4, 7}) {
        for (double x0 : {1e-8, 0.3, 2.5, 9.0}) {
            for (double t0 : {-0.01, -1.0, -std::exp(4.0)}) {
                auto rule = offset_kernel_rule(n, x0, t0);
                CHECK(rule.mass_error < 1e-12);
                double bw = 0.3;
                double v = weighted_integral(rule, [&](double r) { return std::exp(-r * r / (4 * bw)); });
                CHECK(v == doctest::Approx(gaussian_offset(n, bw, x0, t0)).epsilon(1e-10));
            }
        }
    }
    // a narrow core far from the kernel center, where a tensor rule in (r, theta) aliases
    double exact = gaussian_offset(3, 1e-3, 2.5, -std::exp(4.0));
    double v = weighted_integral(offset_kernel_rule(3, 2.5, -std::exp(4.0)),
                                 [](double r) { return std::exp(-r * r / 4e-3); });
    CHECK(v == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("certified integrals") {
    auto c = integrate_certified(3, [](double r) { return std::cos(r) * std::exp(-r * r / 8); });
    CHECK(c.doubling_change <= 1e-10);
    double exact = weighted_integral(radial_rule(3, 64), [](double r) { return std::cos(r) * std::exp(-r * r / 8); });
    CHECK(c.value == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("log_gamma") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0));
    CHECK(std::abs(log_gamma(1.0)) < 1e-14);
    CHECK(std::abs(log_gamma(0.5) - 0.5723649) < 1e-7);
    CHECK(std::abs(log_gamma(5.0) - std::log(24.0)) < 1e-12);
    for (double x = 0.1; x <= 200.0; x *= 1.13) CHECK(log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-12));
    CHECK_THROWS_AS(log_gamma(0.0), Error);
    CHECK_THROWS_AS(log_gamma(-2.5), Error);
}
