#include "doctest.h"

#include <cmath>

#include "selfsim/params.hpp"
#include "selfsim/profile.hpp"

using namespace selfsim;

TEST_CASE("make_params accepts and rejects per the supercritical flag") {
    auto par = make_params(3, 7.0, std::nullopt, true);
    CHECK(par.n == 3);
    CHECK(par.p == 7.0);
    CHECK_THROWS_AS(make_params(3, 5.0, std::nullopt, true), Error);
    CHECK_NOTHROW(make_params(6, 5.0, std::nullopt, true));
    // without the flag any p > 1 is fine
    CHECK_NOTHROW(make_params(3, 2.0));
    CHECK_THROWS_AS(make_params(3, 1.0), Error);
    CHECK_THROWS_AS(make_params(0, 3.0), Error);
    CHECK_THROWS_AS(make_params(3, NAN), Error);
    CHECK(sobolev_exponent(3) == doctest::Approx(5.0));
    CHECK(std::isinf(sobolev_exponent(2)));
}

TEST_CASE("kappa values") {
    CHECK(kappa(make_params(3, 2.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(kappa(make_params(3, 3.0)) - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(kappa(make_params(3, 3.0)) - 0.707107) < 1e-6);
    // (1/6)^{1/6} = 0.7418364, so the rounded value is 0.741836
    CHECK(std::abs(kappa(make_params(3, 7.0)) - 0.741836) < 1e-6);
    CHECK(std::abs(kappa(make_params(3, 7.0)) - std::pow(1.0 / 6.0, 1.0 / 6.0)) < 1e-14);
}

TEST_CASE("kappa^{p-1} (p-1) = 1 over p in (1, 50]") {
    for (double p = 1.05; p <= 50.0; p += 0.35) {
        double k = kappa(make_params(3, p));
        CHECK(std::abs(std::pow(k, p - 1) * (p - 1) - 1.0) < 1e-12);
    }
}

TEST_CASE("constant profiles") {
    auto p3 = make_params(3, 3.0);
    auto plus = constant_profile(p3, 1);
    for (std::size_t i = 0; i < plus.r.size(); i += 97) CHECK(std::abs(plus.w[i] - 0.707107) < 1e-6);
    CHECK(plus.value(3.7) == doctest::Approx(p3.kappa));
    CHECK(plus.deriv(3.7) == 0.0);

    auto zero = constant_profile(make_params(4, 11.0), 0);
    for (double w : zero.w) CHECK(w == 0.0);

    auto minus = constant_profile(make_params(3, 7.0), -1);
    CHECK(std::abs(minus.value(1.0) + 0.741836) < 1e-6);
    CHECK(minus.is_constant());
    CHECK(minus.bounded());
}

TEST_CASE("singular profile") {
    auto par = make_params(7, 3.0);
    CHECK(par.beta == doctest::Approx(4.0));
    auto s = singular_profile(par);
    CHECK(s.value(1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_FALSE(s.bounded());
    CHECK(s.r.front() > 0.0);

    auto par65 = make_params(6, 5.0);
    CHECK(par65.beta == doctest::Approx(1.75));
    // 1.75^{1/4} = 1.1501633
    CHECK(std::abs(singular_profile(par65).value(1.0) - 1.150163) < 1e-6);

    CHECK_THROWS_AS(singular_profile(make_params(3, 2.0)), Error);
}

TEST_CASE("singular profile solves the radial Laplace equation and the profile equation") {
    for (auto [n, p] : {std::pair{7, 3.0}, {6, 5.0}, {10, 2.0}}) {
        auto par = make_params(n, p);
        auto s = singular_profile(par);
        double worst_lap = 0.0, worst_full = 0.0;
        for (std::size_t i = 0; i < s.r.size(); i += 13) {
            double r = s.r[i], w = s.w[i], d = s.dw[i], dd = s.d2w[i];
            double lap = dd + (n - 1) / r * d;
            double scale = std::abs(lap) + std::pow(w, p);
            worst_lap = std::max(worst_lap, std::abs(lap + std::pow(w, p)) / scale);
            double full = lap - r / 2 * d - w / (p - 1) + std::pow(w, p);
            double fscale = scale + std::abs(r / 2 * d) + w / (p - 1);
            worst_full = std::max(worst_full, std::abs(full) / fscale);
        }
        CHECK(worst_lap <= 1e-10);
        CHECK(worst_full <= 1e-10);
    }
}

TEST_CASE("tabulated profile interpolates its data") {
    auto par = make_params(3, 3.0);
    std::vector<double> r, w, dw;
    for (int i = 0; i <= 200; ++i) {
        double x = 0.05 * i;
        r.push_back(x);
        w.push_back(std::exp(-x * x));
        dw.push_back(-2 * x * std::exp(-x * x));
    }
    auto t = tabulated_profile(par, r, w, dw);
    CHECK(t.value(1.2345) == doctest::Approx(std::exp(-1.2345 * 1.2345)).epsilon(1e-6));
    CHECK(t.deriv(1.2345) == doctest::Approx(-2 * 1.2345 * std::exp(-1.2345 * 1.2345)).epsilon(1e-4));
    CHECK_THROWS(tabulated_profile(par, {0.0, 1.0}, {1.0}, {0.0, 0.0}));
}

TEST_CASE("default grid is increasing and spans the range") {
    auto g = default_grid();
    CHECK(g.front() == doctest::Approx(1e-6));
    CHECK(g.back() == doctest::Approx(20.0));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}
