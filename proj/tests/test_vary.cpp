#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "selfsim/func.hpp"
#include "selfsim/quad.hpp"
#include "selfsim/spectrum.hpp"
#include "selfsim/vary.hpp"

using namespace selfsim;

namespace {

Variation random_variation(std::mt19937& gen) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Variation v;
    v.phi = gaussian_bump(U(gen), 1.5 + U(gen), 0.8 + 0.4 * U(gen));
    v.h = U(gen);
    v.y0_norm = U(gen);
    v.h_prime = U(gen);
    v.y0_prime = U(gen);
    return v;
}

}  // namespace

TEST_CASE("first variation vanishes at solutions") {
    std::mt19937 gen(0);
    auto rules = default_rules(3);
    for (int which : {0, 1}) {
        const auto& pr = fixture::profile37(which);
        for (int k = 0; k < 25; ++k) {
            auto v = random_variation(gen);
            double fv = first_variation(pr, v, rules);
            CHECK(std::abs(fv) <= 1e-6 * first_variation_scale(pr, v));
        }
    }
    auto k = constant_profile(fixture::par37(), 1);
    for (int i = 0; i < 5; ++i) {
        auto v = random_variation(gen);
        CHECK(std::abs(first_variation(k, v, rules)) <= 1e-6 * first_variation_scale(k, v));
    }
}

TEST_CASE("first variation off solutions matches finite differences") {
    auto par = fixture::par37();
    auto rules = default_rules(3);
    std::vector<double> r = default_grid(1e-4, 20.0, 0.01);
    std::vector<double> w(r.size(), 1.1 * par.kappa), dw(r.size(), 0.0);
    auto pr = tabulated_profile(par, r, w, dw);
    Variation v;
    v.phi = gaussian_bump(1.0, 0.0, 1.0);
    double a = first_variation(pr, v, rules);
    double b = first_variation_fd(pr, v, 1e-4, rules);
    CHECK(std::abs(a) > 1e-3);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));

    Variation zero;
    zero.phi = zero_field();
    CHECK(first_variation(constant_profile(par, 0), zero, rules) == 0.0);
}

TEST_CASE("second variation of constants") {
    auto p3 = make_params(3, 3.0);
    auto k3 = constant_profile(p3, 1);
    Variation vh;
    vh.phi = zero_field();
    vh.h = 1.0;
    CHECK(second_variation(k3, vh) == doctest::Approx(-0.125).epsilon(1e-10));
    CHECK(std::abs(general_second_variation_fd(k3, vh, 1e-3) + 0.125) < 1e-5);

    for (double p : {2.0, 3.0, 7.0}) {
        auto k = constant_profile(make_params(3, p), 1);
        Variation v1;
        v1.phi = constant_field(1.0);
        CHECK(second_variation(k, v1) == doctest::Approx(-1.0).epsilon(1e-10));
    }
}

TEST_CASE("translation-only second variation is minus a square") {
    const auto& pr = fixture::profile37(0);
    Variation v;
    v.phi = zero_field();
    v.y0_norm = 1.0;
    double sv = second_variation(pr, v);
    CHECK(sv < 0);
    // -1/2 int (d_e w)^2 rho = -1/2 int (w')^2 (y.e/|y|)^2 rho = -1/(2n) int (w')^2 rho
    auto f = pr.field();
    double oracle = -0.5 / 3.0 * weighted_integral(composite_rule(3), [&](double r) {
        double d = f.dw(r);
        return d * d;
    });
    CHECK(sv == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("second variation against the finite-difference oracle") {
    std::mt19937 gen(0);
    auto rules = default_rules(3);
    for (int which : {0, 1}) {
        const auto& pr = fixture::profile37(which);
        for (int k = 0; k < 10; ++k) {
            auto v = random_variation(gen);
            double a = second_variation(pr, v, rules);
            double b = general_second_variation_fd(pr, v, 1e-3, rules);
            CHECK(std::abs(a - b) <= 1e-4 * std::max(std::abs(a), 1e-3));
        }
    }
}

TEST_CASE("finite-difference step halving") {
    const auto& pr = fixture::profile37(0);
    auto rules = default_rules(3);
    Variation v;
    v.phi = gaussian_bump(0.5, 0.0, 1.0);
    v.h = 0.7;
    v.y0_norm = 0.3;
    double exact = second_variation(pr, v, rules);
    double e1 = std::abs(general_second_variation_fd(pr, v, 4e-3, rules) - exact);
    double e2 = std::abs(general_second_variation_fd(pr, v, 2e-3, rules) - exact);
    // O(delta^2): halving gains about 4x, allowing for the round-off floor
    CHECK(e2 <= e1 / 4 * 4 + 1e-9);
    CHECK(e2 <= 1e-4 * std::abs(exact));
}

TEST_CASE("second variation rejects non-solutions") {
    auto par = fixture::par37();
    std::vector<double> r = default_grid(1e-4, 20.0, 0.01);
    std::vector<double> w(r.size(), 1.1 * par.kappa), dw(r.size(), 0.0);
    Variation v;
    v.phi = zero_field();
    v.h = 1.0;
    CHECK_THROWS_AS(second_variation(tabulated_profile(par, r, w, dw), v), Error);
}

TEST_CASE("lambda field") {
    auto par = fixture::par37();
    auto L = lambda_field(constant_profile(par, 1));
    CHECK_FALSE(L.sign_change);
    for (double v : L.value) CHECK(v == doctest::Approx(2 * par.kappa / (par.p - 1)));

    auto S = lambda_field(singular_profile(make_params(7, 3.0)));
    double worst = 0;
    for (double v : S.value) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-12);

    for (int which : {0, 1}) CHECK(lambda_field(fixture::profile37(which)).sign_change);
}

TEST_CASE("stability reports") {
    auto par = fixture::par37();
    auto k = constant_profile(par, 1);
    auto rk = stability_report(k, sector_spectrum(k, 0, 2, 400));
    CHECK(rk.verdict == "stable modulo translations");
    CHECK(rk.lambda1 == doctest::Approx(-1.0).epsilon(1e-6));

    auto z = constant_profile(par, 0);
    CHECK(stability_report(z, sector_spectrum(z, 0, 2, 400)).verdict == "stable");

    for (int which : {0, 1}) {
        const auto& pr = fixture::profile37(which);
        auto R = stability_report(pr, sector_spectrum(pr, 0, 2, 1000));
        CHECK(R.verdict == "unstable");
        CHECK(R.lambda1 < -1.0);
        CHECK(std::abs(R.inner_lambda) < 1e-6);
        CHECK(std::abs(R.inner_translation) < 1e-6);
        CHECK(R.second_variation_value <= R.bound + 1e-8);
        CHECK(R.bound < 0);
    }
}
