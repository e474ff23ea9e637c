#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "selfsim/closed.hpp"
#include "selfsim/func.hpp"
#include "selfsim/vary.hpp"

using namespace selfsim;

namespace {

// F of the constant kappa at t0 = -a: kappa^2 a^{2/(p-1)}/(2(p-1)) - kappa^{p+1} a^{(p+1)/(p-1)}/(p+1).
// For p = 3 this is a/8 - a^2/16.
double g_const(const Parameters& par, double a) {
    double k = par.kappa, p = par.p;
    return k * k * std::pow(a, 2 / (p - 1)) / (2 * (p - 1)) - std::pow(k, p + 1) * std::pow(a, (p + 1) / (p - 1)) / (p + 1);
}

}  // namespace

TEST_CASE("energy of constants") {
    CHECK(energy(constant_profile(make_params(3, 3.0), 1)).energy == doctest::Approx(0.0625).epsilon(1e-13));
    double e7 = energy(constant_profile(fixture::par37(), 1)).energy;
    CHECK(std::abs(e7 - 0.034395) < 1e-5);
    CHECK(e7 == doctest::Approx(0.375 * std::pow(1.0 / 6.0, 4.0 / 3.0)).epsilon(1e-13));
    CHECK(energy(constant_profile(make_params(5, 2.0), 0)).energy == 0.0);
}

TEST_CASE("energy forms agree on solutions") {
    for (int which : {0, 1}) {
        auto R = energy(fixture::profile37(which));
        CHECK_FALSE(R.forms_disagree);
        CHECK(R.energy == doctest::Approx(R.energy_shortcut).epsilon(1e-6));
    }
}

TEST_CASE("F at the canonical point is the energy") {
    const auto& pr = fixture::profile37(0);
    double F = f_functional(pr, 0.0, -1.0);
    double E = energy(pr).energy;
    CHECK(std::abs(F - E) <= 1e-10 * std::abs(E));
    auto k = constant_profile(fixture::par37(), 1);
    CHECK(std::abs(f_functional(k, 0.0, -1.0) - energy(k).energy) <= 1e-10 * energy(k).energy);
}

TEST_CASE("F of constants") {
    auto par = make_params(3, 3.0);
    auto k = constant_profile(par, 1);
    for (double x0 : {0.0, 0.5, 3.0, 8.0}) CHECK(f_functional(k, x0, -1.0) == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(std::abs(f_functional(k, 0.0, -2.0)) < 1e-12);
    CHECK(std::abs(f_functional(k, 4.0, -2.0)) < 1e-12);
    for (double a : {0.1, 0.5, 1.7, 3.0}) {
        CHECK(g_const(par, a) == doctest::Approx(a / 8 - a * a / 16));
        CHECK(f_functional(k, 1.0, -a) == doctest::Approx(g_const(par, a)).epsilon(1e-11));
        auto k7 = constant_profile(fixture::par37(), 1);
        CHECK(f_functional(k7, 2.0, -a) == doctest::Approx(g_const(fixture::par37(), a)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(f_functional(k, 0.0, 0.0), Error);
    CHECK_THROWS_AS(f_functional(k, 0.0, 1.0), Error);
}

TEST_CASE("F off center: closed-angle rule against the tensor rule") {
    // a smooth, broad field where the (r, theta) tensor rule is accurate
    auto par = make_params(3, 3.0);
    auto f = gaussian_bump(0.8, 0.0, 2.0);
    auto rules = default_rules(3);
    for (double x0 : {0.5, 2.0}) {
        for (double t0 : {-0.5, -1.0, -2.0}) {
            double a = f_functional(f, par, x0, t0, rules);
            auto pts = offset_points(rules.radial, rules.angular, x0, t0);
            double grad = 0, pot = 0, mass = 0;
            for (auto [r, wt] : pts) {
                double v, d;
                f.eval(r, v, d);
                grad += wt * d * d;
                pot += wt * std::pow(std::abs(v), par.p + 1);
                mass += wt * v * v;
            }
            double b = f_combine({grad, pot, mass}, par.p, t0);
            CHECK(a == doctest::Approx(b).epsilon(1e-8));
        }
    }
}

TEST_CASE("entropy of constants") {
    auto par = make_params(3, 3.0);
    auto E = entropy(constant_profile(par, 1));
    CHECK(E.lambda == doctest::Approx(0.0625).epsilon(1e-9));
    CHECK(std::abs(E.t0 + 1.0) < 1e-4);
    CHECK(E.delta_t > 0);
    CHECK(std::abs(E.delta_x) < 1e-12);
    CHECK_FALSE(E.unconverged_sup);

    auto Z = entropy(constant_profile(par, 0));
    CHECK(Z.lambda == 0.0);

    CHECK_THROWS_AS(entropy(singular_profile(make_params(7, 3.0))), Error);
    EntropyConfig bad;
    bad.nx = 1;
    CHECK_THROWS_AS(entropy(constant_profile(par, 1), bad), Error);
}

TEST_CASE("entropy of a shooting profile sits at the canonical point") {
    const auto& pr = fixture::profile37(0);
    auto E = entropy(pr);
    double e = energy(pr).energy;
    CHECK(std::abs(E.x0) < 1e-4);
    CHECK(std::abs(E.t0 + 1.0) < 1e-4);
    CHECK(E.lambda == doctest::Approx(e).epsilon(1e-9));
    CHECK_FALSE(E.unconverged_sup);
    CHECK(E.delta_ring > 0);
    double grid_max = *std::max_element(E.grid_F.begin(), E.grid_F.end());
    CHECK(grid_max <= f_functional(pr, 0.0, -1.0) + 1e-8);
}

TEST_CASE("identities") {
    auto k = identities(constant_profile(fixture::par37(), 1));
    CHECK(k.pohozaev_abs < 1e-12);
    CHECK(k.inte1_abs < 1e-12);
    CHECK(k.eq10_abs < 1e-12);
    CHECK(k.testfunction_abs < 1e-12);

    auto s = identities(singular_profile(make_params(7, 3.0)));
    CHECK(s.inte1 <= 1e-6);

    for (int which : {0, 1}) {
        auto R = identities(fixture::profile37(which));
        CHECK(R.pohozaev <= 1e-5);
        CHECK(R.inte1 <= 1e-5);
        CHECK(R.eq10 <= 1e-5);
        CHECK(R.testfunction <= 1e-5);
    }
}

TEST_CASE("density") {
    const auto& pr = fixture::profile37(0);
    double e = energy(pr).energy;
    CHECK(density(pr, 0.0).theta == doctest::Approx(e).epsilon(1e-9));

    auto k = constant_profile(fixture::par37(), 1);
    for (double x0 : {0.0, 1.0, 4.0}) CHECK(density(k, x0).theta == doctest::Approx(energy(k).energy).epsilon(1e-9));

    auto d1 = density(pr, 1.0);
    CHECK(d1.monotone);
    CHECK(d1.theta <= e + 1e-8);
    auto d3 = density(pr, 3.0);
    // Theta vanishes at regular points x0 != 0; the extrapolation error shrinks with the offset
    CHECK(std::abs(d1.theta) < 1e-4);
    CHECK(std::abs(d3.theta) <= std::abs(d1.theta));
    CHECK(std::abs(density(pr, 8.0).theta) < 1e-6);

    CHECK_THROWS_AS(density(pr, 1.0, {-1.0, -0.5, -0.25}), Error);
    CHECK_THROWS_AS(density(pr, 1.0, {-0.1, -0.5, -0.25, -0.01}), Error);
}

TEST_CASE("monotonicity along mapped paths") {
    for (int which : {0, 1}) {
        const auto& pr = fixture::profile37(which);
        for (double x0 : {0.5, 1.5}) {
            for (double t0 : {-0.5, -2.0}) CHECK(mapped_path(pr, x0, t0).worst_violation <= 1e-8);
        }
        for (double x0 : {0.5, 1.0, 2.0}) CHECK(density(pr, x0).worst_increase <= 1e-8);
    }
}
