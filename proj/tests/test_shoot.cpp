#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "selfsim/closed.hpp"
#include "selfsim/func.hpp"
#include "selfsim/shoot.hpp"

using namespace selfsim;

TEST_CASE("integrate_radial from the constants") {
    auto p3 = make_params(3, 3.0);
    auto k = integrate_radial(p3, p3.kappa);
    CHECK(k.cls == Classification::InconclusiveConstant);
    CHECK(classify(k) == Classification::InconclusiveConstant);
    for (double w : k.w) CHECK(w == p3.kappa);

    auto z = integrate_radial(p3, 0.0);
    CHECK(z.cls == Classification::InconclusiveConstant);
    for (double w : z.w) CHECK(w == 0.0);

    auto p7 = fixture::par37();
    CHECK(integrate_radial(p7, p7.kappa).cls == Classification::InconclusiveConstant);
    CHECK(integrate_radial(p7, -p7.kappa).cls == Classification::InconclusiveConstant);
}

TEST_CASE("regression fixture: a = 1.5 kappa for (3, 7)") {
    auto par = fixture::par37();
    auto t = integrate_radial(par, 1.5 * par.kappa);
    CHECK(t.cls == Classification::SignChanging);
    // the fine-tolerance run agrees
    CHECK(integrate_radial(par, 1.5 * par.kappa, 16.0, 1e-13).cls == Classification::SignChanging);
}

TEST_CASE("classify") {
    auto par = make_params(7, 3.0);
    auto s = singular_profile(par);
    CHECK(classify(trajectory_from_profile(s)) == Classification::Decaying);
    REQUIRE(s.decay_coeff.has_value());
    CHECK(*s.decay_coeff == doctest::Approx(std::pow(par.beta, 1 / (par.p - 1))));

    OdeTrajectory line;
    line.params = par;
    for (int i = 0; i <= 240; ++i) {
        double r = 0.05 * i;
        line.r.push_back(r);
        line.w.push_back(1.0 - r / 5.0);
        line.dw.push_back(-0.2);
    }
    CHECK(classify(line) == Classification::SignChanging);

    OdeTrajectory k;
    k.params = par;
    k.r = {0.0, 5.0, 12.0};
    k.w = {par.kappa, par.kappa, par.kappa};
    k.dw = {0.0, 0.0, 0.0};
    CHECK(classify(k) == Classification::InconclusiveConstant);

    OdeTrajectory grow = line;
    for (std::size_t i = 0; i < grow.r.size(); ++i) {
        grow.w[i] = 1.0 + grow.r[i] * grow.r[i];
        grow.dw[i] = 2 * grow.r[i];
    }
    CHECK(classify(grow) == Classification::Growing);
}

TEST_CASE("shoot needs a bracket") {
    auto par = fixture::par37();
    // both ends sign-changing
    CHECK_THROWS_AS(shoot(par, 1.0, 1.1), Error);
    CHECK_THROWS_AS(shoot(par, 0.99 * par.kappa, 1.01 * par.kappa), Error);
}

TEST_CASE("shooting profiles of (3, 7)") {
    auto par = fixture::par37();
    const double Ek = kappa_energy(par);
    for (int which : {0, 1}) {
        const auto& pr = fixture::profile37(which);
        CHECK(pr.kind == ProfileKind::Shooting);
        CHECK(ode_residual(pr) <= 1e-7);
        double wmin = INFINITY;
        for (double w : pr.w) wmin = std::min(wmin, w);
        CHECK(wmin > 0);
        CHECK(energy(pr).energy > Ek);
        REQUIRE(pr.decay_coeff.has_value());
        CHECK(*pr.decay_coeff > 0);
        CHECK(classify(trajectory_from_profile(pr)) == Classification::Decaying);
    }
    CHECK(*fixture::profile37(0).shoot_a == doctest::Approx(2.30252141173928).epsilon(1e-9));
    CHECK(*fixture::profile37(1).shoot_a == doctest::Approx(5.71096038111481).epsilon(1e-9));
}

TEST_CASE("scan over (kappa, 3] returns certified profiles") {
    auto par = fixture::par37();
    auto S = scan_profiles(par, par.kappa * 1.001, 3.0, 60);
    REQUIRE(!S.profiles.empty());
    for (const auto& pr : S.profiles) {
        CHECK(ode_residual(pr) <= 1e-7);
        for (double w : pr.w) CHECK(w > 0);
    }
}

TEST_CASE("shooting is deterministic") {
    auto par = fixture::par37();
    auto a = shoot(par, 2.25, 2.35), b = shoot(par, 2.25, 2.35);
    CHECK(*a.shoot_a == *b.shoot_a);
    CHECK(a.w == b.w);
}

TEST_CASE("Taylor start is consistent with the ODE") {
    auto par = fixture::par37();
    ShootConfig c1, c2;
    c2.eps = c1.eps / 2;
    auto at1 = [](const OdeTrajectory& T) {
        HermiteTable h{&T.r, &T.w, &T.dw};
        double v, d;
        h.eval(1.0, v, d);
        return v;
    };
    for (double a : {1.0, 2.3, 5.7}) {
        auto A = integrate_radial(par, a, c1), B = integrate_radial(par, a, c2);
        CHECK(std::abs(at1(A) - at1(B)) <= 1e-9);
    }
}

TEST_CASE("ode_residual") {
    auto p3 = make_params(3, 3.0);
    CHECK(ode_residual(constant_profile(p3, 1)) <= 1e-12);
    CHECK(ode_residual(constant_profile(fixture::par37(), 1)) <= 1e-12);
    CHECK(ode_residual(constant_profile(fixture::par37(), -1)) <= 1e-12);

    auto p73 = make_params(7, 3.0);
    std::vector<double> g;
    for (double r = 0.1; r <= 20.0; r *= 1.01) g.push_back(r);
    CHECK(ode_residual(singular_profile(p73, g)) <= 1e-9);

    // w = kappa + 0.01: residual 0.01 (p kappa^{p-1} - 1/(p-1)) to first order
    for (double p : {3.0, 7.0}) {
        auto par = make_params(3, p);
        std::vector<double> r = default_grid(1e-3, 10.0, 0.01);
        std::vector<double> w(r.size(), par.kappa + 0.01), dw(r.size(), 0.0);
        double res = ode_residual(tabulated_profile(par, r, w, dw));
        CHECK(res == doctest::Approx(0.01).epsilon(0.1));
        double exact = std::abs((par.kappa + 0.01) / (p - 1) - std::pow(par.kappa + 0.01, p));
        CHECK(res == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("finite-difference weights") {
    std::vector<double> x{0.0, 0.3, 0.7, 1.2, 1.6, 2.1, 2.5};
    auto w1 = fd_weights(1.0, x, 1);
    auto w2 = fd_weights(1.0, x, 2);
    double d1 = 0, d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = std::pow(x[i], 5) - 2 * x[i] * x[i];
        d1 += w1[i] * f;
        d2 += w2[i] * f;
    }
    CHECK(d1 == doctest::Approx(5.0 - 4.0).epsilon(1e-10));
    CHECK(d2 == doctest::Approx(20.0 - 4.0).epsilon(1e-10));

    std::vector<double> r, f;
    for (double t = 0.0; t <= 3.0; t += 0.01 + 0.01 * t) {
        r.push_back(t);
        f.push_back(std::sin(t));
    }
    auto d = differentiate(r, f);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(d[i] == doctest::Approx(std::cos(r[i])).epsilon(1e-8));
}
