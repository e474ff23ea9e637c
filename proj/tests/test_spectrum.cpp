#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "selfsim/spectrum.hpp"
#include "selfsim/vary.hpp"

using namespace selfsim;

TEST_CASE("sector operators of the constants") {
    auto p3 = make_params(3, 3.0);
    auto op0 = build_sector(constant_profile(p3, 0), 0, 400);
    for (double v : op0.potential) CHECK(v == 0.0);
    auto opk = build_sector(constant_profile(p3, 1), 0, 400);
    // p kappa^{p-1} = p/(p-1): L = L_0 + 1 once the mass term is included
    for (double v : opk.potential) CHECK(v == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(symmetry_defect(opk) < 1e-12);
    for (std::size_t i = 0; i < opk.diag.size(); ++i) CHECK(opk.diag[i] == doctest::Approx(op0.diag[i] - 1.5).epsilon(1e-12));
}

TEST_CASE("Hermite spectra") {
    auto p3 = make_params(3, 3.0);
    auto z = sector_spectrum(constant_profile(p3, 0), 0, 3, 1000);
    REQUIRE(z.eigenvalues.size() == 3);
    CHECK(std::abs(z.eigenvalues[0] - 0.5) < 1e-6);
    CHECK(std::abs(z.eigenvalues[1] - 1.5) < 1e-6);
    CHECK(std::abs(z.eigenvalues[2] - 2.5) < 1e-6);

    for (double p : {3.0, 7.0}) {
        auto k = constant_profile(make_params(3, p), 1);
        auto s0 = sector_spectrum(k, 0, 3, 1000);
        CHECK(std::abs(s0.eigenvalues[0] + 1.0) < 1e-6);
        CHECK(std::abs(s0.eigenvalues[1] - 0.0) < 1e-6);
        CHECK(std::abs(s0.eigenvalues[2] - 1.0) < 1e-6);
        CHECK(s0.below_minus_one == 0);
        auto s1 = sector_spectrum(k, 1, 2, 1000);
        CHECK(std::abs(s1.eigenvalues[0] + 0.5) < 1e-6);
        CHECK(std::abs(s1.eigenvalues[1] - 0.5) < 1e-6);
        for (double c : s0.certificates) CHECK(c <= 1e-6);
    }
}

TEST_CASE("spectrum of a shooting profile") {
    const auto& pr = fixture::profile37(0);
    auto s0 = sector_spectrum(pr, 0, 3, 1000);
    CHECK(s0.eigenvalues[0] < -1.0);
    // Lambda(w) is an eigenfunction with eigenvalue -1 and changes sign, so it is not the ground state
    bool has_minus_one = false;
    for (double v : s0.eigenvalues) has_minus_one = has_minus_one || std::abs(v + 1.0) < 1e-5;
    CHECK(has_minus_one);
    CHECK(s0.certificates[0] <= 1e-6);
    auto s1 = sector_spectrum(pr, 1, 1, 1000);
    CHECK(std::abs(s1.eigenvalues[0] + 0.5) < 1e-5);
    auto s2 = sector_spectrum(pr, 2, 1, 1000);
    CHECK(s0.eigenvalues[0] < s1.eigenvalues[0]);
    CHECK(s1.eigenvalues[0] < s2.eigenvalues[0]);
}

TEST_CASE("discrete eigenpairs: Rayleigh quotients and orthonormality") {
    const auto& pr = fixture::profile37(1);
    auto op = build_sector(pr, 0, 800);
    auto E = eigen_smallest(op, 4);
    for (std::size_t j = 0; j < E.functions.size(); ++j) {
        CHECK(rayleigh_quotient(op, E.functions[j]) == doctest::Approx(E.eigenvalues[j]).epsilon(1e-8));
        for (std::size_t k = 0; k <= j; ++k) {
            double ip = 0;
            for (std::size_t i = 0; i < op.mass.size(); ++i) ip += op.mass[i] * E.functions[j][i] * E.functions[k][i];
            CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) < 1e-8);
        }
    }
    // positive wherever the weighted value is above round-off (the far tail underflows to +-1e-37)
    for (std::size_t i = 0; i < op.mass.size(); ++i) {
        double u = std::sqrt(op.mass[i]) * E.functions[0][i];
        CHECK((u > 0 || std::abs(u) < 1e-14));
    }
    for (std::size_t j = 1; j < E.eigenvalues.size(); ++j) CHECK(E.eigenvalues[j] > E.eigenvalues[j - 1]);
    CHECK_THROWS_AS(eigen_smallest(op, 201), Error);
}

TEST_CASE("apply_L on the explicit eigenfunctions") {
    for (int which : {0, 1}) {
        const auto& pr = fixture::profile37(which);
        auto L = lambda_field(pr);
        std::vector<double> r, psi, dpsi;
        for (std::size_t i = 0; i < L.r.size(); ++i) {
            if (L.r[i] < 1e-3 || L.r[i] > 12.0) continue;
            r.push_back(L.r[i]);
            psi.push_back(L.value[i]);
            dpsi.push_back(L.deriv[i]);
        }
        auto LL = apply_L(pr, r, psi, dpsi, 0);
        std::vector<double> diff(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) diff[i] = LL[i] - psi[i];
        CHECK(omega_norm(3, r, diff) <= 1e-5 * omega_norm(3, r, psi));

        // translations: L_1 w' = w'/2
        std::vector<double> d1, d2;
        for (double x : r) {
            d1.push_back(pr.deriv(x));
        }
        for (std::size_t i = 0, j = 0; i < pr.r.size(); ++i) {
            if (pr.r[i] < 1e-3 || pr.r[i] > 12.0) continue;
            d2.push_back(pr.d2w[i]);
            ++j;
        }
        REQUIRE(d2.size() == r.size());
        auto Lt = apply_L(pr, r, d1, d2, 1);
        for (std::size_t i = 0; i < r.size(); ++i) diff[i] = Lt[i] - 0.5 * d1[i];
        CHECK(omega_norm(3, r, diff) <= 1e-5 * omega_norm(3, r, d1));
    }
    auto par = fixture::par37();
    auto k = constant_profile(par, 1);
    std::vector<double> r{0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, c(r.size(), 2 * par.kappa / (par.p - 1)), z(r.size(), 0.0);
    auto Lk = apply_L(k, r, c, z, 0);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(Lk[i] == doctest::Approx(c[i]).epsilon(1e-12));
}

TEST_CASE("first eigenfunction") {
    auto par = fixture::par37();
    auto k = first_eigenfunction(constant_profile(par, 1));
    CHECK(std::abs(k.lambda1 + 1.0) < 1e-6);
    for (std::size_t i = 0; i < k.f.size(); i += 50) CHECK(k.f[i] == doctest::Approx(1.0).epsilon(1e-4));

    auto z = first_eigenfunction(constant_profile(par, 0));
    CHECK(std::abs(z.lambda1 - 1.0 / (par.p - 1)) < 1e-6);
    for (std::size_t i = 0; i < z.f.size(); i += 50) CHECK(z.f[i] == doctest::Approx(1.0).epsilon(1e-4));

    // profile 1 is much sharper (lambda1 ~ -5.6e4) and needs a finer grid for the 1e-6 certificate
    const int resolution[] = {1000, 4000};
    for (int which : {0, 1}) {
        auto g = first_eigenfunction(fixture::profile37(which), resolution[which]);
        CHECK(g.lambda1 < -1.0);
        CHECK(g.certificate <= 1e-6);
        CHECK(omega_norm(3, g.r, g.f) == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(std::isfinite(g.decay_sup));
        // with lambda1 << -1 the tail decays like r^{2 lambda1} and reaches round-off (|f| ~ 1e-35)
        // inside the grid, so strict positivity is checked on the core of the first profile only
        double fmax = *std::max_element(g.f.begin(), g.f.end());
        for (std::size_t i = 0; i < g.f.size(); ++i) {
            if (which == 0 && g.r[i] <= 3.0) CHECK(g.f[i] > 0);
            CHECK(g.f[i] > -1e-10 * fmax);
        }
    }
}
