#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "selfsim/closed.hpp"
#include "selfsim/flow.hpp"
#include "selfsim/vary.hpp"

using namespace selfsim;

namespace {

double sup_diff(const std::vector<double>& a, double c) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v - c));
    return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// closed-form blow-up time of the spatially constant flow
double tau_star(double p, double w0) { return std::log((p - 1) / ((p - 1) - std::pow(w0, 1 - p))); }

}  // namespace

TEST_CASE("initial states") {
    auto par = fixture::par37();
    auto k = init_flow(constant_profile(par, 1));
    CHECK(sup_diff(k.w, par.kappa) == 0.0);
    CHECK(blowup_criterion(k) == doctest::Approx(0.0).epsilon(1e-12));
    auto z = init_flow(constant_profile(par, 0));
    CHECK(blowup_criterion(z) == doctest::Approx(-par.kappa));

    auto kp = init_flow(constant_profile(par, 1), constant_field(1.0), 0.05);
    CHECK(sup_diff(kp.w, par.kappa + 0.05) < 1e-14);
    CHECK(blowup_criterion(kp) > 0);

    const auto& pr = fixture::profile37(0);
    auto st = init_flow(pr);
    double lam = 0;
    auto f = discrete_ground_state(st, lam);
    CHECK(lam < -1.0);
    auto sp = st;
    perturb_along_ground_state(sp, 0.01);
    for (std::size_t i = 0; i < st.w.size(); ++i) CHECK(sp.w[i] >= st.w[i]);
    CHECK(blowup_criterion(sp) > blowup_criterion(st));
    auto s0 = st;
    perturb_along_ground_state(s0, 0.0);
    CHECK(s0.w == st.w);
    CHECK(to_string(DirectionScale::L2) == "l2");
    CHECK(to_string(DirectionScale::ProfileSup) == "profile-sup");
}

TEST_CASE("equilibria are preserved") {
    auto par = fixture::par37();
    for (int sign : {1, 0}) {
        auto st = init_flow(constant_profile(par, sign));
        auto rep = run(st, 10.0);
        CHECK(sup_diff(st.w, sign * par.kappa) <= 1e-9);
        CHECK(rep.outcome != FlowOutcome::BlewUp);
    }
    for (int which : {0, 1}) {
        auto st = init_flow(fixture::profile37(which));
        auto w0 = st.w;
        auto rep = run(st, 5.0);
        CHECK(sup_diff(st.w, w0) <= 1e-6);
        CHECK(rep.outcome != FlowOutcome::BlewUp);
    }
}

TEST_CASE("constant data follow the scalar ODE") {
    // for p = 7 the closed form is ill-conditioned in tau near blow-up: at w = 100, tau1 - tau ~ 2e-13
    // and one ulp of tau already moves w by ~3e-5, so the comparison stops at w = 10 there
    for (auto [p, w_stop] : {std::pair{3.0, 100.0}, {7.0, 10.0}}) {
        auto par = make_params(3, p);
        auto st = init_constant(par, 1.0);
        double v0 = 1.0;
        StepConfig sc;
        double worst = 0;
        while (true) {
            double s = *std::max_element(st.w.begin(), st.w.end());
            if (s > w_stop) break;
            step(st, choose_dt(st, sc));
            double v = (p - 1) + (v0 - (p - 1)) * std::exp(st.tau);
            double exact = std::pow(v, -1 / (p - 1));
            worst = std::max(worst, sup_diff(st.w, exact) / exact);
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("constant-data blow-up times") {
    auto p3 = make_params(3, 3.0);
    auto st = init_constant(p3, 1.0);
    auto rep = run(st, 5.0);
    CHECK(rep.outcome == FlowOutcome::BlewUp);
    CHECK(std::abs(rep.tau1 - std::log(2.0)) <= 0.01 * std::log(2.0));
    CHECK(tau_star(3.0, 1.0) == doctest::Approx(std::log(2.0)));

    auto p7 = make_params(3, 7.0);
    auto s7 = init_constant(p7, 1.0);
    auto r7 = run(s7, 5.0);
    CHECK(r7.outcome == FlowOutcome::BlewUp);
    CHECK(std::abs(r7.tau1 - std::log(1.2)) <= 0.01 * std::log(1.2));

    // type-I indicator: sup (tau1 - tau)^{1/(p-1)} w from the closed form
    auto sum = flow_diagnostics(rep, p3);
    double oracle = 0;
    for (double tau = 0; tau < std::log(2.0); tau += 1e-4) {
        double v = 2.0 - std::exp(tau);
        oracle = std::max(oracle, std::sqrt((std::log(2.0) - tau) / v));
    }
    CHECK(sum.type1_indicator == doctest::Approx(oracle).epsilon(0.02));
    CHECK(sum.type1_indicator < 1e3);
}

TEST_CASE("data below kappa decay to zero") {
    // w ~ e^{-tau/(p-1)}, so the time to reach the convergence tolerance grows with p
    for (auto [p, tau_max] : {std::pair{3.0, 60.0}, {7.0, 200.0}}) {
        auto par = make_params(3, p);
        auto st = init_constant(par, 0.9 * par.kappa);
        auto rep = run(st, tau_max);
        CHECK(rep.outcome == FlowOutcome::ConvergedToProfile);
        CHECK(rep.limit == "zero");
        CHECK(rep.max_avg_minus_kappa <= 0);
    }
}

TEST_CASE("energy decreases") {
    auto par = make_params(3, 3.0);
    auto st = init_flow(constant_profile(par, 0), gaussian_bump(1.0, 0.0, 1.0), 0.6);
    double e0 = flow_energy(st);
    step(st, 0.01);
    CHECK(flow_energy(st) < e0);
    auto rep = run(st, 5.0);
    CHECK(rep.max_energy_increase <= 1e-7);
}

TEST_CASE("blow-up criterion soundness on sample runs") {
    auto par = make_params(3, 3.0);
    for (double c : {0.5, 1.0, 2.0, 4.0}) {
        auto st = init_flow(constant_profile(par, 0), gaussian_bump(1.0, 0.0, 1.5), c);
        auto rep = run(st, 8.0);
        CHECK(rep.max_energy_increase <= 1e-7);
        if (rep.max_avg_minus_kappa > 0) CHECK(rep.outcome == FlowOutcome::BlewUp);
    }
}

TEST_CASE("perturbed shooting profile") {
    const auto& pr = fixture::profile37(0);
    auto st = init_flow(pr);
    perturb_along_ground_state(st, 0.01);
    CHECK(blowup_criterion(st) > -fixture::par37().kappa);
    auto rep = run(st, 5.0);
    CHECK(rep.outcome == FlowOutcome::BlewUp);
    CHECK(rep.max_energy_increase <= 1e-7);
    auto sum = flow_diagnostics(rep, fixture::par37());
    CHECK(sum.min_dtau_w >= -1e-6);
    CHECK(sum.compact_blowup_set);
    CHECK(sum.blowup_r < 0.5 * st.r.back());

    auto sm = init_flow(pr);
    perturb_along_ground_state(sm, -0.01);
    auto rm = run(sm, 10.0);
    CHECK(rm.outcome != FlowOutcome::BlewUp);
    CHECK(rm.max_energy_increase <= 1e-7);
}

TEST_CASE("entropy perturbation experiment") {
    const auto& pr = fixture::profile37(0);
    PerturbationConfig cfg;
    cfg.run_flow = false;
    auto r0 = entropy_perturbation_experiment(pr, 0.0, cfg);
    CHECK(r0.margin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(r0.lambda_w - energy(pr).energy) <= 1e-8);

    cfg.run_flow = true;
    cfg.tau_max = 10.0;
    auto rp = entropy_perturbation_experiment(pr, 0.01, cfg);
    CHECK(rp.margin > 0);
    CHECK_FALSE(rp.entropy_unconverged);
    CHECK(rp.outcome == FlowOutcome::BlewUp);
    CHECK(rp.E_kappa == doctest::Approx(kappa_energy(fixture::par37())));
    CHECK(std::isfinite(rp.plateau_energy));
}

TEST_CASE("csv output uses CRLF") {
    auto st = init_constant(make_params(3, 3.0), 1.0);
    auto csv = flow_csv(run(st, 2.0));
    CHECK(csv.rfind("tau,", 0) == 0);
    CHECK(csv.find("\r\n") != std::string::npos);
}
