#include "selfsim/flow.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "selfsim/closed.hpp"
#include "selfsim/quad.hpp"
#include "selfsim/shoot.hpp"
#include "selfsim/spectrum.hpp"

namespace selfsim {

std::string to_string(Boundary b) {
    switch (b) {
        case Boundary::Auto: return "auto";
        case Boundary::Neumann: return "neumann";
        case Boundary::Dirichlet: return "dirichlet";
        case Boundary::Decay: return "decay";
    }
    return "?";
}

std::string to_string(FlowOutcome o) {
    switch (o) {
        case FlowOutcome::ConvergedToProfile: return "ConvergedToProfile";
        case FlowOutcome::BlewUp: return "BlewUp";
        case FlowOutcome::ReachedMaxTime: return "ReachedMaxTime";
    }
    return "?";
}

namespace {

double density(int n, double r) {
    return std::exp(std::log(2.0) * (1 - n) - log_gamma(0.5 * n) + (n - 1) * std::log(r) - 0.25 * r * r);
}

// cells of r = s sinh(xi), zero flux at the origin; the outer face follows the boundary choice
FlowState make_grid(const Parameters& par, double scale, const FlowGridConfig& g, Boundary b) {
    if (g.cells < 16 || !(g.r_max > 1)) throw Error("bad flow grid");
    FlowState st;
    st.params = par;
    st.boundary = b;
    const int N = g.cells;
    const double xi_max = std::asinh(g.r_max / scale), h = xi_max / N;
    st.r.resize(N);
    st.mass.resize(N);
    st.k_diag.assign(N, 0.0);
    st.k_off.assign(N - 1, 0.0);
    for (int i = 0; i < N; ++i) {
        double xi = (i + 0.5) * h;
        st.r[i] = scale * std::sinh(xi);
        st.mass[i] = density(par.n, st.r[i]) * scale * std::cosh(xi) * h;
    }
    for (int i = 0; i + 1 < N; ++i) {
        double xi = (i + 1) * h;
        double a = density(par.n, scale * std::sinh(xi)) / (scale * std::cosh(xi) * h);
        st.k_diag[i] += a;
        st.k_diag[i + 1] += a;
        st.k_off[i] = -a;
    }
    const double mb = density(par.n, g.r_max);
    if (b == Boundary::Dirichlet)
        st.k_bnd = mb / (scale * std::cosh(xi_max) * 0.5 * h);
    else if (b == Boundary::Decay)
        st.k_bnd = mb * par.alpha / g.r_max;
    st.k_diag[N - 1] += st.k_bnd;
    return st;
}

double core_scale(const Parameters& par, double wmax) {
    return std::min(1.0, 3.0 / std::sqrt(1.0 + par.p * std::pow(wmax, par.p - 1)));
}

// Reaction substep. Against the zero reference it is the exact flow of
// w' = -w/(p-1) + |w|^{p-1} w; against a stationary reference w_ref the source
// G'(w_ref) is kept in the reaction so w_ref is a fixed point of every substep.
void react(FlowState& st, double dt) {
    const double p = st.params.p, e = std::exp(dt);
    // |w|^{p-1} by repeated multiplication when p is an integer (the common case)
    const double k = p - 1;
    const int ik = int(std::lround(k));
    const bool integral = std::abs(k - ik) < 1e-15 && ik >= 1 && ik <= 64;
    auto powk = [&](double a) {
        if (!integral) return std::pow(a, k);
        double r = a;
        for (int j = 1; j < ik; ++j) r *= a;
        return r;
    };
    auto gp = [&](double w) { return w / (p - 1) - powk(std::abs(w)) * w; };
    for (std::size_t i = 0; i < st.w.size(); ++i) {
        double& w = st.w[i];
        double ref = st.w_ref.empty() ? 0.0 : st.w_ref[i];
        if (ref == 0.0) {
            if (w == 0.0) continue;
            double v0 = std::pow(std::abs(w), 1 - p);
            double v = (p - 1) + (v0 - (p - 1)) * e;
            if (!(v > 0)) throw Error("reaction step crossed the blow-up time; reduce dt");
            w = std::copysign(std::pow(v, -1 / (p - 1)), w);
            continue;
        }
        if (w == ref) continue;
        // classical RK4 with substeps keeping dt |d gp/dw| <= 0.02
        const double src = gp(ref);
        const double stiff = 1 / (p - 1) + p * powk(std::max(std::abs(w), std::abs(ref)) * 1.1);
        const int nsub = std::max(1, int(std::ceil(dt * stiff / 0.02)));
        const double h = dt / nsub;
        double y = w;
        for (int j = 0; j < nsub; ++j) {
            double k1 = src - gp(y), k2 = src - gp(y + 0.5 * h * k1), k3 = src - gp(y + 0.5 * h * k2),
                   k4 = src - gp(y + h * k3);
            y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        if (!std::isfinite(y)) throw Error("reaction step crossed the blow-up time; reduce dt");
        w = y;
    }
}

// (M + c K) x = M rhs, solved with rows divided by M
void solve_linear(const FlowState& st, double c, std::vector<double>& rhs) {
    const int N = int(st.w.size());
    std::vector<double> dl(N - 1), d(N), du(N - 1);
    for (int i = 0; i < N; ++i) {
        d[i] = 1.0 + c * st.k_diag[i] / st.mass[i];
    }
    for (int i = 0; i + 1 < N; ++i) {
        du[i] = c * st.k_off[i] / st.mass[i];
        dl[i] = c * st.k_off[i] / st.mass[i + 1];
    }
    lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, N, 1, dl.data(), d.data(), du.data(), rhs.data(), N);
    if (info != 0) throw Error("linear solve failed in the flow stepper (info " + std::to_string(info) + ")");
}

// y = M^{-1} K x in flux form, so constants are annihilated exactly (Neumann)
std::vector<double> apply_A(const FlowState& st, const std::vector<double>& x) {
    const std::size_t N = x.size();
    std::vector<double> y(N);
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        if (i > 0) s -= st.k_off[i - 1] * (x[i] - x[i - 1]);
        if (i + 1 < N) s -= st.k_off[i] * (x[i] - x[i + 1]);
        if (i + 1 == N) s += st.k_bnd * x[i];
        y[i] = s / st.mass[i];
    }
    return y;
}

void linear_step(FlowState& st, double dt) {
    // TR-BDF2 (L-stable, second order), written for the increments over w so that
    // states annihilated by the operator are reproduced exactly
    const double g = 2.0 - std::sqrt(2.0);
    const double c = 0.5 * g * dt, c1 = 1.0 / (g * (2 - g)), c2 = (1 - g) / (2 - g) * dt;
    const std::size_t N = st.w.size();
    // with a stationary reference the linear part carries -G'(w_ref) = A w_ref and acts on w - w_ref
    std::vector<double> u = st.w;
    if (!st.w_ref.empty())
        for (std::size_t i = 0; i < N; ++i) u[i] -= st.w_ref[i];
    auto Aw = apply_A(st, u);
    std::vector<double> d1(N), d2(N);
    for (std::size_t i = 0; i < N; ++i) d1[i] = -2 * c * Aw[i];
    solve_linear(st, c, d1);
    for (std::size_t i = 0; i < N; ++i) d2[i] = c1 * d1[i] - c2 * Aw[i];
    solve_linear(st, c2, d2);
    for (std::size_t i = 0; i < N; ++i) st.w[i] += d2[i];
}

Boundary resolve(Boundary b, bool constant) {
    if (b != Boundary::Auto) return b;
    return constant ? Boundary::Neumann : Boundary::Decay;
}

}  // namespace

FlowState init_constant(const Parameters& par, double w0, const FlowGridConfig& g) {
    if (!std::isfinite(w0)) throw Error("initial value must be finite");
    FlowState st = make_grid(par, 1.0, g, resolve(g.boundary, true));
    st.w.assign(st.r.size(), w0);
    return st;
}

FlowState init_flow(const RadialProfile& initial, const FlowGridConfig& g) {
    if (!initial.bounded()) throw Error("flow needs bounded initial data");
    if (initial.is_constant()) return init_constant(initial.params, initial.value(0.0), g);
    double wmax = 0;
    for (double w : initial.w) wmax = std::max(wmax, std::abs(w));
    FlowState st = make_grid(initial.params, core_scale(initial.params, wmax), g, resolve(g.boundary, false));
    for (double r : st.r) st.w.push_back(initial.value(r));
    if (g.equilibrate && initial.kind == ProfileKind::Shooting) {
        double res = equilibrate(st);
        if (!(res < 1e-10 * reaction_scale(st))) {
            std::ostringstream os;
            os << "no discrete equilibrium near the shooting profile (residual " << res << ")";
            throw Error(os.str());
        }
        st.w_ref = st.w;
    }
    return st;
}

FlowState init_flow(const RadialProfile& base, const RadialField& dir, double s, const FlowGridConfig& g) {
    if (!base.bounded()) throw Error("flow needs bounded initial data");
    double wmax = 0;
    for (double w : base.w) wmax = std::max(wmax, std::abs(w));
    bool constant = base.is_constant();
    FlowState st = make_grid(base.params, constant ? 1.0 : core_scale(base.params, wmax), g,
                             resolve(g.boundary, constant));
    for (double r : st.r) st.w.push_back(base.value(r) + s * dir.w(r));
    for (double w : st.w)
        if (!std::isfinite(w)) throw Error("initial data is not finite");
    return st;
}

namespace {

// d_tau w of the semi-discrete flow, -M^{-1} K w - G'(w)
std::vector<double> semi_rhs(const FlowState& st) {
    const double p = st.params.p;
    auto Aw = apply_A(st, st.w);
    std::vector<double> f(st.w.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double w = st.w[i];
        f[i] = -Aw[i] - w / (p - 1) + std::pow(std::abs(w), p - 1) * w;
    }
    return f;
}

}  // namespace

double reaction_scale(const FlowState& st) {
    double m = 0;
    for (double w : st.w) m = std::max(m, std::abs(w));
    return std::max(1.0, std::pow(m, st.params.p));
}

double equilibrate(FlowState& st, int max_iter, double tol) {
    const double p = st.params.p;
    const int N = int(st.w.size());
    double res = INFINITY;
    for (int it = 0; it < max_iter; ++it) {
        auto f = semi_rhs(st);
        res = 0;
        for (double v : f) res = std::max(res, std::abs(v));
        if (res < tol * reaction_scale(st)) break;
        // Jacobian -M^{-1} K - G''(w), tridiagonal
        std::vector<double> dl(N - 1), d(N), du(N - 1);
        for (int i = 0; i < N; ++i)
            d[i] = -st.k_diag[i] / st.mass[i] - 1 / (p - 1) + p * std::pow(std::abs(st.w[i]), p - 1);
        for (int i = 0; i + 1 < N; ++i) {
            du[i] = -st.k_off[i] / st.mass[i];
            dl[i] = -st.k_off[i] / st.mass[i + 1];
        }
        for (double& v : f) v = -v;
        lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, N, 1, dl.data(), d.data(), du.data(), f.data(), N);
        if (info != 0) throw Error("singular Jacobian while equilibrating the flow state");
        for (int i = 0; i < N; ++i) st.w[i] += f[i];
    }
    auto f = semi_rhs(st);
    res = 0;
    for (double v : f) res = std::max(res, std::abs(v));
    return res;
}

std::string to_string(DirectionScale d) { return d == DirectionScale::L2 ? "l2" : "profile-sup"; }

double perturb_along_ground_state(FlowState& st, double s, DirectionScale scale) {
    double lambda = 0;
    auto f = discrete_ground_state(st, lambda);
    double c = 1.0;
    if (scale == DirectionScale::ProfileSup) {
        double wsup = 0, fsup = 0;
        for (double w : st.w) wsup = std::max(wsup, std::abs(w));
        for (double v : f) fsup = std::max(fsup, std::abs(v));
        c = wsup / fsup;
    }
    for (std::size_t i = 0; i < st.w.size(); ++i) st.w[i] += s * c * f[i];
    return lambda;
}

std::vector<double> discrete_ground_state(const FlowState& st, double& lambda) {
    const double p = st.params.p;
    const int N = int(st.w.size());
    std::vector<double> d(N), e(N - 1), z(N);
    for (int i = 0; i < N; ++i)
        d[i] = st.k_diag[i] / st.mass[i] + 1 / (p - 1) - p * std::pow(std::abs(st.w[i]), p - 1);
    for (int i = 0; i + 1 < N; ++i) e[i] = st.k_off[i] / std::sqrt(st.mass[i] * st.mass[i + 1]);
    std::vector<lapack_int> ifail(N);
    lapack_int m = 0;
    double val = 0;
    lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', N, d.data(), e.data(), 0.0, 0.0, 1, 1,
                                     2 * LAPACKE_dlamch('S'), &m, &val, z.data(), N, ifail.data());
    if (info != 0 || m != 1) throw Error("discrete ground state did not converge");
    lambda = val;
    std::vector<double> f(N);
    double sum = 0;
    for (int i = 0; i < N; ++i) {
        f[i] = z[i] / std::sqrt(st.mass[i]);
        sum += st.mass[i] * f[i];
    }
    if (sum < 0)
        for (double& v : f) v = -v;
    return f;
}

void step(FlowState& st, double dt) {
    if (!(dt > 0)) throw Error("time step must be positive");
    if (!st.w_ref.empty()) {
        // the reference only helps near it; far away its source terms cancel poorly
        double dev = 0, big = 0;
        for (std::size_t i = 0; i < st.w.size(); ++i) {
            dev = std::max(dev, std::abs(st.w[i] - st.w_ref[i]));
            big = std::max(big, std::abs(st.w_ref[i]));
        }
        if (dev > st.ref_radius * big) st.w_ref.clear();
    }
    st.w_prev2 = std::move(st.w_prev);
    st.w_prev = st.w;
    st.dt_prev2 = st.dt_prev;
    st.dt_prev = dt;
    react(st, 0.5 * dt);
    linear_step(st, dt);
    react(st, 0.5 * dt);
    st.tau += dt;
    st.dt = dt;
    ++st.steps;
}

double choose_dt(const FlowState& st, const StepConfig& cfg) {
    double sup = 0;
    for (double w : st.w) sup = std::max(sup, std::abs(w));
    double dt = cfg.dt_max;
    if (sup > 0) dt = std::min(dt, cfg.dt_frac * std::pow(sup, 1 - st.params.p));
    return dt;
}

double flow_energy(const FlowState& st) {
    const double p = st.params.p;
    const std::size_t N = st.w.size();
    double e = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double w = st.w[i];
        e += 0.5 * st.k_diag[i] * w * w;
        if (i + 1 < N) e += st.k_off[i] * w * st.w[i + 1];
        e += st.mass[i] * (w * w / (2 * (p - 1)) - std::pow(std::abs(w), p + 1) / (p + 1));
    }
    return e;
}

double weighted_average(const FlowState& st) {
    double s = 0;
    for (std::size_t i = 0; i < st.w.size(); ++i) s += st.mass[i] * st.w[i];
    return s;
}

double blowup_criterion(const FlowState& st) { return weighted_average(st) - st.params.kappa; }

namespace {

FlowDiag diagnose(const FlowState& st, double eps_radius) {
    const double p = st.params.p;
    const std::size_t N = st.w.size();
    FlowDiag d;
    d.tau = st.tau;
    d.dt = st.dt;
    d.weighted_avg = weighted_average(st);
    d.energy = flow_energy(st);
    std::size_t im = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (std::abs(st.w[i]) > d.sup_norm) { d.sup_norm = std::abs(st.w[i]); im = i; }
        if (st.r[i] > 0.5 * st.r.back()) d.outer_sup = std::max(d.outer_sup, std::abs(st.w[i]));
    }
    d.argmax_r = st.r[im];
    d.min_dtau_w = NAN;
    d.min_ratio = NAN;
    if (st.steps >= 1) {
        // BDF2 on the stored (possibly non-uniform) steps; one-sided difference at the first step
        const double h1 = st.dt_prev, h2 = st.dt_prev2;
        double mn = INFINITY, mr = INFINITY;
        for (std::size_t i = 0; i < N; ++i) {
            double dw;
            if (st.steps >= 2 && !st.w_prev2.empty())
                dw = (2 * h1 + h2) / (h1 * (h1 + h2)) * st.w[i] - (h1 + h2) / (h1 * h2) * st.w_prev[i] +
                     h1 / (h2 * (h1 + h2)) * st.w_prev2[i];
            else
                dw = (st.w[i] - st.w_prev[i]) / h1;
            // differences at round-off level are not resolved; count them as zero
            double big = std::max(std::abs(st.w[i]), std::abs(st.w_prev[i]));
            if (st.steps >= 2 && !st.w_prev2.empty()) big = std::max(big, std::abs(st.w_prev2[i]));
            if (std::abs(dw) <= 8 * 2.220446049250313e-16 * big * (4 / h1 + (st.steps >= 2 ? 2 / h2 : 0.0))) dw = 0.0;
            mn = std::min(mn, dw);
            if (st.r[i] <= eps_radius && st.w[i] != 0) mr = std::min(mr, dw / std::pow(std::abs(st.w[i]), p));
        }
        d.min_dtau_w = mn;
        d.min_ratio = mr;
    }
    return d;
}

double max_abs_dtau(const FlowState& st) {
    if (st.steps < 1) return INFINITY;
    double m = 0;
    for (std::size_t i = 0; i < st.w.size(); ++i) m = std::max(m, std::abs(st.w[i] - st.w_prev[i]) / st.dt_prev);
    return m;
}

}  // namespace

FlowReport run(FlowState& st, double tau_max, const StepConfig& sc, const StopConfig& stop) {
    if (!(tau_max > 0)) throw Error("tau_max must be positive");
    if (!(sc.dt_max > 0 && sc.dt_frac > 0)) throw Error("time-step controls must be positive");
    FlowReport R;
    R.boundary = st.boundary;
    const double kap = st.params.kappa, p = st.params.p;
    const double cap = stop.cap_factor * kap;
    R.series.push_back(diagnose(st, stop.eps_radius));
    R.max_avg_minus_kappa = R.series.back().weighted_avg - kap;
    R.min_dtau_w = INFINITY;
    const double t_end = st.tau + tau_max;
    while (true) {
        const auto& last = R.series.back();
        if (last.sup_norm > cap) {
            R.outcome = FlowOutcome::BlewUp;
            R.cap_reached = true;
            break;
        }
        if (st.steps >= 3 && max_abs_dtau(st) < stop.conv_tol) {
            R.outcome = FlowOutcome::ConvergedToProfile;
            break;
        }
        if (st.tau >= t_end - 1e-14 || std::size_t(st.steps) >= stop.max_steps) {
            R.outcome = FlowOutcome::ReachedMaxTime;
            break;
        }
        double dt = std::min(choose_dt(st, sc), t_end - st.tau);
        if (dt < 1e-13 * std::max(1.0, std::abs(st.tau)) && t_end - st.tau > dt) {
            // time steps no longer resolve tau in double precision: blow-up is imminent
            R.outcome = FlowOutcome::BlewUp;
            R.cap_reached = false;
            break;
        }
        double e0 = last.energy;
        step(st, dt);
        R.series.push_back(diagnose(st, stop.eps_radius));
        const auto& d = R.series.back();
        if (!std::isfinite(d.sup_norm)) throw Error("flow state became non-finite");
        R.max_energy_increase = std::max(R.max_energy_increase, d.energy - e0);
        if (std::isfinite(d.min_dtau_w)) R.min_dtau_w = std::min(R.min_dtau_w, d.min_dtau_w);
        R.max_avg_minus_kappa = std::max(R.max_avg_minus_kappa, d.weighted_avg - kap);
    }
    R.tau_end = st.tau;
    R.steps = st.steps;
    R.r = st.r;
    R.w_final = st.w;
    if (!std::isfinite(R.min_dtau_w)) R.min_dtau_w = 0.0;
    if (R.outcome == FlowOutcome::BlewUp) {
        // w_max^{1-p} is linear in tau near a type-I blow-up; fit the last points and extrapolate to 0
        std::vector<double> ts, vs;
        for (auto it = R.series.rbegin(); it != R.series.rend() && ts.size() < 8; ++it) {
            if (it->sup_norm < 10 * kap) break;
            if (!ts.empty() && !(it->tau < ts.back())) continue;
            ts.push_back(it->tau);
            vs.push_back(std::pow(it->sup_norm, 1 - p));
        }
        if (ts.size() >= 2) {
            double mt = 0, mv = 0;
            for (std::size_t i = 0; i < ts.size(); ++i) { mt += ts[i]; mv += vs[i]; }
            mt /= ts.size();
            mv /= ts.size();
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                sxy += (ts[i] - mt) * (vs[i] - mv);
                sxx += (ts[i] - mt) * (ts[i] - mt);
            }
            double slope = sxy / sxx;
            R.tau1 = mt - mv / slope;
        } else {
            R.tau1 = st.tau;
        }
    }
    if (R.outcome == FlowOutcome::ConvergedToProfile) {
        double sup = R.series.back().sup_norm, dk = 0;
        for (double w : st.w) dk = std::max(dk, std::abs(std::abs(w) - kap));
        R.limit = sup < 1e-6 ? "zero" : dk < 1e-4 ? "kappa" : "other";
    }
    return R;
}

FlowSummary flow_diagnostics(const FlowReport& rep, const Parameters& par) {
    FlowSummary S;
    S.min_dtau_w = rep.min_dtau_w;
    const double p = par.p;
    if (rep.series.empty()) return S;
    S.outer_sup_initial = rep.series.front().outer_sup;
    S.outer_sup_final = rep.series.back().outer_sup;
    S.blowup_r = rep.series.back().argmax_r;
    if (rep.outcome == FlowOutcome::BlewUp) {
        for (const auto& d : rep.series)
            if (d.tau < rep.tau1) S.type1_indicator = std::max(S.type1_indicator, std::pow(rep.tau1 - d.tau, 1 / (p - 1)) * d.sup_norm);
        const double r_max = rep.r.empty() ? 0.0 : rep.r.back();
        S.compact_blowup_set = S.blowup_r < 0.5 * r_max && S.outer_sup_final <= 2 * std::max(S.outer_sup_initial, par.kappa);
    }
    const double t_half = 0.5 * (rep.series.front().tau + rep.series.back().tau);
    S.eps_estimate = INFINITY;
    for (const auto& d : rep.series)
        if (d.tau >= t_half && std::isfinite(d.min_ratio)) S.eps_estimate = std::min(S.eps_estimate, d.min_ratio);
    if (!std::isfinite(S.eps_estimate)) S.eps_estimate = 0.0;
    // plateau: the slowest energy change after the initial transient
    double best = INFINITY;
    S.energy_plateau = rep.series.back().energy;
    for (std::size_t i = std::min<std::size_t>(5, rep.series.size() - 1); i + 1 < rep.series.size(); ++i) {
        double rate = std::abs(rep.series[i + 1].energy - rep.series[i].energy) /
                      std::max(rep.series[i + 1].tau - rep.series[i].tau, 1e-300);
        if (rate < best) { best = rate; S.energy_plateau = rep.series[i].energy; }
    }
    return S;
}

std::string flow_csv(const FlowReport& rep) {
    std::ostringstream os;
    os.precision(12);
    os << "tau,sup_norm,weighted_avg,energy,dt,min_dtau_w\r\n";
    for (const auto& d : rep.series) {
        os << d.tau << ',' << d.sup_norm << ',' << d.weighted_avg << ',' << d.energy << ',' << d.dt << ',';
        if (std::isfinite(d.min_dtau_w)) os << d.min_dtau_w;
        os << "\r\n";
    }
    return os.str();
}

PerturbationReport entropy_perturbation_experiment(const RadialProfile& pr, const double s,
                                                   const PerturbationConfig& cfg) {
    if (!pr.bounded() || pr.is_constant()) throw Error("perturbation experiment needs a nonconstant bounded profile");
    PerturbationReport R;
    R.s = s;
    R.E_kappa = kappa_energy(pr.params);
    auto fe = first_eigenfunction(pr, cfg.eigen_resolution);
    double wsup = 0.0;
    for (double v : pr.w) wsup = std::max(wsup, std::abs(v));
    auto rescale = [&](std::vector<double>& g) {
        if (cfg.scale != DirectionScale::ProfileSup) return;
        double m = 0.0;
        for (double v : g) m = std::max(m, std::abs(v));
        for (double& v : g) v *= wsup / m;
    };
    rescale(fe.f);
    for (double v : fe.f) R.direction_sup = std::max(R.direction_sup, std::abs(v));
    auto r = std::make_shared<std::vector<double>>(fe.r);
    auto f = std::make_shared<std::vector<double>>(fe.f);
    auto df = std::make_shared<std::vector<double>>(differentiate(fe.r, fe.f));
    RadialField dir;
    dir.w = [=](double x) { double a, b; HermiteTable{r.get(), f.get(), df.get()}.eval(x, a, b); return a; };
    dir.dw = [=](double x) { double a, b; HermiteTable{r.get(), f.get(), df.get()}.eval(x, a, b); return b; };
    auto base = pr.field();
    RadialField u{[=](double x) { return base.w(x) + s * dir.w(x); },
                  [=](double x) { return base.dw(x) + s * dir.dw(x); },
                  [=](double x, double& v, double& d) {
                      double a, b;
                      base.eval(x, v, d);
                      HermiteTable{r.get(), f.get(), df.get()}.eval(x, a, b);
                      v += s * a;
                      d += s * b;
                  }};
    auto rules = default_rules(pr.params.n);
    auto Lw = entropy(base, pr.params, cfg.entropy, rules);
    auto Lu = entropy(u, pr.params, cfg.entropy, rules);
    R.lambda_w = Lw.lambda;
    R.lambda_ws = Lu.lambda;
    R.margin = Lw.lambda - Lu.lambda;
    R.entropy_unconverged = Lw.unconverged_sup || Lu.unconverged_sup;
    if (cfg.run_flow) {
        // discrete equilibrium plus the discrete ground state, so that s = 0 is stationary
        auto st = init_flow(pr, cfg.grid);
        R.discrete_lambda1 = perturb_along_ground_state(st, s, cfg.scale);
        auto rep = run(st, cfg.tau_max);
        auto sum = flow_diagnostics(rep, pr.params);
        R.flow_run = true;
        R.outcome = rep.outcome;
        R.tau1 = rep.tau1;
        R.final_energy = rep.series.back().energy;
        R.plateau_energy = sum.energy_plateau;
        R.min_dtau_w = rep.min_dtau_w;
    }
    return R;
}

}  // namespace selfsim
