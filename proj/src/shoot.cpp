#include "selfsim/shoot.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <sstream>

namespace selfsim {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 2>;

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Decaying: return "Decaying";
        case Classification::SignChanging: return "SignChanging";
        case Classification::Growing: return "Growing";
        case Classification::Inconclusive: return "Inconclusive";
        case Classification::InconclusiveConstant: return "Inconclusive-constant";
    }
    return "unknown";
}

namespace {

struct Rhs {
    double n, p;
    void operator()(const State& y, State& dy, double r) const {
        dy[0] = y[1];
        dy[1] = -((n - 1) / r - 0.5 * r) * y[1] + y[0] / (p - 1) - std::pow(std::abs(y[0]), p - 1) * y[0];
    }
};

double w2_origin(const Parameters& par, double a) {
    return (a / (par.p - 1) - std::pow(std::abs(a), par.p - 1) * a) / par.n;
}

// Taylor start w = a + (c/2) r^2 + B r^4 with c = w''(0).
State taylor_start(const Parameters& par, double a, double r) {
    const double c = w2_origin(par, a);
    const double g1 = 1.0 / (par.p - 1) - par.p * std::pow(std::abs(a), par.p - 1);
    const double B = 0.5 * c * (1.0 + g1) / (4.0 * (par.n + 2));
    return {a + 0.5 * c * r * r + B * r * r * r * r, c * r + 4.0 * B * r * r * r};
}

// Adaptive integration from r0 through the monotone list of targets; `obs(r, y)` is
// called at every target and `step(r, y)` after every accepted step. Either may
// return false to stop. Returns false on step-size underflow.
template <class Obs, class StepHook>
bool integrate_to(const Rhs& f, State& y, double r0, const std::vector<double>& targets, double tol, Obs&& obs,
                  StepHook&& step) {
    auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(tol, tol);
    double r = r0;
    double dir = (targets.empty() || targets.back() >= r0) ? 1.0 : -1.0;
    double dt = dir * 1e-3;
    for (double target : targets) {
        while (dir * (target - r) > 1e-14 * std::max(1.0, std::abs(target))) {
            double rem = target - r;
            bool last = std::abs(dt) >= std::abs(rem);
            double dtry = last ? rem : dt;
            double rs = r;
            auto res = stepper.try_step(f, y, r, dtry);
            if (res == ode::fail) {
                dt = dtry;
                if (std::abs(dt) < 1e-13 * std::max(1.0, std::abs(r))) return false;
                continue;
            }
            if (last) r = target;
            if (!last || std::abs(dtry) > std::abs(dt)) dt = dtry;
            (void)rs;
            if (!std::isfinite(y[0]) || !std::isfinite(y[1])) return false;
            if (!step(r, y)) return true;
        }
        if (!obs(r, y)) return true;
    }
    return true;
}

// the Taylor start is only accurate well inside the core of width |g'(a)|^{-1/2}
double start_radius(const Parameters& par, double a, double eps) {
    double g1 = std::abs(1.0 / (par.p - 1) - par.p * std::pow(std::abs(a), par.p - 1));
    return std::min(eps, 0.01 / std::sqrt(1.0 + g1));
}

}  // namespace

OdeTrajectory integrate_radial(const Parameters& par, double a, const ShootConfig& cfg) {
    if (!std::isfinite(a)) throw Error("initial value must be finite");
    if (!(cfg.tol > 1e-14 && cfg.tol < 1e-4)) throw Error("tolerance must lie in (1e-14, 1e-4)");
    OdeTrajectory T;
    T.params = par;
    T.a = a;
    T.tol = cfg.tol;
    const double eps = start_radius(par, a, cfg.eps), c = w2_origin(par, a);
    State y = taylor_start(par, a, eps);
    T.r = {0.0, eps};
    T.w = {a, y[0]};
    T.dw = {0.0, y[1]};
    // +-kappa in floating point leave c at round-off level; the drift it seeds is not a solution
    if (a == 0.0 || std::abs(c) <= 4 * DBL_EPSILON * std::abs(a) / (par.p - 1)) {
        // exact equilibrium: the profile equation keeps the constant
        T.r = {0.0, cfg.r_max};
        T.w = {a, a};
        T.dw = {0.0, 0.0};
        T.r_end = cfg.r_max;
        T.cls = Classification::InconclusiveConstant;
        return T;
    }
    const double sg = a > 0 ? 1.0 : -1.0;
    const double cap = cfg.cap_factor * std::max(std::abs(a), par.kappa);
    const double r_tail = 2.0 * std::sqrt(double(par.n));
    Rhs f{double(par.n), par.p};
    Classification stop = Classification::Inconclusive;
    double prev_d = y[1];
    bool ok = integrate_to(
        f, y, eps, {cfg.r_max}, cfg.tol, [](double, const State&) { return true; },
        [&](double r, const State& s) {
            T.r.push_back(r);
            T.w.push_back(s[0]);
            T.dw.push_back(s[1]);
            double v = sg * s[0], d = sg * s[1];
            if (v <= 0) { stop = Classification::SignChanging; return false; }
            if (std::abs(s[0]) > cap) { stop = Classification::Growing; return false; }
            if (r > r_tail && sg * prev_d < 0 && d > 0 && v < par.kappa) { stop = Classification::Growing; return false; }
            prev_d = s[1];
            return true;
        });
    T.r_end = T.r.back();
    if (!ok) {
        T.diagnostic = "step-size underflow at r = " + std::to_string(T.r_end);
        T.cls = Classification::Inconclusive;
        return T;
    }
    T.cls = classify(T, cfg);
    (void)stop;
    return T;
}

OdeTrajectory integrate_radial(const Parameters& par, double a, double r_max, double tol) {
    ShootConfig cfg;
    cfg.r_max = r_max;
    cfg.tol = tol;
    return integrate_radial(par, a, cfg);
}

Classification classify(const OdeTrajectory& T, const ShootConfig& cfg) {
    const auto& par = T.params;
    if (T.w.empty()) return Classification::Inconclusive;
    double a = T.w.front();
    double wmax = 0, wmin = INFINITY;
    for (double v : T.w) { wmax = std::max(wmax, std::abs(v - a)); wmin = std::min(wmin, std::abs(v)); }
    if (wmax <= 1e-12 * std::max(1.0, std::abs(a))) return Classification::InconclusiveConstant;
    const double sg = a > 0 ? 1.0 : -1.0;
    const double cap = cfg.cap_factor * std::max(std::abs(a), par.kappa);
    const double r_tail = 2.0 * std::sqrt(double(par.n));
    for (std::size_t i = 0; i < T.w.size(); ++i) {
        if (sg * T.w[i] <= 0) return Classification::SignChanging;
        if (std::abs(T.w[i]) > cap) return Classification::Growing;
        if (i > 0 && T.r[i] > r_tail && sg * T.dw[i - 1] < 0 && sg * T.dw[i] > 0 && sg * T.w[i] < par.kappa)
            return Classification::Growing;
    }
    if (T.r.back() < 10.0) return Classification::Inconclusive;
    // tail monitor q = r^alpha w over the last part of the range
    const double r0 = T.r.back() - cfg.tail_window * (T.r.back() - T.r.front());
    double qmin = INFINITY, qmax = -INFINITY;
    bool decreasing = true;
    for (std::size_t i = 0; i < T.r.size(); ++i) {
        if (T.r[i] < r0) continue;
        double q = std::pow(T.r[i], par.alpha) * std::abs(T.w[i]);
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
        if (sg * T.dw[i] >= 0) decreasing = false;
    }
    if (decreasing && qmin > 0 && qmax / qmin - 1.0 <= cfg.flatness) return Classification::Decaying;
    return Classification::Inconclusive;
}

OdeTrajectory trajectory_from_profile(const RadialProfile& pr) {
    OdeTrajectory T;
    T.params = pr.params;
    T.r = pr.r;
    T.w = pr.w;
    T.dw = pr.dw;
    T.a = pr.w.front();
    T.r_end = pr.r.back();
    return T;
}

std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    // Fornberg's recursion for the weights of derivatives 0..m at x0
    const int N = int(x.size()) - 1;
    std::vector<std::vector<double>> c(N + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= N; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(N + 1);
    for (int i = 0; i <= N; ++i) w[i] = c[i][m];
    return w;
}

std::vector<double> differentiate(const std::vector<double>& r, const std::vector<double>& f) {
    const std::size_t N = r.size(), half = 3;
    if (N < 2 * half + 1) throw Error("differentiate needs at least 7 points");
    std::vector<double> d(N);
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t lo = i < half ? 0 : std::min(i - half, N - 2 * half - 1);
        std::vector<double> xs(r.begin() + lo, r.begin() + lo + 2 * half + 1);
        auto w = fd_weights(r[i], xs, 1);
        double s = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) s += w[k] * f[lo + k];
        d[i] = s;
    }
    return d;
}

double ode_residual(const RadialProfile& pr) {
    if (pr.r.size() < 5) throw Error("ode_residual needs at least 5 grid points");
    const double n = pr.params.n, p = pr.params.p;
    // closed-form kinds carry exact second derivatives; otherwise difference w'
    const bool exact = pr.kind == ProfileKind::ConstantZero || pr.kind == ProfileKind::ConstantKappa ||
                       pr.kind == ProfileKind::SingularHomogeneous;
    std::vector<double> d2 = exact && pr.d2w.size() == pr.r.size() ? pr.d2w : differentiate(pr.r, pr.dw);
    double res = 0.0;
    for (std::size_t i = 1; i + 1 < pr.r.size(); ++i) {
        double r = pr.r[i], w = pr.w[i];
        double e = d2[i] + ((n - 1) / r - 0.5 * r) * pr.dw[i] - w / (p - 1) + std::pow(std::abs(w), p - 1) * w;
        res = std::max(res, std::abs(e));
    }
    return res;
}

namespace {

struct Matcher {
    Parameters par;
    ShootConfig cfg;
    Rhs f;
    double tol = 1e-13;

    State forward(double a) const {
        const double eps = start_radius(par, a, cfg.eps);
        State y = taylor_start(par, a, eps);
        integrate_to(f, y, eps, {cfg.match_radius}, tol, [](double, const State&) { return true; },
                     [](double, const State&) { return true; });
        return y;
    }
    // returns false if the backward solution leaves the bounded regime
    bool backward(double C, State& y) const {
        decay_tail(par, C, cfg.tail_radius, y[0], y[1]);
        bool blown = false;
        double big = 20.0 * std::max(1.0, par.kappa) + 10.0 * std::abs(C);
        integrate_to(f, y, cfg.tail_radius, {cfg.match_radius}, tol, [](double, const State&) { return true; },
                     [&](double, const State& s) {
                         if (std::abs(s[0]) > big) { blown = true; return false; }
                         return true;
                     });
        return !blown && std::isfinite(y[0]);
    }
    bool mismatch(double a, double C, State& m) const {
        State b;
        if (!backward(C, b)) return false;
        State fw = forward(a);
        m = {fw[0] - b[0], fw[1] - b[1]};
        return true;
    }
};

}  // namespace

RadialProfile shoot(const Parameters& par, double a_lo, double a_hi, double bisect_tol, const ShootConfig& cfg,
                    ShootDiagnostics* diag) {
    ShootDiagnostics D;
    auto c_lo = integrate_radial(par, a_lo, cfg).cls;
    auto c_hi = integrate_radial(par, a_hi, cfg).cls;
    if (c_lo == c_hi) throw Error("no bracket: both ends classify as " + to_string(c_lo));
    double lo = a_lo, hi = a_hi;
    while (std::abs(hi - lo) > bisect_tol && D.bisect_iterations < 200) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        auto c = integrate_radial(par, mid, cfg).cls;
        (c == c_lo ? lo : hi) = mid;
        ++D.bisect_iterations;
    }
    D.a_bisect = 0.5 * (lo + hi);

    // matching refinement
    Matcher M{par, cfg, Rhs{double(par.n), par.p}};
    State fw = M.forward(D.a_bisect);
    double Cref = std::max(par.beta > 0 ? std::pow(par.beta, 1 / (par.p - 1)) : 0.0, par.kappa);
    const int NC = 80;
    std::vector<double> Cs, gap;
    for (int k = 1; k <= NC; ++k) {
        double C = 3.0 * Cref * k / NC;
        State b;
        if (!M.backward(C, b)) break;
        Cs.push_back(C);
        gap.push_back(b[0] - fw[0]);
    }
    bool found = false;
    double a = D.a_bisect, C = 0.0;
    for (std::size_t k = 0; k + 1 < Cs.size() && !found; ++k) {
        if (gap[k] * gap[k + 1] > 0) continue;
        double x0 = D.a_bisect, x1 = Cs[k] - gap[k] * (Cs[k + 1] - Cs[k]) / (gap[k + 1] - gap[k]);
        int it = 0;
        bool ok = true;
        double worst = INFINITY;
        for (; it < 40; ++it) {
            State m;
            if (!M.mismatch(x0, x1, m)) { ok = false; break; }
            worst = std::max(std::abs(m[0]), std::abs(m[1]));
            double ha = 1e-7 * std::max(1.0, std::abs(x0)), hc = 1e-7 * std::max(1.0, std::abs(x1));
            State mp, mm, np, nm;
            if (!M.mismatch(x0 + ha, x1, mp) || !M.mismatch(x0 - ha, x1, mm) || !M.mismatch(x0, x1 + hc, np) ||
                !M.mismatch(x0, x1 - hc, nm)) { ok = false; break; }
            double J00 = (mp[0] - mm[0]) / (2 * ha), J10 = (mp[1] - mm[1]) / (2 * ha);
            double J01 = (np[0] - nm[0]) / (2 * hc), J11 = (np[1] - nm[1]) / (2 * hc);
            double det = J00 * J11 - J01 * J10;
            if (det == 0 || !std::isfinite(det)) { ok = false; break; }
            double da = -(J11 * m[0] - J01 * m[1]) / det, dc = -(-J10 * m[0] + J00 * m[1]) / det;
            x0 += da;
            x1 += dc;
            if (!(x1 > 0)) { ok = false; break; }
            if (std::abs(da) < 1e-15 * std::max(1.0, std::abs(x0)) && std::abs(dc) < 1e-15 * std::max(1.0, x1)) break;
            if (worst < 1e-13 && it > 2) break;
        }
        State m;
        if (!ok || !M.mismatch(x0, x1, m)) continue;
        double mis = std::max(std::abs(m[0]), std::abs(m[1]));
        if (mis < 1e-10 && std::abs(x0 - D.a_bisect) <= 1e-6 * std::max(1.0, std::abs(x0))) {
            found = true;
            a = x0;
            C = x1;
            D.newton_iterations = it;
            D.match_mismatch = mis;
        }
    }
    if (!found) {
        if (diag) *diag = D;
        throw Error("classification boundary near a = " + std::to_string(D.a_bisect) +
                    " does not continue to a decaying solution");
    }
    D.a_match = a;
    D.C = C;

    // default grid, with the geometric part refined for narrow cores (large a)
    const double core = 1.0 / std::sqrt(1.0 + std::abs(1.0 / (par.p - 1) - par.p * std::pow(std::abs(a), par.p - 1)));
    auto grid = default_grid(1e-6, 20.0, 0.002, 1.0 + std::min(0.02, 0.5 * core));
    RadialProfile pr;
    pr.kind = ProfileKind::Shooting;
    pr.params = par;
    pr.shoot_a = a;
    pr.decay_coeff = C;
    pr.r = grid;
    pr.w.assign(grid.size(), 0.0);
    pr.dw.assign(grid.size(), 0.0);
    // sampling starts at the first grid node so no sample relies on the Taylor start
    const double eps = grid.front() > 0 ? grid.front() : grid[1];
    std::vector<double> fwd_t, bwd_t;
    std::vector<std::size_t> fwd_i, bwd_i;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] <= eps) {
            State t = taylor_start(par, a, grid[i]);
            pr.w[i] = t[0];
            pr.dw[i] = t[1];
        } else if (grid[i] <= cfg.match_radius) {
            fwd_t.push_back(grid[i]);
            fwd_i.push_back(i);
        } else {
            bwd_t.insert(bwd_t.begin(), grid[i]);
            bwd_i.insert(bwd_i.begin(), i);
        }
    }
    State y = taylor_start(par, a, eps);
    std::size_t k = 0;
    integrate_to(M.f, y, eps, fwd_t, M.tol,
                 [&](double, const State& s) { pr.w[fwd_i[k]] = s[0]; pr.dw[fwd_i[k]] = s[1]; ++k; return true; },
                 [](double, const State&) { return true; });
    decay_tail(par, C, cfg.tail_radius, y[0], y[1]);
    // targets descend from the tail radius
    k = 0;
    integrate_to(M.f, y, cfg.tail_radius, bwd_t, M.tol,
                 [&](double, const State& s) { pr.w[bwd_i[k]] = s[0]; pr.dw[bwd_i[k]] = s[1]; ++k; return true; },
                 [](double, const State&) { return true; });

    // w'' from the equation feeds the quintic interpolant; the residual check differences w' instead
    pr.d2w.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double r = grid[i], w = pr.w[i];
        pr.d2w[i] = -((par.n - 1) / r - 0.5 * r) * pr.dw[i] + w / (par.p - 1) - std::pow(std::abs(w), par.p - 1) * w;
    }
    D.residual = ode_residual(pr);
    if (diag) *diag = D;
    double wmin = *std::min_element(pr.w.begin(), pr.w.end());
    if (!(wmin > 0)) throw Error("matched solution is not positive (min w = " + std::to_string(wmin) + ")");
    if (D.residual > cfg.residual_tol) {
        std::ostringstream os;
        os << "shooting profile residual " << D.residual << " exceeds tolerance " << cfg.residual_tol;
        throw Error(os.str());
    }
    return pr;
}

ScanReport scan_profiles(const Parameters& par, double a_min, double a_max, int samples, const ShootConfig& cfg) {
    ScanReport S;
    std::vector<double> as;
    std::vector<Classification> cs;
    for (int i = 0; i < samples; ++i) {
        double a = a_min + (a_max - a_min) * i / (samples - 1);
        as.push_back(a);
        cs.push_back(integrate_radial(par, a, cfg).cls);
    }
    auto usable = [](Classification c) {
        return c == Classification::Growing || c == Classification::SignChanging || c == Classification::Decaying;
    };
    for (int i = 0; i + 1 < samples; ++i) {
        if (cs[i] == cs[i + 1] || !usable(cs[i]) || !usable(cs[i + 1])) continue;
        Bracket b{as[i], as[i + 1], cs[i], cs[i + 1]};
        S.brackets.push_back(b);
        ShootDiagnostics d;
        try {
            auto pr = shoot(par, b.a_lo, b.a_hi, 1e-13, cfg, &d);
            bool dup = false;
            for (const auto& q : S.profiles)
                if (std::abs(*q.shoot_a - *pr.shoot_a) < 1e-8) dup = true;
            if (!dup) {
                S.profiles.push_back(std::move(pr));
                S.diagnostics.push_back(d);
            }
        } catch (const Error& e) {
            std::ostringstream os;
            os.precision(10);
            os << "[" << b.a_lo << ", " << b.a_hi << "] " << e.what();
            S.rejected.push_back(os.str());
        }
    }
    return S;
}

}  // namespace selfsim
