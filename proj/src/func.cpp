#include "selfsim/func.hpp"
#include "selfsim/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace selfsim {

namespace {

double ipow(double x, int k) {
    double r = 1.0;
    while (k) {
        if (k & 1) r *= x;
        x *= x;
        k >>= 1;
    }
    return r;
}

}  // namespace

Rules default_rules(int n) { return {composite_rule(n), angular_rule(n)}; }

FIntegrals f_integrals(const RadialField& f, const Parameters& par, double x0, double t0, const Rules& rules) {
    if (!(t0 < 0)) throw Error("offset integral requires t0 < 0");
    FIntegrals I;
    const double p = par.p;
    const int ip = int(p);
    const bool integer_p = double(ip) == p && ip >= 1 && ip <= 64;
    auto add = [&](double r, double wt) {
        double w, d;
        f.eval(r, w, d);
        double aw = std::abs(w);
        I.grad += wt * d * d;
        I.pot += wt * (integer_p ? ipow(aw, ip + 1) : std::pow(aw, p + 1.0));
        I.mass += wt * w * w;
    };
    x0 = std::abs(x0);
    if (x0 == 0.0) {
        const double sc = std::sqrt(-t0);
        for (std::size_t i = 0; i < rules.radial.nodes.size(); ++i) add(sc * rules.radial.nodes[i], rules.radial.weights[i]);
    } else {
        // the 2D (r, theta) product rule aliases narrow cores seen off-center; average the kernel exactly
        auto q = offset_kernel_rule(par.n, x0, t0);
        for (std::size_t i = 0; i < q.nodes.size(); ++i) add(q.nodes[i], q.weights[i]);
    }
    return I;
}

double f_combine(const FIntegrals& I, double p, double t0) {
    const double a = -t0;
    return 0.5 * std::pow(a, (p + 1) / (p - 1)) * I.grad - std::pow(a, (p + 1) / (p - 1)) * I.pot / (p + 1) +
           std::pow(a, 2 / (p - 1)) * I.mass / (2 * (p - 1));
}

double f_functional(const RadialField& f, const Parameters& par, double x0, double t0, const Rules& rules) {
    if (!(t0 < 0)) throw Error("F-functional requires t0 < 0");
    return f_combine(f_integrals(f, par, x0, t0, rules), par.p, t0);
}

namespace {

// Integrals of a singular homogeneous profile at x0 = 0, t0 = -1, with the
// origin singularity absorbed into the rule: sum w_i f(r_i) r_i^gamma.
double power_integral(int n, double gamma, const RadialFn& f, int N = 40) {
    auto q = power_rule(n, gamma, N);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]) * std::pow(q.nodes[i], gamma);
    return s;
}

struct Moments {
    // int g rho for the integrands used by the energy and the identities
    double grad = 0, pot = 0, mass = 0;
    double r2grad = 0, r2pot = 0, r2mass = 0;
    double grad_dir = 0, pot_dir = 0, mass_dir = 0;  // int g (y . e) rho, |e| = 1
};

Moments moments(const RadialProfile& pr, const QuadratureRule& rule) {
    const double p = pr.params.p;
    const int n = pr.params.n;
    Moments m;
    auto grad = [&](double r) { double d = pr.deriv(r); return d * d; };
    auto pot = [&](double r) { return std::pow(std::abs(pr.value(r)), p + 1); };
    auto mass = [&](double r) { double v = pr.value(r); return v * v; };
    if (pr.kind == ProfileKind::SingularHomogeneous) {
        const double g1 = 2 * pr.params.alpha + 2, g0 = 2 * pr.params.alpha;
        m.grad = power_integral(n, g1, grad);
        m.pot = power_integral(n, g1, pot);
        m.mass = power_integral(n, g0, mass);
        m.r2grad = power_integral(n, g0, [&](double r) { return r * r * grad(r); });
        m.r2pot = power_integral(n, g0, [&](double r) { return r * r * pot(r); });
        m.r2mass = power_integral(n, g0 - 2, [&](double r) { return r * r * mass(r); });
    } else {
        m.grad = weighted_integral(rule, grad);
        m.pot = weighted_integral(rule, pot);
        m.mass = weighted_integral(rule, mass);
        m.r2grad = weighted_integral(rule, [&](double r) { return r * r * grad(r); });
        m.r2pot = weighted_integral(rule, [&](double r) { return r * r * pot(r); });
        m.r2mass = weighted_integral(rule, [&](double r) { return r * r * mass(r); });
    }
    // directional moments: int g(|y|) (y . e) rho, evaluated with the angular rule
    auto ang = angular_rule(n);
    const auto& rr = pr.kind == ProfileKind::SingularHomogeneous ? power_rule(n, 2 * pr.params.alpha + 1, 40) : rule;
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
        double r = rr.nodes[i];
        double fac = pr.kind == ProfileKind::SingularHomogeneous ? std::pow(r, rr.power) : 1.0;
        double gsum = 0.0;
        for (std::size_t j = 0; j < ang.nodes.size(); ++j) gsum += ang.weights[j] * r * ang.nodes[j];
        double c = rr.weights[i] * fac * gsum;
        m.grad_dir += c * grad(r);
        m.pot_dir += c * pot(r);
        m.mass_dir += c * mass(r);
    }
    return m;
}

double rel(double res, std::initializer_list<double> parts) {
    double s = 0.0;
    for (double x : parts) s = std::max(s, std::abs(x));
    return s > 0 ? std::abs(res) / s : std::abs(res);
}

FunctionalReport report_from(const Moments& m, const Parameters& par) {
    const double p = par.p, n = par.n;
    FunctionalReport R;
    R.gradient = 0.5 * m.grad;
    R.mass = m.mass / (2 * (p - 1));
    R.potential = m.pot / (p + 1);
    R.energy = R.gradient + R.mass - R.potential;
    R.energy_shortcut = (0.5 - 1 / (p + 1)) * m.pot;

    double a1 = (n / (p + 1) + (2 - n) / 2) * m.grad, a2 = 0.5 * (0.5 - 1 / (p + 1)) * m.r2grad;
    R.pohozaev_abs = a1 + a2;
    R.pohozaev = rel(R.pohozaev_abs, {a1, a2});

    double b1 = m.grad, b2 = -m.pot, b3 = m.mass / (p - 1);
    R.inte1_abs = b1 + b2 + b3;
    R.inte1 = rel(R.inte1_abs, {b1, b2, b3});

    double c1 = (2 - n) / 2 * m.grad, c2 = -n / (2 * (p - 1)) * m.mass, c3 = n / (p + 1) * m.pot,
           c4 = 0.25 * m.r2grad, c5 = m.r2mass / (4 * (p - 1)), c6 = -m.r2pot / (2 * (p + 1));
    R.eq10_abs = c1 + c2 + c3 + c4 + c5 + c6;
    R.eq10 = rel(R.eq10_abs, {c1, c2, c3, c4, c5, c6});

    double d1 = 0.5 * m.grad_dir, d2 = -m.pot_dir / (p + 1), d3 = m.mass_dir / (2 * (p - 1));
    R.testfunction_abs = d1 + d2 + d3;
    // scale by the undirected integrals; the directional ones vanish by symmetry
    R.testfunction = rel(R.testfunction_abs, {0.5 * m.grad, m.pot / (p + 1), m.mass / (2 * (p - 1))});
    return R;
}

}  // namespace

FunctionalReport identities(const RadialProfile& profile, const QuadratureRule& rule) {
    auto R = report_from(moments(profile, rule), profile.params);
    double scale = std::max({std::abs(R.gradient), std::abs(R.mass), std::abs(R.potential)});
    R.forms_disagree = std::abs(R.energy - R.energy_shortcut) > 1e-4 * std::max(scale, 1e-300);
    return R;
}

FunctionalReport identities(const RadialProfile& profile) {
    return identities(profile, composite_rule(profile.params.n));
}

FunctionalReport energy(const RadialProfile& profile, const QuadratureRule& rule) { return identities(profile, rule); }
FunctionalReport energy(const RadialProfile& profile) { return identities(profile); }

FunctionalReport energy(const RadialField& f, const Parameters& par, const QuadratureRule& rule) {
    const double p = par.p;
    FunctionalReport R;
    double g = weighted_integral(rule, [&](double r) { double d = f.dw(r); return d * d; });
    double pot = weighted_integral(rule, [&](double r) { return std::pow(std::abs(f.w(r)), p + 1); });
    double m = weighted_integral(rule, [&](double r) { double v = f.w(r); return v * v; });
    R.gradient = 0.5 * g;
    R.mass = m / (2 * (p - 1));
    R.potential = pot / (p + 1);
    R.energy = R.gradient + R.mass - R.potential;
    R.energy_shortcut = (0.5 - 1 / (p + 1)) * pot;
    return R;
}

double f_functional(const RadialProfile& profile, double x0, double t0, const Rules& rules) {
    if (!(t0 < 0)) throw Error("F-functional requires t0 < 0");
    if (profile.kind == ProfileKind::SingularHomogeneous) {
        if (x0 != 0.0) throw Error("offset F-functional of the singular profile is not supported");
        // 2/(p-1)-homogeneity makes F independent of t0
        return energy(profile).energy;
    }
    return f_functional(profile.field(), profile.params, x0, t0, rules);
}

double f_functional(const RadialProfile& profile, double x0, double t0) {
    return f_functional(profile, x0, t0, default_rules(profile.params.n));
}

namespace {

template <class F>
double golden_max(F&& f, double a, double b, double tol, double& fbest) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    double x = 0.5 * (a + b);
    fbest = f(x);
    return x;
}

}  // namespace

EntropyResult entropy(const RadialField& f, const Parameters& par, const EntropyConfig& cfg, const Rules& rules) {
    if (cfg.nx < 2 || cfg.nt < 2 || !(cfg.x0_max > 0) || !(cfg.logt_max > cfg.logt_min) || !(cfg.refine_tol > 0) ||
        !(cfg.ring_eps > 0))
        throw Error("invalid entropy search configuration");
    EntropyResult E;
    auto F = [&](double x0, double lt) { return f_functional(f, par, x0, -std::exp(lt), rules); };
    for (int i = 0; i < cfg.nx; ++i) E.grid_x0.push_back(cfg.x0_max * i / (cfg.nx - 1));
    for (int j = 0; j < cfg.nt; ++j)
        E.grid_logt.push_back(cfg.logt_min + (cfg.logt_max - cfg.logt_min) * j / (cfg.nt - 1));
    E.grid_F.assign(std::size_t(cfg.nx) * cfg.nt, 0.0);
    parallel_for(E.grid_F.size(), [&](std::size_t k) {
        E.grid_F[k] = F(E.grid_x0[k / cfg.nt], E.grid_logt[k % cfg.nt]);
    });
    double best = -INFINITY;
    int bi = 0, bj = 0;
    for (int i = 0; i < cfg.nx; ++i)
        for (int j = 0; j < cfg.nt; ++j) {
            double v = E.grid_F[std::size_t(i) * cfg.nt + j];
            if (v > best) { best = v; bi = i; bj = j; }
        }
    double hx = cfg.x0_max / (cfg.nx - 1), ht = (cfg.logt_max - cfg.logt_min) / (cfg.nt - 1);
    double x = E.grid_x0[bi], lt = E.grid_logt[bj], fb = best;
    for (int sweep = 0; sweep < 30; ++sweep) {
        double xo = x, lo = lt, fv;
        double xn = golden_max([&](double s) { return F(s, lt); }, std::max(0.0, x - hx), std::min(cfg.x0_max, x + hx),
                               cfg.refine_tol, fv);
        if (fv > fb) { fb = fv; x = xn; }
        if (F(0.0, lt) >= fb) { fb = F(0.0, lt); x = 0.0; }
        double tn = golden_max([&](double s) { return F(x, s); }, std::max(cfg.logt_min, lt - ht),
                               std::min(cfg.logt_max, lt + ht), cfg.refine_tol, fv);
        if (fv > fb) { fb = fv; lt = tn; }
        hx = std::max(4 * std::abs(x - xo), 4 * cfg.refine_tol);
        ht = std::max(4 * std::abs(lt - lo), 4 * cfg.refine_tol);
        if (std::abs(x - xo) < cfg.refine_tol && std::abs(lt - lo) < cfg.refine_tol) break;
    }
    E.lambda = fb;
    E.x0 = x;
    E.t0 = -std::exp(lt);
    const double edge = 2 * cfg.refine_tol;
    E.unconverged_sup = x > cfg.x0_max - edge || lt < cfg.logt_min + edge || lt > cfg.logt_max - edge;

    const double eps = cfg.ring_eps;
    double ring = -INFINITY;
    for (int k = 0; k <= 16; ++k) {
        double th = M_PI * k / 16.0;  // x0 >= 0 half of the ring
        double xr = eps * std::sin(th), tr = eps * std::cos(th);
        double s = std::abs(xr) + std::abs(tr);
        ring = std::max(ring, F(x + eps * xr / s, lt + eps * tr / s));
    }
    E.delta_ring = fb - ring;
    E.delta_t = fb - std::max(F(x, lt + eps), F(x, lt - eps));
    E.delta_x = fb - F(x + eps, lt);
    return E;
}

EntropyResult entropy(const RadialProfile& profile, const EntropyConfig& cfg) {
    if (!profile.bounded()) throw Error("entropy requires a bounded profile");
    return entropy(profile.field(), profile.params, cfg, default_rules(profile.params.n));
}

DensityResult density(const RadialProfile& profile, double x0, const std::vector<double>& s_seq) {
    if (s_seq.size() < 4) throw Error("density needs at least four s values");
    for (std::size_t k = 0; k < s_seq.size(); ++k) {
        if (!(s_seq[k] < 0)) throw Error("density s values must be negative");
        if (k && !(std::abs(s_seq[k]) < std::abs(s_seq[k - 1]))) throw Error("density s values must decrease in |s|");
    }
    auto rules = default_rules(profile.params.n);
    DensityResult D;
    D.s = s_seq;
    for (double s : s_seq) D.F.push_back(f_functional(profile, x0 / std::sqrt(-s), -1.0, rules));
    for (std::size_t k = 1; k < D.F.size(); ++k) {
        double inc = D.F[k] - D.F[k - 1];
        D.worst_increase = std::max(D.worst_increase, inc);
    }
    D.monotone = D.worst_increase <= 1e-8;
    if (x0 == 0.0 || profile.is_constant()) {
        D.theta = D.F.back();
        return D;
    }
    // decaying tail: F_X - Theta ~ X^{-2 alpha}; extrapolate with the known ratio
    std::size_t k = D.F.size() - 1;
    double q = std::pow(std::abs(s_seq[k] / s_seq[k - 1]), profile.params.alpha);
    D.theta = (D.F[k] - q * D.F[k - 1]) / (1 - q);
    return D;
}

DensityResult density(const RadialProfile& profile, double x0) {
    std::vector<double> s;
    for (int k = 0; k <= 10; ++k) s.push_back(-std::ldexp(1.0, -k));
    return density(profile, x0, s);
}

PathResult mapped_path(const RadialProfile& profile, double x0, double t0, int K) {
    if (!(t0 < 0)) throw Error("mapped path requires t0 < 0");
    auto rules = default_rules(profile.params.n);
    const double T = 1.0 + 1.0 / t0, x = x0 / std::sqrt(-t0);
    PathResult P;
    for (int k = K; k >= 0; --k) {
        double s = -std::ldexp(1.0, k);
        double X = x / std::sqrt(-(T + s)), tt = -s / (T + s);
        P.s.push_back(s);
        P.F.push_back(f_functional(profile, X, tt, rules));
    }
    for (std::size_t i = 1; i < P.F.size(); ++i) P.worst_violation = std::max(P.worst_violation, P.F[i] - P.F[i - 1]);
    return P;
}

}  // namespace selfsim
