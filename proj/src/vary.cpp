#include "selfsim/vary.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "selfsim/shoot.hpp"

namespace selfsim {

RadialField gaussian_bump(double c, double r0, double sigma) {
    if (!(sigma > 0)) throw Error("bump width must be positive");
    const double s2 = sigma * sigma;
    RadialField f;
    f.w = [=](double r) { return c * (std::exp(-(r - r0) * (r - r0) / s2) + std::exp(-(r + r0) * (r + r0) / s2)); };
    f.dw = [=](double r) {
        return c * (-2 * (r - r0) / s2 * std::exp(-(r - r0) * (r - r0) / s2) -
                    2 * (r + r0) / s2 * std::exp(-(r + r0) * (r + r0) / s2));
    };
    return f;
}

RadialField zero_field() { return {[](double) { return 0.0; }, [](double) { return 0.0; }}; }

RadialField constant_field(double c) { return {[=](double) { return c; }, [](double) { return 0.0; }}; }

namespace {

struct FirstTerms {
    double dw_phi = 0, pot_phi = 0, mass_phi = 0;  // pieces of the phi derivative
    double grad = 0, pot = 0, mass = 0;            // int w'^2, int |w|^{p+1}, int w^2
    double grad_b = 0, pot_b = 0, mass_b = 0;      // the same against n/2 - r^2/4
};

FirstTerms first_terms(const RadialProfile& pr, const Variation& v, const QuadratureRule& q) {
    const double p = pr.params.p;
    const int n = pr.params.n;
    FirstTerms T;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        double r = q.nodes[i], wt = q.weights[i];
        double w = pr.value(r), d = pr.deriv(r);
        double ph = v.phi.w(r), dph = v.phi.dw(r);
        double aw = std::abs(w);
        double b = 0.5 * n - 0.25 * r * r;
        T.dw_phi += wt * d * dph;
        T.pot_phi += wt * std::pow(aw, p - 1) * w * ph;
        T.mass_phi += wt * w * ph;
        T.grad += wt * d * d;
        T.pot += wt * std::pow(aw, p + 1);
        T.mass += wt * w * w;
        T.grad_b += wt * d * d * b;
        T.pot_b += wt * std::pow(aw, p + 1) * b;
        T.mass_b += wt * w * w * b;
    }
    return T;
}

std::vector<double> first_pieces(const RadialProfile& pr, const Variation& v, const QuadratureRule& q) {
    const double p = pr.params.p;
    auto T = first_terms(pr, v, q);
    const double h = v.h;
    const double q1 = (p + 1) / (p - 1), q2 = 2 / (p - 1);
    // y0 enters through int e(w) (y . y0)/2 rho, which vanishes for radial w
    return {T.dw_phi,
            -T.pot_phi,
            T.mass_phi / (p - 1),
            -h * q1 * 0.5 * T.grad,
            h * q1 * T.pot / (p + 1),
            -h * q2 * T.mass / (2 * (p - 1)),
            h * 0.5 * T.grad_b,
            -h * T.pot_b / (p + 1),
            h * T.mass_b / (2 * (p - 1))};
}

void require_bounded(const RadialProfile& pr) {
    if (!pr.bounded()) throw Error("variations are evaluated for bounded profiles only");
}

double path_F(const RadialProfile& pr, const Variation& v, double s, const Rules& rules) {
    auto base = pr.field();
    RadialField u{[&](double r) { return base.w(r) + s * v.phi.w(r); },
                  [&](double r) { return base.dw(r) + s * v.phi.dw(r); }};
    double x = std::abs(s * v.y0_norm + 0.5 * s * s * v.y0_prime);
    double t = -1.0 + s * v.h + 0.5 * s * s * v.h_prime;
    return f_functional(u, pr.params, x, t, rules);
}

}  // namespace

double first_variation(const RadialProfile& pr, const Variation& v, const Rules& rules) {
    require_bounded(pr);
    double s = 0;
    for (double t : first_pieces(pr, v, rules.radial)) s += t;
    return s;
}

double first_variation(const RadialProfile& pr, const Variation& v) {
    return first_variation(pr, v, default_rules(pr.params.n));
}

double first_variation_scale(const RadialProfile& pr, const Variation& v) {
    require_bounded(pr);
    double m = 0;
    for (double t : first_pieces(pr, v, default_rules(pr.params.n).radial)) m = std::max(m, std::abs(t));
    return m;
}

double second_variation(const RadialProfile& pr, const Variation& v, const Rules& rules, double residual_tol) {
    require_bounded(pr);
    double res = ode_residual(pr);
    if (!(res <= residual_tol)) {
        std::ostringstream os;
        os << "second variation formula needs a solution profile (residual " << res << ")";
        throw Error(os.str());
    }
    const double p = pr.params.p;
    const int n = pr.params.n;
    const auto& q = rules.radial;
    double grad_phi = 0, mass_phi = 0, pot_phi = 0, lam_phi = 0, grad_w = 0, scal = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        double r = q.nodes[i], wt = q.weights[i];
        double w = pr.value(r), d = pr.deriv(r);
        double ph = v.phi.w(r), dph = v.phi.dw(r);
        grad_phi += wt * dph * dph;
        mass_phi += wt * ph * ph;
        pot_phi += wt * std::pow(std::abs(w), p - 1) * ph * ph;
        lam_phi += wt * (2 * w / (p - 1) + r * d) * ph;
        grad_w += wt * d * d;
        double e = w / (p - 1) + 0.5 * r * d;
        scal += wt * e * e;
    }
    const double y2 = v.y0_norm * v.y0_norm;
    return grad_phi + mass_phi / (p - 1) - p * pot_phi + v.h * lam_phi - 0.5 * y2 / n * grad_w - v.h * v.h * scal;
}

double second_variation(const RadialProfile& pr, const Variation& v) {
    return second_variation(pr, v, default_rules(pr.params.n));
}

double general_second_variation_fd(const RadialProfile& pr, const Variation& v, double delta, const Rules& rules) {
    require_bounded(pr);
    if (!(delta >= 1e-5 && delta <= 1e-2)) throw Error("finite-difference step must lie in [1e-5, 1e-2]");
    double fp = path_F(pr, v, delta, rules), f0 = path_F(pr, v, 0.0, rules), fm = path_F(pr, v, -delta, rules);
    return (fp - 2 * f0 + fm) / (delta * delta);
}

double general_second_variation_fd(const RadialProfile& pr, const Variation& v, double delta) {
    return general_second_variation_fd(pr, v, delta, default_rules(pr.params.n));
}

double first_variation_fd(const RadialProfile& pr, const Variation& v, double delta, const Rules& rules) {
    require_bounded(pr);
    return (path_F(pr, v, delta, rules) - path_F(pr, v, -delta, rules)) / (2 * delta);
}

LambdaField lambda_field(const RadialProfile& pr) {
    const double p = pr.params.p;
    LambdaField L;
    L.r = pr.r;
    std::vector<double> d2 = pr.d2w.size() == pr.r.size() ? pr.d2w : differentiate(pr.r, pr.dw);
    double scale = 1.0;
    for (double w : pr.w) scale = std::max(scale, std::abs(w));
    for (std::size_t i = 0; i < pr.r.size(); ++i) {
        double r = pr.r[i];
        L.value.push_back(2 * pr.w[i] / (p - 1) + r * pr.dw[i]);
        L.deriv.push_back((2 / (p - 1) + 1) * pr.dw[i] + r * d2[i]);
    }
    // values at round-off level count as zero (the singular profile has Lambda = 0 exactly)
    const double tol = 1e-10 * scale;
    bool pos = false, neg = false;
    for (double x : L.value) {
        pos = pos || x > tol;
        neg = neg || x < -tol;
    }
    L.sign_change = pos && neg;
    return L;
}

StabilityReport stability_report(const RadialProfile& pr, const EigenResult& radial, double tol) {
    if (radial.ell != 0 || radial.eigenvalues.empty()) throw Error("stability report needs the radial sector spectrum");
    const double p = pr.params.p;
    const int n = pr.params.n;
    StabilityReport S;
    S.lambda1 = radial.eigenvalues[0];
    S.lambda2 = radial.eigenvalues.size() > 1 ? radial.eigenvalues[1] : NAN;
    if (pr.kind == ProfileKind::ConstantZero) {
        S.verdict = S.lambda1 >= -tol ? "stable" : "unstable";
        S.note = "w = 0: Lambda vanishes, the form reduces to int phi'^2 + phi^2/(p-1) minus non-positive path terms "
                 "with no coupling, and is non-negative for the optimal (h, y0) = 0";
        return S;
    }
    if (pr.kind == ProfileKind::ConstantKappa) {
        // Q(phi) + h 2k/(p-1) <phi> - h^2 k^2/(p-1)^2 is maximal at h = (p-1)/k <phi>, leaving
        // Q(phi) + <phi>^2 whose minimum over unit phi is min(0, lambda2)
        S.optimal_h_coeff = (p - 1) / pr.params.kappa * pr.sign;
        double m = std::min(0.0, S.lambda2);
        S.verdict = m >= -tol ? "stable modulo translations" : "unstable";
        S.note = "constant profile: the mean mode (lambda = -1) is cancelled by the optimal h; the remaining radial "
                 "form is bounded below by lambda2; non-radial modes are absorbed by y0";
        return S;
    }
    if (std::abs(S.lambda1 + 1) <= tol) {
        S.verdict = "marginal";
        S.note = "lambda1 within tolerance of -1; no claim";
        return S;
    }
    if (S.lambda1 > -1) {
        S.verdict = "stable";
        S.note = "no radial eigenvalue below -1";
        return S;
    }
    S.verdict = "unstable";
    S.r = radial.r;
    S.f = radial.functions[0];
    std::vector<double> lam(S.r.size()), dw(S.r.size());
    for (std::size_t i = 0; i < S.r.size(); ++i) {
        double r = S.r[i];
        lam[i] = 2 * pr.value(r) / (p - 1) + r * pr.deriv(r);
        dw[i] = pr.deriv(r);
    }
    S.inner_lambda = omega_inner(n, S.r, S.f, lam);
    // <f, w' y_1/r>: radial part times the sphere average of the first coordinate
    auto ang = angular_rule(n);
    double first_moment = 0;
    for (std::size_t i = 0; i < ang.nodes.size(); ++i) first_moment += ang.weights[i] * ang.nodes[i];
    S.inner_translation = omega_inner(n, S.r, S.f, dw) * first_moment;
    // second variation along f with unit h and y0
    auto r = std::make_shared<std::vector<double>>(S.r);
    auto f = std::make_shared<std::vector<double>>(S.f);
    auto df = std::make_shared<std::vector<double>>(differentiate(S.r, S.f));
    Variation v;
    v.phi.w = [=](double x) { double a, b; HermiteTable{r.get(), f.get(), df.get()}.eval(x, a, b); return a; };
    v.phi.dw = [=](double x) { double a, b; HermiteTable{r.get(), f.get(), df.get()}.eval(x, a, b); return b; };
    v.h = 1.0;
    v.y0_norm = 1.0;
    auto rules = default_rules(n);
    S.second_variation_value = second_variation(pr, v, rules, 1e-6);
    double norm2 = weighted_integral(rules.radial, [&](double x) { double a = v.phi.w(x); return a * a; });
    S.bound = S.lambda1 * norm2;
    S.note = "radial ground state below -1 is orthogonal to Lambda(w) and to translations, so the second "
             "variation along it is at most lambda1 ||f||^2 < 0 for every (h, y0)";
    return S;
}

}  // namespace selfsim
