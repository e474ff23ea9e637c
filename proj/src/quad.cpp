#include "selfsim/quad.hpp"

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <memory>
#include <numeric>

namespace selfsim {

namespace {

struct FixedRule {
    std::vector<double> x, w;
};

FixedRule gsl_fixed(const gsl_integration_fixed_type* type, int N, double a, double b, double alpha,
                    double beta) {
    std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
        gsl_integration_fixed_alloc(type, std::size_t(N), a, b, alpha, beta), gsl_integration_fixed_free);
    if (!ws) throw Error("quadrature rule construction failed");
    const double* x = gsl_integration_fixed_nodes(ws.get());
    const double* w = gsl_integration_fixed_weights(ws.get());
    return {std::vector<double>(x, x + N), std::vector<double>(w, w + N)};
}

void finish(QuadratureRule& q) {
    q.mass_error = std::abs(std::accumulate(q.weights.begin(), q.weights.end(), 0.0) - 1.0);
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0) || !std::isfinite(x)) throw Error("log_gamma requires x > 0");
    return gsl_sf_lngamma(x);
}

QuadratureRule power_rule(int n, double gamma, int N) {
    if (n < 1 || N < 2) throw Error("power_rule requires n >= 1 and N >= 2");
    double a = 0.5 * (n - gamma) - 1.0;
    if (!(a > -1.0)) throw Error("power_rule: r^{-gamma} rho is not integrable at the origin");
    auto g = gsl_fixed(gsl_integration_fixed_laguerre, N, 0.0, 1.0, a, 0.0);
    QuadratureRule q;
    q.kind = RuleKind::RadialGauss;
    q.n_dim = n;
    q.power = gamma;
    q.exact_degree = 2 * (2 * N - 1);
    double scale = std::exp(-gamma * std::log(2.0) - log_gamma(0.5 * n));
    for (int i = 0; i < N; ++i) {
        q.nodes.push_back(2.0 * std::sqrt(g.x[i]));
        q.weights.push_back(g.w[i] * scale);
    }
    q.note = "generalized Gauss-Laguerre, s = r^2/4";
    finish(q);
    return q;
}

QuadratureRule radial_rule(int n, int N) { return power_rule(n, 0.0, N); }

QuadratureRule composite_rule(int n, int panels, int order, double r_max) {
    if (n < 1 || panels < 1 || order < 2 || !(r_max > 0)) throw Error("bad composite rule request");
    auto g = gsl_fixed(gsl_integration_fixed_legendre, order, -1.0, 1.0, 0.0, 0.0);
    QuadratureRule q;
    q.kind = RuleKind::RadialComposite;
    q.n_dim = n;
    const double lc = std::log(2.0) * (1 - n) - log_gamma(0.5 * n);
    const double h = r_max / panels;
    // first panel split geometrically toward the origin so narrow cores are resolved
    std::vector<double> edges{0.0};
    for (int j = 12; j >= 1; --j) edges.push_back(h * std::ldexp(1.0, -j));
    for (int k = 1; k <= panels; ++k) edges.push_back(k * h);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double a = edges[k], w = edges[k + 1] - edges[k];
        for (int i = 0; i < order; ++i) {
            double r = a + 0.5 * w * (g.x[i] + 1.0);
            q.nodes.push_back(r);
            q.weights.push_back(0.5 * w * g.w[i] * std::exp(lc + (n - 1) * std::log(r) - 0.25 * r * r));
        }
    }
    q.note = "composite Gauss-Legendre";
    finish(q);
    return q;
}

QuadratureRule angular_rule(int n, int N) {
    QuadratureRule q;
    q.kind = RuleKind::AngularLegendre;
    q.n_dim = n;
    if (n == 1) {
        q.nodes = {-1.0, 1.0};
        q.weights = {0.5, 0.5};
        return q;
    }
    if (N < 2) throw Error("angular rule needs at least two nodes");
    auto g = gsl_fixed(gsl_integration_fixed_gegenbauer, N, -1.0, 1.0, 0.5 * (n - 3), 0.0);
    double s = std::accumulate(g.w.begin(), g.w.end(), 0.0);
    q.nodes = g.x;
    for (double w : g.w) q.weights.push_back(w / s);
    q.exact_degree = 2 * N - 1;
    q.note = "Gauss-Gegenbauer in cos(theta)";
    finish(q);
    return q;
}

double weighted_integral(const QuadratureRule& rule, const RadialFn& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double v = f(rule.nodes[i]);
        if (!std::isfinite(v))
            throw Error("integrand not finite at node r = " + std::to_string(rule.nodes[i]));
        s += rule.weights[i] * v;
    }
    return s;
}

std::vector<std::pair<double, double>> offset_points(const QuadratureRule& rule_r,
                                                     const QuadratureRule& rule_ang, double x0,
                                                     double t0) {
    if (!(t0 < 0)) throw Error("offset integral requires t0 < 0");
    x0 = std::abs(x0);
    std::vector<std::pair<double, double>> pts;
    const double sc = std::sqrt(-t0);
    if (x0 == 0.0) {
        for (std::size_t i = 0; i < rule_r.nodes.size(); ++i)
            pts.emplace_back(sc * rule_r.nodes[i], rule_r.weights[i]);
        return pts;
    }
    pts.reserve(rule_r.nodes.size() * rule_ang.nodes.size());
    for (std::size_t i = 0; i < rule_r.nodes.size(); ++i) {
        double r = sc * rule_r.nodes[i];
        for (std::size_t j = 0; j < rule_ang.nodes.size(); ++j) {
            double d2 = x0 * x0 + r * r + 2.0 * x0 * r * rule_ang.nodes[j];
            pts.emplace_back(std::sqrt(std::max(d2, 0.0)), rule_r.weights[i] * rule_ang.weights[j]);
        }
    }
    return pts;
}

namespace {

// kappa^{-nu} I_nu(kappa) e^{-kappa}, nu = n/2 - 1: the sphere average of e^{kappa u} up to |S^{n-1}|
double sphere_factor(int n, double k) {
    if (n == 1) return 0.5 * (1.0 + std::exp(-2.0 * k));
    const double nu = 0.5 * n - 1.0;
    const double lim = std::exp(-nu * std::log(2.0) - log_gamma(nu + 1.0));
    if (k < 1e-6) return lim * std::exp(-k) * (1.0 + k * k / (4.0 * (nu + 1.0)));
    double I = n == 2 ? gsl_sf_bessel_I0_scaled(k) : gsl_sf_bessel_Inu_scaled(nu, k);
    return std::exp(-nu * std::log(k)) * I;
}

}  // namespace

QuadratureRule offset_kernel_rule(int n, double x0, double t0, int order) {
    if (n < 1 || order < 2) throw Error("bad offset rule request");
    if (!(t0 < 0)) throw Error("offset integral requires t0 < 0");
    x0 = std::abs(x0);
    const double a = -t0, sa = std::sqrt(a);
    const double L = 13.0 * sa;
    double lo = std::max(0.0, x0 - L);
    const double hi = x0 + L;
    std::vector<double> edges;
    if (lo < 0.5) {
        // the core of the integrand may sit at the origin
        lo = 0.0;
        double c = std::min({1.0, hi, sa});
        edges.push_back(0.0);
        for (int j = 24; j >= 1; --j) edges.push_back(c * std::ldexp(1.0, -j));
        lo = c;
    }
    for (double R = lo; R < hi;) {
        edges.push_back(R);
        R += std::min(0.5 * sa, std::max(0.25, 0.1 * R));
    }
    edges.push_back(hi);
    auto g = gsl_fixed(gsl_integration_fixed_legendre, order, -1.0, 1.0, 0.0, 0.0);
    // (4 pi a)^{-n/2} |S^{n-1}| / |S^{n-1}|-normalized factor: (2a)^{-n/2} (n = 1 counts both points)
    const double pre = n == 1 ? 2.0 * std::pow(4.0 * M_PI * a, -0.5) : std::pow(2.0 * a, -0.5 * n);
    QuadratureRule q;
    q.kind = RuleKind::RadialComposite;
    q.n_dim = n;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double e0 = edges[k], w = edges[k + 1] - edges[k];
        if (!(w > 0)) continue;
        for (int i = 0; i < order; ++i) {
            double R = e0 + 0.5 * w * (g.x[i] + 1.0);
            double ker = pre * std::pow(R, n - 1) * std::exp(-(R - x0) * (R - x0) / (4.0 * a)) *
                         sphere_factor(n, R * x0 / (2.0 * a));
            q.nodes.push_back(R);
            q.weights.push_back(0.5 * w * g.w[i] * ker);
        }
    }
    q.note = "offset Gaussian kernel, closed-form angular average";
    finish(q);
    return q;
}

double offset_integral(const QuadratureRule& rule_r, const QuadratureRule& rule_ang, const RadialFn& f,
                       double x0, double t0) {
    double s = 0.0;
    for (auto [r, w] : offset_points(rule_r, rule_ang, x0, t0)) {
        double v = f(r);
        if (!std::isfinite(v)) throw Error("integrand not finite at |y| = " + std::to_string(r));
        s += w * v;
    }
    return s;
}

CertifiedIntegral integrate_certified(int n, const RadialFn& f, int panels) {
    double a = weighted_integral(composite_rule(n, panels), f);
    double b = weighted_integral(composite_rule(n, 2 * panels), f);
    double scale = std::max(std::abs(b), 1e-300);
    return {b, std::abs(b - a) / scale};
}

}  // namespace selfsim
