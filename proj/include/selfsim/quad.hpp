#pragma once

#include <string>
#include <utility>
#include <vector>

#include "selfsim/profile.hpp"

namespace selfsim {

enum class RuleKind { RadialGauss, RadialComposite, AngularLegendre };

// Nodes and weights such that sum_i weights[i] f(nodes[i]) approximates the
// Gaussian average of the radial function f over R^n (angular rules: the
// average over the unit sphere of a function of the polar cosine).
struct QuadratureRule {
    RuleKind kind = RuleKind::RadialGauss;
    std::vector<double> nodes;
    std::vector<double> weights;
    int n_dim = 3;
    int exact_degree = 0;        // highest even power r^k integrated exactly (RadialGauss)
    double mass_error = 0.0;     // |sum of weights - 1|
    double power = 0.0;          // extra weight r^{-power} absorbed into the rule
    std::string note;
};

// Generalized Gauss-Laguerre in s = r^2/4: exact for polynomials in r^2 of degree < 2N.
QuadratureRule radial_rule(int n, int N);

// Gauss-Laguerre rule for the weight r^{-gamma} rho; integrates power-law singular integrands.
QuadratureRule power_rule(int n, double gamma, int N);

// Composite Gauss-Legendre panels on [0, r_max] with the Gaussian weight folded in.
QuadratureRule composite_rule(int n, int panels = 96, int order = 10, double r_max = 24.0);

// Gauss-Gegenbauer rule in u = cos(theta) for the weight (1-u^2)^{(n-3)/2}, normalized to 1.
QuadratureRule angular_rule(int n, int N = 48);

double weighted_integral(const QuadratureRule& rule, const RadialFn& f);

// (|y|, weight) pairs discretizing integration against G(y - x0, t0) dy.
std::vector<std::pair<double, double>> offset_points(const QuadratureRule& rule_r,
                                                     const QuadratureRule& rule_ang, double x0_norm,
                                                     double t0);

double offset_integral(const QuadratureRule& rule_r, const QuadratureRule& rule_ang, const RadialFn& f,
                       double x0_norm, double t0);

// Radial rule for the same integral with the angular average of the Gaussian done in closed form
// (a modified Bessel function): sum_i weights[i] f(nodes[i]) = int f(|y|) G(y - x0, t0) dy. The
// panels follow the kernel and refine geometrically toward the origin, so narrow cores at distance
// |x0| from the kernel center stay resolved.
QuadratureRule offset_kernel_rule(int n, double x0_norm, double t0, int order = 16);

struct CertifiedIntegral {
    double value = 0.0;
    double doubling_change = 0.0;  // relative change from `panels` to 2*`panels`
};
CertifiedIntegral integrate_certified(int n, const RadialFn& f, int panels = 96);

double log_gamma(double x);

}  // namespace selfsim
