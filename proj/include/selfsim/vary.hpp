#pragma once

#include <string>
#include <vector>

#include "selfsim/func.hpp"
#include "selfsim/profile.hpp"
#include "selfsim/spectrum.hpp"

namespace selfsim {

// A variation through the canonical point (x0, t0) = (0, -1):
//   u(s) = w + s phi,  x(s) = (s y0 + s^2 y0'/2) e,  t(s) = -1 + s h + s^2 h'/2.
struct Variation {
    RadialField phi;
    double h = 0.0;
    double y0_norm = 0.0;
    double h_prime = 0.0;
    double y0_prime = 0.0;
};

// Symmetrized Gaussian bump c (e^{-(r-r0)^2/s^2} + e^{-(r+r0)^2/s^2}), smooth through the origin.
RadialField gaussian_bump(double c, double r0, double sigma);
RadialField zero_field();
RadialField constant_field(double c);

// d/ds F_{x(s),t(s)}(w + s phi) at s = 0, term by term.
double first_variation(const RadialProfile& profile, const Variation& v, const Rules& rules);
double first_variation(const RadialProfile& profile, const Variation& v);

// Largest single term of the first variation, the scale for its tolerance.
double first_variation_scale(const RadialProfile& profile, const Variation& v);

// Closed form of the second derivative at a solution profile (radial phi).
double second_variation(const RadialProfile& profile, const Variation& v, const Rules& rules,
                        double residual_tol = 1e-6);
double second_variation(const RadialProfile& profile, const Variation& v);

// Centered second difference of s -> F_{x(s),t(s)}(w + s phi).
double general_second_variation_fd(const RadialProfile& profile, const Variation& v, double delta,
                                   const Rules& rules);
double general_second_variation_fd(const RadialProfile& profile, const Variation& v, double delta = 1e-3);

// Centered first difference, the oracle for first_variation off solutions.
double first_variation_fd(const RadialProfile& profile, const Variation& v, double delta, const Rules& rules);

struct LambdaField {
    std::vector<double> r, value, deriv;
    bool sign_change = false;
};
// Lambda(w) = 2w/(p-1) + r w' on the profile grid.
LambdaField lambda_field(const RadialProfile& profile);

struct StabilityReport {
    std::string verdict;  // "unstable", "stable", "stable modulo translations", "marginal"
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    // destabilizing direction (radial ground state) and its certificates
    std::vector<double> r, f;
    double inner_lambda = 0.0;       // <f, Lambda(w)>_omega
    double inner_translation = 0.0;  // <f, d_1 w>_omega
    double second_variation_value = 0.0;  // at h = 1, |y0| = 1 with ||f|| = 1
    double bound = 0.0;                   // lambda1 ||f||^2, the bound it must not exceed
    double optimal_h_coeff = 0.0;         // constant profile: h = coeff * int phi rho
    std::string note;
};
StabilityReport stability_report(const RadialProfile& profile, const EigenResult& radial, double tol = 1e-6);

}  // namespace selfsim
