#pragma once

#include <string>
#include <vector>

#include "selfsim/profile.hpp"

namespace selfsim {

enum class Classification { Decaying, SignChanging, Growing, Inconclusive, InconclusiveConstant };

std::string to_string(Classification c);

struct OdeTrajectory {
    Parameters params;
    double a = 0.0;
    std::vector<double> r, w, dw;
    Classification cls = Classification::Inconclusive;
    double r_end = 0.0;
    double tol = 1e-12;
    std::string diagnostic;
};

struct ShootConfig {
    double r_max = 16.0;
    double tol = 1e-12;
    double eps = 1e-4;           // Taylor start radius
    double cap_factor = 10.0;    // Growing once |w| > cap_factor * max(|a|, kappa)
    double tail_window = 0.25;   // fraction of the range used by the decay monitor
    double flatness = 0.01;
    double match_radius = 3.0;   // forward/backward matching point
    double tail_radius = 30.0;   // start of the backward integration
    double residual_tol = 1e-7;
};

OdeTrajectory integrate_radial(const Parameters& par, double a, const ShootConfig& cfg = {});
OdeTrajectory integrate_radial(const Parameters& par, double a, double r_max, double tol);

Classification classify(const OdeTrajectory& traj, const ShootConfig& cfg = {});

// Samples of a profile viewed as a trajectory (for classification).
OdeTrajectory trajectory_from_profile(const RadialProfile& profile);

struct ShootDiagnostics {
    double a_bisect = 0.0;
    double a_match = 0.0;
    double C = 0.0;
    double match_mismatch = 0.0;
    double residual = 0.0;
    int bisect_iterations = 0;
    int newton_iterations = 0;
};

// Bisection on a to the classification boundary, then a forward/backward
// matching refinement onto a decaying solution.
RadialProfile shoot(const Parameters& par, double a_lo, double a_hi, double bisect_tol = 1e-13,
                    const ShootConfig& cfg = {}, ShootDiagnostics* diag = nullptr);

// sup over interior grid points of the profile-equation residual.
double ode_residual(const RadialProfile& profile);

struct Bracket {
    double a_lo, a_hi;
    Classification c_lo, c_hi;
};

struct ScanReport {
    std::vector<Bracket> brackets;
    std::vector<RadialProfile> profiles;
    std::vector<ShootDiagnostics> diagnostics;
    std::vector<std::string> rejected;  // bracket -> reason
};

ScanReport scan_profiles(const Parameters& par, double a_min, double a_max, int samples = 200,
                         const ShootConfig& cfg = {});

// Finite-difference weights for derivative `m` at x0 on nodes x (Fornberg).
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m);

// High-order derivative of tabulated data on a non-uniform grid (7-point stencils).
std::vector<double> differentiate(const std::vector<double>& r, const std::vector<double>& f);

}  // namespace selfsim
