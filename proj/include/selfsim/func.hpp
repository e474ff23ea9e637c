#pragma once

#include <optional>
#include <vector>

#include "selfsim/profile.hpp"
#include "selfsim/quad.hpp"

namespace selfsim {

struct Rules {
    QuadratureRule radial;
    QuadratureRule angular;
};
Rules default_rules(int n);

struct FunctionalReport {
    double energy = 0.0;
    double gradient = 0.0;   // (1/2) int |grad w|^2 rho
    double mass = 0.0;       // 1/(2(p-1)) int w^2 rho
    double potential = 0.0;  // 1/(p+1) int |w|^{p+1} rho
    double energy_shortcut = 0.0;  // (1/2 - 1/(p+1)) int |w|^{p+1} rho
    bool forms_disagree = false;

    // identity residuals, each relative to its largest constituent integral
    double pohozaev = 0.0;
    double inte1 = 0.0;
    double eq10 = 0.0;
    double testfunction = 0.0;
    double pohozaev_abs = 0.0, inte1_abs = 0.0, eq10_abs = 0.0, testfunction_abs = 0.0;
};

// The three Gaussian integrals entering F at (x0, t0).
struct FIntegrals {
    double grad = 0.0;  // int |grad w|^2 G
    double pot = 0.0;   // int |w|^{p+1} G
    double mass = 0.0;  // int w^2 G
};
FIntegrals f_integrals(const RadialField& f, const Parameters& par, double x0, double t0, const Rules& rules);
double f_combine(const FIntegrals& I, double p, double t0);

FunctionalReport energy(const RadialProfile& profile, const QuadratureRule& rule);
FunctionalReport energy(const RadialProfile& profile);
FunctionalReport energy(const RadialField& f, const Parameters& par, const QuadratureRule& rule);

double f_functional(const RadialField& f, const Parameters& par, double x0, double t0, const Rules& rules);
double f_functional(const RadialProfile& profile, double x0, double t0, const Rules& rules);
double f_functional(const RadialProfile& profile, double x0, double t0);

struct EntropyConfig {
    double x0_max = 10.0;
    double logt_min = -6.0, logt_max = 6.0;
    int nx = 21, nt = 25;
    double refine_tol = 1e-7;
    double ring_eps = 0.5;
};

struct EntropyResult {
    double lambda = 0.0;
    double x0 = 0.0, t0 = -1.0;
    std::vector<double> grid_x0, grid_logt;
    std::vector<double> grid_F;  // row-major over (x0, logt)
    double delta_ring = 0.0;     // lambda - max F on the ring |x0| + |log(-t0)| = eps
    double delta_t = 0.0;        // lambda - max F at (0, -e^{+-eps})
    double delta_x = 0.0;        // lambda - F at (eps, -1)
    bool unconverged_sup = false;
};

EntropyResult entropy(const RadialField& f, const Parameters& par, const EntropyConfig& cfg, const Rules& rules);
EntropyResult entropy(const RadialProfile& profile, const EntropyConfig& cfg = {});

FunctionalReport identities(const RadialProfile& profile, const QuadratureRule& rule);
FunctionalReport identities(const RadialProfile& profile);

struct DensityResult {
    double theta = 0.0;
    std::vector<double> s, F;
    bool monotone = true;
    double worst_increase = 0.0;
};
// Theta(x0, 0) from F_{x0/sqrt(-s), -1}(w) as s -> 0^-.
DensityResult density(const RadialProfile& profile, double x0, const std::vector<double>& s_seq);
DensityResult density(const RadialProfile& profile, double x0);

// F along the monotone path through (x0, t0) used to show the maximum sits at (0, -1):
// s <= -1 maps to (x/sqrt(-(T+s)), -s/(T+s)) with T = 1 + 1/t0, x = x0/sqrt(-t0).
struct PathResult {
    std::vector<double> s, F;
    double worst_violation = 0.0;  // largest increase of F as s increases
};
PathResult mapped_path(const RadialProfile& profile, double x0, double t0, int K = 12);

}  // namespace selfsim
