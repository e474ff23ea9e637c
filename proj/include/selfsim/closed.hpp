#pragma once

#include <string>
#include <vector>

#include "selfsim/params.hpp"

namespace selfsim {

// Energy of the singular homogeneous solution via Gamma functions.
double singular_energy(const Parameters& par);

// (1/2 - 1/(p+1)) kappa^{p+1}
double kappa_energy(const Parameters& par);

// LHS - 1 of the normalized gap inequality; positive means E_singular > E_kappa.
double gap_inequality(const Parameters& par);
double gap_lhs(const Parameters& par);

struct PhiValues {
    double phi = 0.0, dphi = 0.0, d2phi = 0.0;
};
// phi(x) = lnGamma(x-1-a) - lnGamma(x) + (1+a) ln(x-1-a/2), the log of the gap ratio at x = n/2.
PhiValues phi_diagnostics(double x, double a);

struct SphereConstant {
    double value = 0.0;
    bool in_uniqueness_range = false;
};
SphereConstant sphere_constant(const Parameters& par);

struct GapScanRow {
    int n = 0;
    double p = 0.0;
    double beta = 0.0;
    double E_singular = 0.0;
    double E_kappa = 0.0;
    double ratio = 0.0;
    double inequality_lhs = 0.0;
    double E_quadrature = 0.0;
    double quad_rel_err = 0.0;
    bool supercritical = false;
    bool gamma_arg_positive = false;
    bool in_uniqueness_range = false;
    bool valid = false;
};

struct GapScan {
    std::vector<GapScanRow> rows;
    int non_positive = 0;
    double worst_quad_rel_err = 0.0;
    double worst_identity_err = 0.0;  // |ratio - lhs| / lhs
};

// p values strictly above the Sobolev exponent of n, log-spaced offsets.
std::vector<double> supercritical_p_grid(int n, int count = 40, double min_offset = 0.05, double max_offset = 20.0);

GapScan gap_scan(const std::vector<int>& n_values, const std::vector<double>& p_grid);
GapScan gap_scan(int n_lo, int n_hi, int p_count = 40);

std::string gap_scan_csv(const GapScan& scan);

}  // namespace selfsim
