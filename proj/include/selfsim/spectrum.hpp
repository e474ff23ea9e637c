#pragma once

#include <vector>

#include "selfsim/profile.hpp"

namespace selfsim {

// Finite-volume discretization of the sector operator
//   L_l u = u'' + ((n-1)/r - r/2) u' - l(l+n-2)/r^2 u - u/(p-1) + p|w|^{p-1} u
// on cells of the map r = s sinh(xi), zero flux at both ends. The generalized
// problem K u = lambda M u (M diagonal) is stored in symmetric tridiagonal form.
struct SectorOperator {
    int ell = 0;
    int cells = 0;
    Parameters params;
    double scale = 1.0;  // s in r = s sinh(xi)
    double r_max = 20.0;
    std::vector<double> r;          // cell centers
    std::vector<double> mass;       // M_i, Gaussian measure of cell i
    std::vector<double> potential;  // p |w|^{p-1} at the centers
    std::vector<double> diag;       // M^{-1/2} K M^{-1/2}, diagonal
    std::vector<double> off;        // and first off-diagonal
};

SectorOperator build_sector(const RadialProfile& profile, int ell, int resolution = 1000, double r_max = 20.0);

// max over neighbours of |<e_i, A e_j>_M - <A e_i, e_j>_M|, relative to the largest entry
double symmetry_defect(const SectorOperator& op);

// Eigenpairs in the convention L f + lambda f = 0, lambda ascending.
struct EigenResult {
    int ell = 0;
    std::vector<double> eigenvalues;
    std::vector<double> r;
    std::vector<std::vector<double>> functions;  // int f^2 rho = 1, ground state positive
    std::vector<double> certificates;            // value shift under resolution doubling
    int resolution = 0;
    int below_minus_one = 0;  // eigenvalues < -1 among those computed
    int below_one = 0;        // eigenvalues < 1 among those computed
};

// k smallest eigenpairs of a single discretization
EigenResult eigen_smallest(const SectorOperator& op, int k);

// Eigenvalues extrapolated from resolutions N, 2N, 4N; the certificate is the
// change of the extrapolated value when the coarsest level is dropped.
EigenResult sector_spectrum(const RadialProfile& profile, int ell, int k, int resolution = 1000,
                            double r_max = 20.0);

// Rayleigh quotient of grid values u (cell centers of op) for the discrete operator.
double rayleigh_quotient(const SectorOperator& op, const std::vector<double>& u);

// Pointwise L_l psi; psi'' is obtained from dpsi by high-order differencing.
std::vector<double> apply_L(const RadialProfile& profile, const std::vector<double>& r,
                            const std::vector<double>& psi, const std::vector<double>& dpsi, int ell);

// (int f^2 rho)^{1/2} for grid samples, trapezoidal in r.
double omega_norm(int n, const std::vector<double>& r, const std::vector<double>& f);
double omega_inner(int n, const std::vector<double>& r, const std::vector<double>& f, const std::vector<double>& g);

struct FirstEigen {
    double lambda1 = 0.0;
    double certificate = 0.0;
    std::vector<double> r, f;
    double decay_sup = 0.0;  // sup over r >= r_max/2 of (1+r)^{2p/(p-1)} |f|
};
FirstEigen first_eigenfunction(const RadialProfile& profile, int resolution = 1000, double r_max = 20.0);

}  // namespace selfsim
