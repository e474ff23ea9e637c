#include "selfsim/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "selfsim/quad.hpp"
#include "selfsim/shoot.hpp"

namespace selfsim {

namespace {

double log_cn(int n) { return std::log(2.0) * (1 - n) - log_gamma(0.5 * n); }

// Gaussian density of the radial measure, c_n r^{n-1} e^{-r^2/4}
double density(int n, double r) {
    if (r <= 0) return n == 1 ? std::exp(log_cn(1)) : 0.0;
    return std::exp(log_cn(n) + (n - 1) * std::log(r) - 0.25 * r * r);
}

}  // namespace

SectorOperator build_sector(const RadialProfile& pr, int ell, int resolution, double r_max) {
    if (!pr.bounded()) throw Error("singular profiles are outside the scope of the eigensolver");
    if (ell < 0) throw Error("sector index must be non-negative");
    if (resolution < 16) throw Error("resolution must be at least 16");
    if (!(r_max > 1)) throw Error("r_max must exceed 1");
    const auto& par = pr.params;
    const int n = par.n;
    const double p = par.p;
    SectorOperator op;
    op.ell = ell;
    op.cells = resolution;
    op.params = par;
    op.r_max = r_max;
    // the map resolves the core, whose width is set by the largest potential
    double vmax = 0.0;
    for (double w : pr.w) vmax = std::max(vmax, p * std::pow(std::abs(w), p - 1));
    op.scale = std::min(1.0, 3.0 / std::sqrt(1.0 + vmax));
    const double s = op.scale;
    const double xi_max = std::asinh(r_max / s);
    const double h = xi_max / resolution;
    const int N = resolution;
    op.r.resize(N);
    op.mass.resize(N);
    op.potential.resize(N);
    std::vector<double> K_diag(N, 0.0), K_off(N - 1, 0.0);
    const double cent = double(ell) * (ell + n - 2);
    for (int i = 0; i < N; ++i) {
        double xi = (i + 0.5) * h;
        double r = s * std::sinh(xi);
        op.r[i] = r;
        op.mass[i] = density(n, r) * s * std::cosh(xi) * h;
        double w = pr.value(r);
        op.potential[i] = p * std::pow(std::abs(w), p - 1);
        double V = cent / (r * r) + 1.0 / (p - 1) - op.potential[i];
        K_diag[i] += V * op.mass[i];
    }
    for (int i = 0; i + 1 < N; ++i) {
        double xi = (i + 1) * h;
        double r = s * std::sinh(xi);
        double a = density(n, r) / (s * std::cosh(xi)) / h;
        K_diag[i] += a;
        K_diag[i + 1] += a;
        K_off[i] = -a;
    }
    op.diag.resize(N);
    op.off.resize(N - 1);
    for (int i = 0; i < N; ++i) op.diag[i] = K_diag[i] / op.mass[i];
    for (int i = 0; i + 1 < N; ++i) op.off[i] = K_off[i] / std::sqrt(op.mass[i] * op.mass[i + 1]);
    return op;
}

double symmetry_defect(const SectorOperator& op) {
    // A = M^{-1} K; <e_i, A e_j>_M = K_ij, rebuilt from the stored symmetric form
    double worst = 0.0, scale = 0.0;
    for (double d : op.diag) scale = std::max(scale, std::abs(d));
    for (std::size_t i = 0; i + 1 < op.r.size(); ++i) {
        double mi = op.mass[i], mj = op.mass[i + 1];
        double Aij = op.off[i] * std::sqrt(mj / mi);  // (M^{-1} K)_{i,i+1}
        double Aji = op.off[i] * std::sqrt(mi / mj);
        double lhs = mi * Aij, rhs = mj * Aji;
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
    return scale > 0 ? worst : 0.0;
}

EigenResult eigen_smallest(const SectorOperator& op, int k) {
    const int N = op.cells;
    if (k < 1 || k > N / 4) throw Error("requested eigenpair count must lie in [1, resolution/4]");
    std::vector<double> d = op.diag, e = op.off;
    std::vector<double> w(N), z(std::size_t(N) * k);
    std::vector<lapack_int> ifail(N);
    lapack_int m = 0;
    lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', N, d.data(), e.data(), 0.0, 0.0, 1, k,
                                     2 * LAPACKE_dlamch('S'), &m, w.data(), z.data(), N, ifail.data());
    if (info != 0 || m != k) {
        std::ostringstream os;
        os << "tridiagonal eigensolver did not converge (info " << info << ", " << m << " of " << k << " pairs)";
        throw Error(os.str());
    }
    EigenResult R;
    R.ell = op.ell;
    R.resolution = N;
    R.r = op.r;
    for (int j = 0; j < k; ++j) {
        R.eigenvalues.push_back(w[j]);
        std::vector<double> f(N);
        std::size_t imax = 0;
        for (int i = 0; i < N; ++i) {
            f[i] = z[std::size_t(j) * N + i] / std::sqrt(op.mass[i]);
            if (std::abs(f[i]) > std::abs(f[imax])) imax = i;
        }
        double sg = 1.0;
        if (j == 0) {
            double sum = 0;
            for (int i = 0; i < N; ++i) sum += f[i] * op.mass[i];
            sg = sum < 0 ? -1.0 : 1.0;
        } else if (f[imax] < 0) {
            sg = -1.0;
        }
        for (double& v : f) v *= sg;
        R.functions.push_back(std::move(f));
        R.certificates.push_back(NAN);
    }
    for (double l : R.eigenvalues) {
        if (l < -1) ++R.below_minus_one;
        if (l < 1) ++R.below_one;
    }
    return R;
}

EigenResult sector_spectrum(const RadialProfile& pr, int ell, int k, int resolution, double r_max) {
    auto e1 = eigen_smallest(build_sector(pr, ell, resolution, r_max), k);
    auto e2 = eigen_smallest(build_sector(pr, ell, 2 * resolution, r_max), k);
    auto e4 = eigen_smallest(build_sector(pr, ell, 4 * resolution, r_max), k);
    EigenResult R = e4;
    R.below_minus_one = R.below_one = 0;
    for (int j = 0; j < k; ++j) {
        // second-order scheme: Richardson on consecutive doublings
        double x12 = (4 * e2.eigenvalues[j] - e1.eigenvalues[j]) / 3;
        double x24 = (4 * e4.eigenvalues[j] - e2.eigenvalues[j]) / 3;
        R.eigenvalues[j] = x24;
        R.certificates[j] = std::abs(x24 - x12);
        if (x24 < -1) ++R.below_minus_one;
        if (x24 < 1) ++R.below_one;
    }
    return R;
}

double rayleigh_quotient(const SectorOperator& op, const std::vector<double>& u) {
    if (u.size() != op.r.size()) throw Error("grid mismatch in Rayleigh quotient");
    // v = M^{1/2} u, quotient v.Bv / v.v
    const std::size_t N = u.size();
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = std::sqrt(op.mass[i]) * u[i];
    double num = 0, den = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double Bv = op.diag[i] * v[i];
        if (i > 0) Bv += op.off[i - 1] * v[i - 1];
        if (i + 1 < N) Bv += op.off[i] * v[i + 1];
        num += v[i] * Bv;
        den += v[i] * v[i];
    }
    return num / den;
}

std::vector<double> apply_L(const RadialProfile& pr, const std::vector<double>& r, const std::vector<double>& psi,
                            const std::vector<double>& dpsi, int ell) {
    if (r.size() != psi.size() || r.size() != dpsi.size()) throw Error("apply_L: size mismatch");
    const int n = pr.params.n;
    const double p = pr.params.p;
    auto d2 = differentiate(r, dpsi);
    std::vector<double> out(r.size());
    const double cent = double(ell) * (ell + n - 2);
    for (std::size_t i = 0; i < r.size(); ++i) {
        double x = r[i];
        double w = pr.value(x);
        out[i] = d2[i] + ((n - 1) / x - 0.5 * x) * dpsi[i] - cent / (x * x) * psi[i] - psi[i] / (p - 1) +
                 p * std::pow(std::abs(w), p - 1) * psi[i];
    }
    return out;
}

double omega_inner(int n, const std::vector<double>& r, const std::vector<double>& f, const std::vector<double>& g) {
    if (r.size() != f.size() || r.size() != g.size()) throw Error("omega_inner: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        double a = density(n, r[i]) * f[i] * g[i], b = density(n, r[i + 1]) * f[i + 1] * g[i + 1];
        s += 0.5 * (r[i + 1] - r[i]) * (a + b);
    }
    return s;
}

double omega_norm(int n, const std::vector<double>& r, const std::vector<double>& f) {
    return std::sqrt(omega_inner(n, r, f, f));
}

FirstEigen first_eigenfunction(const RadialProfile& pr, int resolution, double r_max) {
    auto R = sector_spectrum(pr, 0, 1, resolution, r_max);
    FirstEigen F;
    F.lambda1 = R.eigenvalues[0];
    F.certificate = R.certificates[0];
    F.r = R.r;
    F.f = R.functions[0];
    // ground states do not change sign; tiny negative round-off in the far tail is tolerated
    double fmax = *std::max_element(F.f.begin(), F.f.end());
    for (double v : F.f)
        if (v < -1e-10 * fmax) throw Error("computed ground state changes sign (discretization failure)");
    const double p = pr.params.p;
    for (std::size_t i = 0; i < F.r.size(); ++i)
        if (F.r[i] >= 0.5 * r_max)
            F.decay_sup = std::max(F.decay_sup, std::pow(1 + F.r[i], 2 * p / (p - 1)) * std::abs(F.f[i]));
    return F;
}

}  // namespace selfsim
