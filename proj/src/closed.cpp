#include "selfsim/closed.hpp"
#include "selfsim/parallel.hpp"

#include <gsl/gsl_sf_psi.h>

#include <cmath>
#include <sstream>

#include "selfsim/func.hpp"
#include "selfsim/profile.hpp"
#include "selfsim/quad.hpp"

namespace selfsim {

namespace {
double gamma_arg(const Parameters& par) { return 0.5 * (par.n - 2.0 - 4.0 / (par.p - 1.0)); }
}  // namespace

double singular_energy(const Parameters& par) {
    const double p = par.p, g = gamma_arg(par);
    if (!(g > 0)) throw Error("singular energy: Gamma argument (n-2-4/(p-1))/2 must be positive");
    double l = (-2.0 - 4.0 / (p - 1)) * std::log(2.0) + (p + 1) / (p - 1) * std::log(par.beta) + log_gamma(g) -
               log_gamma(0.5 * par.n);
    return (0.5 - 1.0 / (p + 1)) * std::exp(l);
}

double kappa_energy(const Parameters& par) {
    return (0.5 - 1.0 / (par.p + 1)) * std::pow(par.kappa, par.p + 1);
}

double gap_lhs(const Parameters& par) {
    const double p = par.p, g = gamma_arg(par);
    if (!(g > 0)) throw Error("gap inequality: Gamma argument must be positive");
    double base = 0.5 * (par.n - 2.0) - 1.0 / (p - 1);
    return std::exp((p + 1) / (p - 1) * std::log(base) + log_gamma(g) - log_gamma(0.5 * par.n));
}

double gap_inequality(const Parameters& par) { return gap_lhs(par) - 1.0; }

PhiValues phi_diagnostics(double x, double a) {
    if (!(a > 0)) throw Error("phi: alpha must be positive");
    if (!(x > 1.0 + a)) throw Error("phi: requires x > 1 + alpha");
    PhiValues v;
    double u = x - 1.0 - a, c = x - 1.0 - 0.5 * a;
    v.phi = log_gamma(u) - log_gamma(x) + (1 + a) * std::log(c);
    v.dphi = gsl_sf_psi(u) - gsl_sf_psi(x) + (1 + a) / c;
    v.d2phi = gsl_sf_psi_1(u) - gsl_sf_psi_1(x) - (1 + a) / (c * c);
    return v;
}

SphereConstant sphere_constant(const Parameters& par) {
    if (!(par.beta > 0)) throw Error("sphere constant requires beta > 0");
    SphereConstant s;
    s.value = std::pow(par.beta, 1.0 / (par.p - 1));
    s.in_uniqueness_range = par.n <= 3 || par.p < double(par.n + 1) / double(par.n - 3);
    return s;
}

std::vector<double> supercritical_p_grid(int n, int count, double min_offset, double max_offset) {
    std::vector<double> ps;
    double ps0 = sobolev_exponent(n);
    if (!std::isfinite(ps0)) ps0 = 1.0;
    for (int k = 0; k < count; ++k) {
        double t = count > 1 ? double(k) / (count - 1) : 0.0;
        ps.push_back(ps0 + min_offset * std::pow(max_offset / min_offset, t));
    }
    return ps;
}

GapScan gap_scan(const std::vector<int>& n_values, const std::vector<double>& p_grid) {
    GapScan S;
    for (int n : n_values)
        for (double p : p_grid) {
            GapScanRow row;
            row.n = n;
            row.p = p;
            S.rows.push_back(row);
        }
    // rows are independent
    parallel_for(S.rows.size(), [&](std::size_t i) {
        GapScanRow& row = S.rows[i];
        auto par = make_params(row.n, row.p);
        row.beta = par.beta;
        row.supercritical = row.n >= 3 && row.p > sobolev_exponent(row.n);
        row.gamma_arg_positive = gamma_arg(par) > 0;
        row.valid = row.supercritical && row.gamma_arg_positive && par.beta > 0;
        if (!row.valid) return;
        row.in_uniqueness_range = sphere_constant(par).in_uniqueness_range;
        row.E_singular = singular_energy(par);
        row.E_kappa = kappa_energy(par);
        row.ratio = row.E_singular / row.E_kappa;
        row.inequality_lhs = gap_lhs(par);
        row.E_quadrature = energy(singular_profile(par)).energy;
        row.quad_rel_err = std::abs(row.E_quadrature - row.E_singular) / row.E_singular;
    });
    for (const auto& row : S.rows) {
        if (!row.valid) continue;
        S.worst_quad_rel_err = std::max(S.worst_quad_rel_err, row.quad_rel_err);
        S.worst_identity_err =
            std::max(S.worst_identity_err, std::abs(row.ratio - row.inequality_lhs) / row.inequality_lhs);
        if (!(row.inequality_lhs - 1.0 > 0)) ++S.non_positive;
    }
    return S;
}

GapScan gap_scan(int n_lo, int n_hi, int p_count) {
    GapScan all;
    for (int n = n_lo; n <= n_hi; ++n) {
        auto s = gap_scan(std::vector<int>{n}, supercritical_p_grid(n, p_count));
        all.rows.insert(all.rows.end(), s.rows.begin(), s.rows.end());
        all.non_positive += s.non_positive;
        all.worst_quad_rel_err = std::max(all.worst_quad_rel_err, s.worst_quad_rel_err);
        all.worst_identity_err = std::max(all.worst_identity_err, s.worst_identity_err);
    }
    return all;
}

std::string gap_scan_csv(const GapScan& scan) {
    std::ostringstream os;
    os.precision(17);
    os << "n,p,beta,E_singular,E_kappa,ratio,in_uniqueness_range\r\n";
    for (const auto& r : scan.rows) {
        if (!r.valid) continue;
        os << r.n << ',' << r.p << ',' << r.beta << ',' << r.E_singular << ',' << r.E_kappa << ',' << r.ratio << ','
           << (r.in_uniqueness_range ? 1 : 0) << "\r\n";
    }
    return os.str();
}

}  // namespace selfsim
