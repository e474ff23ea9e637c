#include "selfsim/profile.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace selfsim {

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::ConstantZero: return "constant_zero";
        case ProfileKind::ConstantKappa: return "constant_kappa";
        case ProfileKind::SingularHomogeneous: return "singular";
        case ProfileKind::Shooting: return "shooting";
        case ProfileKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

std::vector<double> default_grid(double r_min, double r_max, double h_max, double ratio) {
    if (!(r_min > 0 && r_max > r_min && h_max > 0 && ratio > 1)) throw Error("bad grid specification");
    std::vector<double> g{r_min};
    double r = r_min;
    while (r * (ratio - 1.0) < h_max && r < r_max) {
        r *= ratio;
        g.push_back(r);
    }
    double span = r_max - g.back();
    if (span > 0) {
        auto m = std::size_t(std::ceil(span / h_max));
        double h = span / double(m);
        double r0 = g.back();
        for (std::size_t i = 1; i <= m; ++i) g.push_back(r0 + h * double(i));
    }
    g.back() = r_max;
    return g;
}

void HermiteTable::eval(double x, double& v, double& dv) const {
    const auto& R = *r;
    const auto& F = *f;
    const auto& D = *df;
    if (x <= R.front()) {
        // even extension through the origin
        double c = R.front() > 0 ? D.front() / (2.0 * R.front()) : 0.0;
        v = F.front() + c * (x * x - R.front() * R.front());
        dv = 2.0 * c * x;
        return;
    }
    if (x >= R.back()) {
        v = F.back();
        dv = D.back();
        return;
    }
    auto it = std::upper_bound(R.begin(), R.end(), x);
    std::size_t i = std::size_t(it - R.begin()) - 1;
    double h = R[i + 1] - R[i];
    double t = (x - R[i]) / h;
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    if (d2f) {
        // quintic Hermite with second derivatives
        const auto& S = *d2f;
        double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5,
               h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5, h3 = 10 * t3 - 15 * t4 + 6 * t5,
               h4 = -4 * t3 + 7 * t4 - 3 * t5, h5 = 0.5 * t3 - t4 + 0.5 * t5;
        v = h0 * F[i] + h1 * h * D[i] + h2 * h * h * S[i] + h3 * F[i + 1] + h4 * h * D[i + 1] + h5 * h * h * S[i + 1];
        double d0 = -30 * t2 + 60 * t3 - 30 * t4, d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4,
               d2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4, d4 = -12 * t2 + 28 * t3 - 15 * t4,
               d5 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
        dv = (d0 * F[i] - d0 * F[i + 1]) / h + d1 * D[i] + d2 * h * S[i] + d4 * D[i + 1] + d5 * h * S[i + 1];
        return;
    }
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    v = h00 * F[i] + h10 * h * D[i] + h01 * F[i + 1] + h11 * h * D[i + 1];
    double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1, d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
    dv = (d00 * F[i] + d01 * F[i + 1]) / h + d10 * D[i] + d11 * D[i + 1];
}

void decay_tail(const Parameters& par, double C, double r, double& w, double& dw) {
    const double a = par.alpha, p = par.p;
    const int n = par.n;
    const double x = 1.0 / (r * r);
    const double Cp = std::pow(std::abs(C), p - 1.0);
    std::vector<double> c{1.0}, P{1.0};
    double sw = 1.0, sd = -a, xk = 1.0, last = 1.0;
    for (int k = 1; k < 12; ++k) {
        double m = a + 2.0 * (k - 1);
        double ck = (-c[k - 1] * m * (m + 2.0 - n) - Cp * P[k - 1]) / k;
        c.push_back(ck);
        double Pk = 0.0;
        for (int j = 1; j <= k; ++j) Pk += ((p + 1.0) * j - k) * c[j] * P[k - j];
        P.push_back(Pk / k);
        xk *= x;
        double term = ck * xk;
        if (std::abs(term) > std::abs(last) && k > 2) break;  // asymptotic series: stop at the smallest term
        sw += term;
        sd += -(a + 2.0 * k) * term;
        last = term;
    }
    w = C * std::pow(r, -a) * sw;
    dw = C * std::pow(r, -a - 1.0) * sd;
}

double RadialProfile::value(double x) const {
    switch (kind) {
        case ProfileKind::ConstantZero: return 0.0;
        case ProfileKind::ConstantKappa: return sign * params.kappa;
        case ProfileKind::SingularHomogeneous:
            return std::pow(params.beta, 1.0 / (params.p - 1.0)) * std::pow(x, -params.alpha);
        default: break;
    }
    double v, d;
    if (x > r.back() && decay_coeff) {
        decay_tail(params, *decay_coeff, x, v, d);
        return v;
    }
    HermiteTable{&r, &w, &dw, d2w.size() == r.size() ? &d2w : nullptr}.eval(x, v, d);
    return v;
}

double RadialProfile::deriv(double x) const {
    switch (kind) {
        case ProfileKind::ConstantZero:
        case ProfileKind::ConstantKappa: return 0.0;
        case ProfileKind::SingularHomogeneous:
            return -params.alpha * std::pow(params.beta, 1.0 / (params.p - 1.0)) *
                   std::pow(x, -params.alpha - 1.0);
        default: break;
    }
    double v, d;
    if (x > r.back()) {
        if (decay_coeff) {
            decay_tail(params, *decay_coeff, x, v, d);
            return d;
        }
        return 0.0;
    }
    HermiteTable{&r, &w, &dw, d2w.size() == r.size() ? &d2w : nullptr}.eval(x, v, d);
    return d;
}

void RadialProfile::eval(double x, double& v, double& d) const {
    if (kind == ProfileKind::Shooting || kind == ProfileKind::Tabulated) {
        if (x > r.back()) {
            if (decay_coeff) {
                decay_tail(params, *decay_coeff, x, v, d);
            } else {
                HermiteTable{&r, &w, &dw, nullptr}.eval(x, v, d);
                d = 0.0;
            }
            return;
        }
        HermiteTable{&r, &w, &dw, d2w.size() == r.size() ? &d2w : nullptr}.eval(x, v, d);
        return;
    }
    v = value(x);
    d = deriv(x);
}

RadialField RadialProfile::field() const {
    auto self = std::make_shared<RadialProfile>(*this);
    return {[self](double x) { return self->value(x); }, [self](double x) { return self->deriv(x); },
            [self](double x, double& v, double& d) { self->eval(x, v, d); }};
}

static void check_grid(const std::vector<double>& g) {
    if (g.size() < 2) throw Error("grid needs at least two points");
    if (g.front() < 0) throw Error("grid radii must be non-negative");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw Error("grid must be strictly increasing");
}

RadialProfile constant_profile(const Parameters& par, int sign, const std::vector<double>& grid) {
    check_grid(grid);
    RadialProfile pr;
    pr.params = par;
    pr.r = grid;
    double c = 0.0;
    if (sign == 0) {
        pr.kind = ProfileKind::ConstantZero;
    } else {
        pr.kind = ProfileKind::ConstantKappa;
        pr.sign = sign > 0 ? 1 : -1;
        c = pr.sign * par.kappa;
    }
    pr.w.assign(grid.size(), c);
    pr.dw.assign(grid.size(), 0.0);
    pr.d2w.assign(grid.size(), 0.0);
    return pr;
}

RadialProfile singular_profile(const Parameters& par, const std::vector<double>& grid) {
    if (par.n < 3 || !(par.beta > 0)) throw Error("singular profile requires n >= 3 and beta > 0");
    check_grid(grid);
    if (grid.front() <= 0) throw Error("singular profile grid must exclude r = 0");
    RadialProfile pr;
    pr.kind = ProfileKind::SingularHomogeneous;
    pr.params = par;
    pr.r = grid;
    const double C = std::pow(par.beta, 1.0 / (par.p - 1.0)), a = par.alpha;
    pr.decay_coeff = C;
    for (double x : grid) {
        pr.w.push_back(C * std::pow(x, -a));
        pr.dw.push_back(-a * C * std::pow(x, -a - 1));
        pr.d2w.push_back(a * (a + 1) * C * std::pow(x, -a - 2));
    }
    return pr;
}

RadialProfile tabulated_profile(const Parameters& par, std::vector<double> r, std::vector<double> w,
                                std::vector<double> dw) {
    check_grid(r);
    if (w.size() != r.size() || dw.size() != r.size()) throw Error("profile arrays differ in length");
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!std::isfinite(w[i]) || !std::isfinite(dw[i])) throw Error("non-finite profile sample");
    RadialProfile pr;
    pr.kind = ProfileKind::Tabulated;
    pr.params = par;
    pr.r = std::move(r);
    pr.w = std::move(w);
    pr.dw = std::move(dw);
    return pr;
}

}  // namespace selfsim
