#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selfsim/params.hpp"

namespace selfsim {

enum class ProfileKind { ConstantZero, ConstantKappa, SingularHomogeneous, Shooting, Tabulated };

std::string to_string(ProfileKind k);

using RadialFn = std::function<double(double)>;

// A radial function together with its radial derivative.
struct RadialField {
    RadialFn w;
    RadialFn dw;
    // optional joint evaluation, used by the hot quadrature loops when set
    std::function<void(double, double&, double&)> both;
    void eval(double x, double& v, double& d) const {
        if (both) {
            both(x, v, d);
        } else {
            v = w(x);
            d = dw(x);
        }
    }
};

struct RadialProfile {
    ProfileKind kind = ProfileKind::Tabulated;
    int sign = 1;  // ConstantKappa only
    Parameters params;
    std::vector<double> r, w, dw;
    std::vector<double> d2w;  // second derivatives: closed form, or from the profile equation for shooting
    std::optional<double> decay_coeff;
    std::optional<double> shoot_a;

    double value(double x) const;
    double deriv(double x) const;
    void eval(double x, double& v, double& d) const;
    bool bounded() const { return kind != ProfileKind::SingularHomogeneous; }
    bool is_constant() const {
        return kind == ProfileKind::ConstantZero || kind == ProfileKind::ConstantKappa;
    }
    RadialField field() const;
};

// Geometric grading from r_min until the spacing reaches h_max, then uniform to r_max.
std::vector<double> default_grid(double r_min = 1e-6, double r_max = 20.0, double h_max = 0.002,
                                 double ratio = 1.02);

RadialProfile constant_profile(const Parameters& par, int sign,
                               const std::vector<double>& grid = default_grid());
RadialProfile singular_profile(const Parameters& par,
                               const std::vector<double>& grid = default_grid(1e-3));
RadialProfile tabulated_profile(const Parameters& par, std::vector<double> r, std::vector<double> w,
                                std::vector<double> dw);

// Asymptotic expansion w ~ C r^{-alpha} sum_k c_k r^{-2k} of decaying solutions.
void decay_tail(const Parameters& par, double C, double r, double& w, double& dw);

// Cubic (or quintic, given f'') Hermite interpolation of tabulated data; clamps outside the table.
struct HermiteTable {
    const std::vector<double>* r;
    const std::vector<double>* f;
    const std::vector<double>* df;
    const std::vector<double>* d2f = nullptr;  // quintic interpolation when present
    void eval(double x, double& v, double& dv) const;
};

}  // namespace selfsim
