#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace selfsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problem data and the constants derived from it.
struct Parameters {
    int n = 3;
    double p = 3.0;
    std::optional<double> m;
    bool require_supercritical = false;

    double kappa = 0.0;  // (1/(p-1))^{1/(p-1)}
    double alpha = 0.0;  // 2/(p-1), decay exponent of the singular profile
    double beta = 0.0;   // alpha (n - 2 - alpha)
};

Parameters make_params(int n, double p, std::optional<double> m = std::nullopt,
                       bool require_supercritical = false);

double kappa(const Parameters& par);

// (n+2)/(n-2) for n >= 3, +inf otherwise.
double sobolev_exponent(int n);

}  // namespace selfsim
