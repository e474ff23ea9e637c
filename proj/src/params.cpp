#include "selfsim/params.hpp"

#include <cmath>
#include <limits>

namespace selfsim {

double sobolev_exponent(int n) {
    if (n <= 2) return std::numeric_limits<double>::infinity();
    return double(n + 2) / double(n - 2);
}

Parameters make_params(int n, double p, std::optional<double> m, bool require_supercritical) {
    if (n < 1) throw Error("dimension n must be >= 1");
    if (!(p > 1.0) || !std::isfinite(p)) throw Error("exponent p must be finite and > 1");
    if (require_supercritical && !(p > sobolev_exponent(n)))
        throw Error("p = " + std::to_string(p) + " is not supercritical for n = " + std::to_string(n));

    Parameters par;
    par.n = n;
    par.p = p;
    par.require_supercritical = require_supercritical;
    par.kappa = std::pow(1.0 / (p - 1.0), 1.0 / (p - 1.0));
    par.alpha = 2.0 / (p - 1.0);
    par.beta = par.alpha * (n - 2.0 - par.alpha);
    if (m) {
        if (!(*m > par.kappa)) throw Error("sup-bound m must exceed kappa");
        par.m = m;
    }
    return par;
}

double kappa(const Parameters& par) { return par.kappa; }

}  // namespace selfsim
