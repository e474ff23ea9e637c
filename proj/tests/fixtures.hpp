#pragma once

#include "selfsim/shoot.hpp"

namespace fixture {

inline const selfsim::Parameters& par37() {
    static const selfsim::Parameters par = selfsim::make_params(3, 7.0, std::nullopt, true);
    return par;
}

// The two decaying (n = 3, p = 7) profiles; brackets from the w(0) scan.
inline const selfsim::RadialProfile& profile37(int which = 0) {
    static const selfsim::RadialProfile first = selfsim::shoot(par37(), 2.25, 2.35);
    static const selfsim::RadialProfile second = selfsim::shoot(par37(), 5.65, 5.75);
    return which == 0 ? first : second;
}

}  // namespace fixture
