#pragma once

#include "relsv/combi.hpp"
#include "relsv/error.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// m! r^{m+l+2g-2} prod_i (mu_i/r)^{floor(mu_i/r)} / floor(mu_i/r)!
inline ExactScalar prefactor(const SpinProfile& p)
{
    ExactScalar out(factorial(static_cast<unsigned long>(p.m)));
    out *= pow(ExactScalar(p.r), p.m + p.l() + 2 * p.g - 2);
    for (long x : p.mu) {
        const long f = floor_div(x, p.r);
        out *= pow(ExactScalar(x, p.r), f) / ExactScalar(factorial(static_cast<unsigned long>(f)));
    }
    return out;
}

/// Integrand value assigned to the unstable moduli: 1/mu_1^2 if r | mu_1 - 1
/// for (0,1), 1/(mu_1+mu_2) if r | mu_1 + mu_2 for (0,2), zero otherwise.
inline ExactScalar special_integrand(const SpinProfile& p)
{
    switch (p.regime) {
    case Regime::unstable_01: {
        const long mu1 = p.mu[0];
        return (mu1 - 1) % p.r == 0 ? ExactScalar(1, mu1 * mu1) : ExactScalar(0);
    }
    case Regime::unstable_02: {
        const long s = p.mu[0] + p.mu[1];
        return s % p.r == 0 ? ExactScalar(1, s) : ExactScalar(0);
    }
    case Regime::general: break;
    }
    throw structural_error("special_integrand: profile " + profile_string(p) + " is not (0,1) or (0,2)");
}

/// prefactor * special_integrand for the unstable regimes.
inline ExactScalar special_case_value(const SpinProfile& p) { return prefactor(p) * special_integrand(p); }

} // namespace relsv
