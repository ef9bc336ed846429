#include "heatnet/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heatnet {

TemporalMap TemporalMap::make(int d, double T) {
    if (d < 1) throw std::invalid_argument("TemporalMap: d must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("TemporalMap: T must be > 0");
    TemporalMap tm;
    tm.d = d;
    tm.horizon = T;
    tm.alpha = 1.0 - 0.5 * d;
    if (d == 1) {
        tm.trunc_upper = std::sqrt(T);  // analytic upper limit; no truncation needed
    } else if (d == 2) {
        tm.trunc_upper = -std::log(trunc_eps * T);
    } else {
        tm.trunc_upper = std::pow(trunc_eps * T, tm.alpha);
    }
    return tm;
}

double TemporalMap::lower(double t) const {
    if (d == 1) return 0.0;
    if (d == 2) return -std::log(t);
    return std::pow(t, alpha);
}

double TemporalMap::upper(double t) const {
    if (d == 1) return std::sqrt(t);
    return trunc_upper;
}

bool TemporalMap::contains(double tau, double t) const {
    if (!(t > 0.0)) return false;
    return tau >= lower(t) && tau <= upper(t);
}

double TemporalMap::measure(double t) const {
    if (!(t > 0.0)) return 0.0;
    double len = upper(t) - lower(t);
    return len > 0.0 ? len : 0.0;
}

KernelConsts KernelConsts::make(int d, double D) {
    if (d < 1) throw std::invalid_argument("KernelConsts: d must be >= 1");
    if (!(D > 0.0)) throw std::invalid_argument("KernelConsts: D must be > 0");
    KernelConsts c;
    c.d = d;
    c.diffusion = D;
    if (d == 1)
        c.c_d = 0.5;
    else if (d == 2)
        c.c_d = 1.0;
    else
        c.c_d = std::abs(1.0 - 0.5 * d);
    c.kappa = 1.0 / (c.c_d * std::pow(4.0 * std::numbers::pi * D, 0.5 * d));
    return c;
}

double heat_kernel(double t, ConstVec x, double s, ConstVec z, double D) {
    if (x.size() != z.size()) throw std::invalid_argument("heat_kernel: dimension mismatch");
    if (!(D > 0.0)) throw std::invalid_argument("heat_kernel: D must be > 0");
    const double dt = t - s;
    if (dt < 0.0) return 0.0;  // indicator 1_{[0,t]}(s)
    const double r2 = (x - z).squaredNorm();
    if (dt == 0.0) {
        if (r2 == 0.0)
            throw std::domain_error("heat_kernel: singular at s == t, x == z");
        return 0.0;
    }
    const int d = static_cast<int>(x.size());
    return std::pow(4.0 * std::numbers::pi * D * dt, -0.5 * d) * std::exp(-r2 / (4.0 * D * dt));
}

std::pair<double, double> temporal_domain(const TemporalMap& tm, double t) {
    if (!(t > 0.0)) throw std::domain_error("temporal_domain: t must be > 0");
    if (t > tm.horizon * (1.0 + 1e-12))
        throw std::domain_error("temporal_domain: t exceeds the horizon");
    double lo = tm.lower(t);
    double hi = tm.upper(t);
    if (!(hi > lo))
        throw std::domain_error("temporal_domain: truncated domain is empty at this t");
    return {lo, hi};
}

double g_of_tau(const TemporalMap& tm, double tau) {
    double g;
    if (tm.d == 1)
        g = tau * tau;
    else if (tm.d == 2)
        g = std::exp(-tau);
    else
        g = std::pow(tau, 1.0 / tm.alpha);
    if (!(g > 0.0) && tau != 0.0)
        throw std::domain_error("g_of_tau: tau outside the admissible range");
    return g;
}

double transformed_inner_integrand(const KernelConsts& consts, const TemporalMap& tm, double t,
                                   ConstVec x, double tau, ConstVec z,
                                   const ScalarFieldBundle& F) {
    if (!tm.contains(tau, t))
        throw std::domain_error("transformed_inner_integrand: tau outside the domain at t");
    const double g = g_of_tau(tm, tau);
    const double r2 = (x - z).squaredNorm();
    // g = 0 only at the d=1 lower endpoint; take the continuous extension.
    double w;
    if (r2 == 0.0)
        w = consts.kappa;
    else if (g == 0.0)
        w = 0.0;
    else
        w = consts.kappa * std::exp(-r2 / (4.0 * consts.diffusion * g));
    return w * F.value(t - g, z);
}

}  // namespace heatnet
