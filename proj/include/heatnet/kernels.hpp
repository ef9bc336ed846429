#pragma once

#include <utility>

#include "heatnet/problem.hpp"

namespace heatnet {

/// Dimension-dependent change of time variable that removes the
/// (t-s)^{-d/2} singularity of the heat kernel:
///
///   d = 1:  tau = sqrt(t-s),  domain  [0, sqrt(t)],       g(tau) = tau^2
///   d = 2:  tau = -ln(t-s),   domain  [-ln t, B],          g(tau) = exp(-tau)
///   d >= 3: tau = (t-s)^a,    domain  [t^a, B], a = 1-d/2,  g(tau) = tau^{1/a}
///
/// The truncation B replaces the unbounded upper limit for d >= 2 and is
/// chosen so that g(B) <= trunc_eps * T, i.e. only times within trunc_eps*T
/// of the kernel singularity are discarded.
struct TemporalMap {
    int d = 1;
    double horizon = 1.0;  // T
    double alpha = 0.0;    // 1 - d/2 (used for d >= 3)
    double trunc_upper = 0.0;  // B (unused for d = 1)

    static constexpr double trunc_eps = 1e-8;

    static TemporalMap make(int d, double T);

    /// Lower endpoint of the domain at time t (t > 0).
    double lower(double t) const;
    /// Upper endpoint at time t, already truncated at B for d >= 2.
    double upper(double t) const;
    /// True when tau lies in the (possibly truncated) domain at time t.
    bool contains(double tau, double t) const;
    /// Lebesgue measure of the domain at time t; 0 when empty.
    double measure(double t) const;
};

/// Constants of the transformed forcing integrand:
/// kappa = 1 / (C(d) (4 pi D)^{d/2}) with C(1)=1/2, C(2)=1, C(d>=3)=|alpha|.
struct KernelConsts {
    int d = 1;
    double diffusion = 1.0;
    double c_d = 0.5;
    double kappa = 1.0;

    static KernelConsts make(int d, double D);
};

/// Whole-space heat kernel of d/dt - D lap:
/// (4 pi D (t-s))^{-d/2} exp(-|x-z|^2 / (4 D (t-s))) for s < t, 0 for s > t.
/// Throws when s == t and x == z (the on-diagonal singularity); s > t simply
/// returns 0 (the indicator).
double heat_kernel(double t, ConstVec x, double s, ConstVec z, double D);

/// The transformed temporal interval [lo, hi] at time t; throws when t <= 0
/// or the truncated interval is empty (t below trunc_eps * T for d >= 2).
std::pair<double, double> temporal_domain(const TemporalMap& tm, double t);

/// g(tau): the original time offset t - s recovered from tau.
double g_of_tau(const TemporalMap& tm, double tau);

/// kappa * exp(-|x-z|^2/(4 D g(tau))) * F(t - g(tau), z). Finite for every
/// admissible input; throws when tau lies outside the domain at t.
double transformed_inner_integrand(const KernelConsts& consts, const TemporalMap& tm, double t,
                                   ConstVec x, double tau, ConstVec z,
                                   const ScalarFieldBundle& F);

}  // namespace heatnet
