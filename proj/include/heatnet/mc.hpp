#pragma once

#include <span>

#include "heatnet/kernels.hpp"
#include "heatnet/problem.hpp"
#include "heatnet/sampling.hpp"

namespace heatnet {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
};

enum class McMode { transformed, importance };

std::string to_string(McMode m);
McMode mc_mode_from_string(const std::string& s);

/// Welford mean / standard error of the mean over a term sequence.
McEstimate mc_from_terms(std::span<const double> terms);

/// Per-sample terms of each estimator, given frozen sample blocks. These are
/// the same expressions the feature maps use; the sampling wrappers below and
/// the feature-bank consistency tests both go through them.
void I_transformed_terms(const ProblemSpec& p, double t, ConstVec x, const RowMatrix& y,
                         std::span<double> out);
void J_transformed_terms(const ProblemSpec& p, double t, ConstVec x, ConstVec tau,
                         const RowMatrix& z, std::span<double> out);
void I_is_terms(const ProblemSpec& p, double t, ConstVec x, const RowMatrix& eta,
                std::span<double> out);
void J_is_terms(const ProblemSpec& p, double t, ConstVec x, ConstVec r, const RowMatrix& xi,
                std::span<double> out);

/// Unbiased estimator of the transformed initial-condition integral:
/// mean of (2A)^d pi^{-d/2} exp(-|y_j|^2) u0(x + y_j sqrt(4Dt)),
/// y_j ~ Unif([-A,A]^d). Warns (once) when A is too small for the box
/// truncation bias to be negligible.
McEstimate estimate_I_transformed(const ProblemSpec& p, double t, ConstVec x, std::int64_t M0,
                                  RngState rng);

/// Unbiased estimator of the transformed forcing integral with
/// tau_j ~ Unif(D(t)), z_j ~ Unif([-A,A]^d).
McEstimate estimate_J_transformed(const ProblemSpec& p, double t, ConstVec x, std::int64_t M1,
                                  RngState rng);

/// Importance-sampling estimator of I: mean of u0(x + sqrt(2Dt) eta_j),
/// eta_j ~ N(0, I_d). Unbiased with no box truncation.
McEstimate estimate_I_is(const ProblemSpec& p, double t, ConstVec x, std::int64_t M0,
                         RngState rng);

/// Importance-sampling estimator of J: mean of t F(r_j t, x + sqrt(2Dt(1-r_j)) xi_j).
McEstimate estimate_J_is(const ProblemSpec& p, double t, ConstVec x, std::int64_t M1,
                         RngState rng);

/// u(t,x) = I + J estimate; component standard errors combined in quadrature.
/// At t = 0 the forcing integral vanishes and only I is estimated (exactly
/// u0(x) in importance mode).
McEstimate estimate_solution(const ProblemSpec& p, double t, ConstVec x, std::int64_t M0,
                             std::int64_t M1, McMode mode, RngState rng);

/// Deterministic d=1 oracle: adaptive Gauss-Kronrod quadrature of the
/// transformed I + J integrals to absolute tolerance tol.
double quad_reference_1d(const ProblemSpec& p, double t, ConstVec x, double tol);

}  // namespace heatnet
