#pragma once

#include <cstdint>
#include <vector>

#include "heatnet/kernels.hpp"
#include "heatnet/problem.hpp"
#include "heatnet/sampling.hpp"

namespace heatnet {

enum class FeatureVariant { gaussian, importance };
enum class IsScale { sqrt2Dt, sqrt4Dt };

std::string to_string(FeatureVariant v);
std::string to_string(IsScale s);
FeatureVariant variant_from_string(const std::string& s);
IsScale is_scale_from_string(const std::string& s);

/// Frozen random-feature parameters. Sampled once at construction and
/// immutable afterwards; evaluation at distinct points may run concurrently.
///
/// gaussian variant:   phi0_j = pi^{-d/2} e^{-|y_j|^2} u0(x + y_j sqrt(4Dt))
///                     phi1_j = 1[tau_j in D(t)] kappa
///                              exp(-|x-z_j|^2/(4 D g(tau_j))) F(t-g(tau_j), z_j)
///   with y_j, z_j ~ Unif([-A,A]^d) and tau_j ~ Unif(D(T)).
/// importance variant: phi0_j = u0(x + sigma(t) eta_j), sigma per is_scale
///                     phi1_j = t F(r_j t, x + sqrt(2Dt(1-r_j)) xi_j)
///   with eta_j, xi_j ~ N(0, I_d) and r_j ~ Unif[0,1).
struct FeatureBank {
    FeatureVariant variant = FeatureVariant::importance;
    std::int64_t M0 = 0;
    std::int64_t M1 = 0;
    int d = 1;

    RowMatrix y;    // gaussian: M0 x d
    RowMatrix z;    // gaussian: M1 x d
    Vector tau;     // gaussian: M1

    RowMatrix eta;  // importance: M0 x d
    Vector r;       // importance: M1
    RowMatrix xi;   // importance: M1 x d

    IsScale is_scale = IsScale::sqrt2Dt;
    SamplerKind sampler = SamplerKind::pseudo_normal;
    std::uint64_t seed = 0;
    std::uint64_t problem_fingerprint = 0;

    // derived, recomputed on load
    Vector pref0;   // gaussian: pi^{-d/2} e^{-|y_j|^2}
    Vector g_tau;   // gaussian: g(tau_j)
    TemporalMap tmap;
    KernelConsts consts;

    std::int64_t total() const { return M0 + M1; }
    /// Recomputes the derived members above from the sample blocks.
    void finalize(const ProblemSpec& p);
};

/// Per-point feature evaluation result (operation-level convenience type;
/// the row evaluators below are the allocation-free path).
struct FeatureEval {
    Vector phi;
    Vector heat_op_phi;
    std::vector<std::uint8_t> active_mask;
};

/// Samples and freezes a feature bank. The gaussian variant requires a
/// uniform sampler kind, the importance variant a normal one. Sobol banks
/// are deterministic (the seed is recorded but unused); blocks feeding an
/// inverse-CDF transform start at Sobol index 1 so that no coordinate is 0.
FeatureBank build_bank(const ProblemSpec& p, FeatureVariant variant, std::int64_t M0,
                       std::int64_t M1, SamplerKind sampler, std::uint64_t seed,
                       IsScale is_scale = IsScale::sqrt2Dt);

/// Reusable per-thread scratch for the row evaluators.
struct FeatureWorkspace {
    Vector point;
    Vector grad;
    void resize(int d) {
        point.resize(d);
        grad.resize(d);
    }
};

/// phi_j(t, x) into out[0 .. M0+M1). Inactive gaussian forcing nodes write 0.
void eval_features_row(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                       double* out, FeatureWorkspace& ws);

/// (d/dt - D lap) phi_j(t, x) into out. Requires t >= t_floor > 0; the
/// sqrt(D/t) factors in the time derivatives blow up at t = 0.
void eval_heat_op_row(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                      double* out, FeatureWorkspace& ws);

/// Operation-level wrappers. eval_features accepts any t in [0, T];
/// eval_heat_operator enforces t in [t_floor, T] (t_floor < 0 selects the
/// default 1e-3 T).
FeatureEval eval_features(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x);
FeatureEval eval_heat_operator(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                               double t_floor = -1.0);

double default_t_floor(const ProblemSpec& p);

}  // namespace heatnet
