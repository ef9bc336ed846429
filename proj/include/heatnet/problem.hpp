#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "heatnet/sampling.hpp"

namespace heatnet {

using ConstVec = Eigen::Ref<const Vector>;

/// A scalar field (t, x) -> R together with optional analytic derivatives.
///
/// Missing derivative members fall back to central finite differences of
/// `value`. `grad` writes into a caller-provided buffer so the hot paths stay
/// allocation-free; the value/dt/lap members return scalars directly.
struct ScalarFieldBundle {
    std::function<double(double, ConstVec)> value;
    std::function<double(double, ConstVec)> dt;                      // optional
    std::function<void(double, ConstVec, Eigen::Ref<Vector>)> grad;  // optional
    std::function<double(double, ConstVec)> lap;                     // optional

    /// Base step for first-derivative fallbacks; the Laplacian fallback uses
    /// fd_step^(3/4) (eps^(1/4) scaling at the default). Both are scaled by
    /// max(1, |coordinate|).
    double fd_step = 6.055454452393343e-06;  // cbrt(machine epsilon)

    /// Expected point dimension; negative disables the check in eval_bundle.
    int dim = -1;

    bool has_dt() const { return static_cast<bool>(dt); }
    bool has_grad() const { return static_cast<bool>(grad); }
    bool has_lap() const { return static_cast<bool>(lap); }

    double eval_dt(double t, ConstVec x) const;
    void eval_grad(double t, ConstVec x, Eigen::Ref<Vector> out) const;
    double eval_lap(double t, ConstVec x) const;
};

enum class BundleMember { value, dt, grad, lap };

/// Spec-level accessor: returns the analytic member when present, otherwise
/// the finite-difference fallback. `grad` allocates its result; prefer the
/// bundle's eval_* methods in hot loops.
double eval_bundle(const ScalarFieldBundle& b, BundleMember which, double t, ConstVec x);
Vector eval_bundle_grad(const ScalarFieldBundle& b, double t, ConstVec x);

enum class BenchmarkName { ex1, ex2a, ex2b, ex3 };

std::string to_string(BenchmarkName n);
BenchmarkName benchmark_from_string(const std::string& s);

struct BenchmarkParams {
    BenchmarkName name = BenchmarkName::ex1;
    int k = 2;
    int m = 3;
    Vector c;              // coefficient vector, length d; defaults to all ones
    double alpha_q = 1.0;  // amplitude of q(t) in ex3
    double beta_E = 1.0;   // decay rate of E(t,x) in ex3
};

/// A linear parabolic problem u_t = D lap(u) + F on [0,T] x R^d with initial
/// condition u0, sampled over the box [-A,A]^d (features / IC) and trained on
/// [-A_train, A_train]^d. Immutable after construction.
struct ProblemSpec {
    int d = 1;
    double diffusion = 1.0;       // D
    double horizon = 1.0;         // T
    double box_half_width = 0.0;  // A
    double train_half_width = 0.0;  // A~ <= A
    ScalarFieldBundle u0;           // time argument ignored
    ScalarFieldBundle forcing;
    std::function<double(double, ConstVec)> exact;  // optional

    std::string example_name = "custom";
    BenchmarkParams params;

    bool has_exact() const { return static_cast<bool>(exact); }
    void validate() const;

    /// Stable 64-bit identity hash over (example, d, D, T, A, A~, params);
    /// stored in model files and checked on load.
    std::uint64_t fingerprint() const;
};

/// Builds a benchmark ProblemSpec with analytic u0, forcing (value + all
/// derivative members) and the closed-form solution.
///
/// ex1 is the 1-d forced heat equation with u = (t+e^-t) sin x; ex2a is pure
/// diffusion with u = e^{-D d pi^2 t} prod sin(pi x_i); ex2b is the separable
/// forced problem u = g(t) S_k(x); ex3 adds the non-separable part
/// q(t) E(t,x) S_m(x). Forcing terms are chosen so the closed form solves the
/// PDE for any D > 0.
ProblemSpec make_benchmark(const BenchmarkParams& params, int d, double D, double T);

/// Same, with the default box [-pi, pi]^d and A_train = A.
ProblemSpec make_benchmark(BenchmarkName name, int d, double D = 1.0, double T = 1.0);

}  // namespace heatnet
