#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heatnet/features.hpp"
#include "heatnet/problem.hpp"

namespace heatnet {

enum class SolverKind { normal_cholesky, svd_pinv };
enum class Collocation { random, grid };

std::string to_string(SolverKind s);
std::string to_string(Collocation c);
SolverKind solver_from_string(const std::string& s);
Collocation collocation_from_string(const std::string& s);

/// Hyperparameters of one training run.
struct TrainConfig {
    FeatureVariant variant = FeatureVariant::importance;
    IsScale is_scale = IsScale::sqrt2Dt;
    std::int64_t M0 = 0;
    std::int64_t M1 = 0;
    std::int64_t n_pde = 0;
    std::int64_t n_ic = 0;
    double ic_weight = -1.0;  // omega; < 0 selects the default n_pde / n_ic
    double ridge = 0.0;
    SamplerKind sampler = SamplerKind::pseudo_normal;
    std::uint64_t seed = 0;
    double t_floor = -1.0;  // < 0 selects the default 1e-3 T
    std::optional<SolverKind> solver;  // unset: cholesky if ridge > 0 else pinv
    Collocation collocation = Collocation::random;

    double effective_ic_weight() const {
        if (ic_weight >= 0.0) return ic_weight;
        if (n_ic == 0) return 0.0;
        return static_cast<double>(n_pde) / static_cast<double>(n_ic);
    }
    double effective_t_floor(const ProblemSpec& p) const {
        return t_floor >= 0.0 ? t_floor : default_t_floor(p);
    }
    SolverKind effective_solver() const {
        if (solver) return *solver;
        return ridge > 0.0 ? SolverKind::normal_cholesky : SolverKind::svd_pinv;
    }
    void validate(const ProblemSpec& p) const;
};

enum class RowKind : std::uint8_t { pde, ic };

/// PDE collocation points (column 0 is t) and IC points.
struct TrainingPoints {
    RowMatrix pde_tx;  // n_pde x (1+d)
    RowMatrix ic_x;    // n_ic x d
};

TrainingPoints sample_training_points(const ProblemSpec& p, const TrainConfig& cfg, RngState rng);

/// Fully materialized stacked system (IC block already scaled by sqrt(omega)).
/// Used by the svd_pinv path and by tests; the cholesky path streams row
/// chunks into the Gram matrix instead and never forms A.
struct LinearSystem {
    Matrix A;
    Vector b;
    std::vector<RowKind> row_kind;
};

LinearSystem assemble_system(const ProblemSpec& p, const FeatureBank& bank,
                             const TrainingPoints& points, const TrainConfig& cfg);

struct SolveDiagnostics {
    double grad_residual = 0.0;   // |A'A w + ridge w - A'b| / (|A'b| + 1)
    double cond_estimate = 0.0;
    std::int64_t rank = 0;
    int jitter_attempts = 0;
};

/// Ridge / minimum-norm least squares. normal_cholesky solves
/// (A'A + ridge I) w = A'b with up to 3 jitter escalations (x10) and one
/// iterative-refinement step; svd_pinv truncates singular values below
/// rcond * sigma_max with rcond = eps * max(N, M).
Vector solve_ridge(const LinearSystem& sys, double ridge,
                   SolverKind solver = SolverKind::normal_cholesky,
                   SolveDiagnostics* diag = nullptr);

struct TrainDiagnostics {
    double build_seconds = 0.0;  // bank sampling + system assembly
    double train_seconds = 0.0;  // factorization / SVD + solve
    double pde_rms = 0.0;        // unweighted per-block residual RMS
    double ic_rms = 0.0;
    SolveDiagnostics solve;
    std::int64_t rows_pde = 0;
    std::int64_t rows_ic = 0;
};

/// A trained HEATNET: frozen bank, learned output weights, and everything
/// needed to evaluate the model. Immutable; predict is thread-safe.
struct TrainedModel {
    ProblemSpec problem;
    FeatureBank bank;
    Vector weights;
    TrainConfig config;
    TrainDiagnostics diag;

    double predict(double t, ConstVec x) const;
    /// Batched prediction over rows of tx (column 0 is t), parallel over rows.
    Vector predict_batch(const RowMatrix& tx) const;
};

/// Samples features and collocation points, assembles the stacked blocks and
/// solves the ridge problem. Throws on non-finite matrix entries (with the
/// offending row and feature in the message) and on solver failure.
TrainedModel train(const ProblemSpec& p, const TrainConfig& cfg);

}  // namespace heatnet
