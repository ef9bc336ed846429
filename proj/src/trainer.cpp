#include "heatnet/trainer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "heatnet/parallel.hpp"

namespace heatnet {

std::string to_string(SolverKind s) {
    return s == SolverKind::normal_cholesky ? "normal_cholesky" : "svd_pinv";
}

std::string to_string(Collocation c) { return c == Collocation::random ? "random" : "grid"; }

SolverKind solver_from_string(const std::string& s) {
    if (s == "normal_cholesky") return SolverKind::normal_cholesky;
    if (s == "svd_pinv") return SolverKind::svd_pinv;
    throw std::invalid_argument("unknown solver: " + s);
}

Collocation collocation_from_string(const std::string& s) {
    if (s == "random") return Collocation::random;
    if (s == "grid") return Collocation::grid;
    throw std::invalid_argument("unknown collocation mode: " + s);
}

void TrainConfig::validate(const ProblemSpec& p) const {
    if (M0 < 0 || M1 < 0 || M0 + M1 < 1)
        throw std::invalid_argument("TrainConfig: needs M0 >= 0, M1 >= 0, M0 + M1 >= 1");
    if (n_pde < 0 || n_ic < 0 || n_pde + n_ic < 1)
        throw std::invalid_argument("TrainConfig: needs n_pde + n_ic >= 1");
    if (std::isnan(ic_weight)) throw std::invalid_argument("TrainConfig: ic_weight is NaN");
    if (ridge < 0.0) throw std::invalid_argument("TrainConfig: ridge must be >= 0");
    if (effective_solver() == SolverKind::normal_cholesky && !(ridge > 0.0))
        throw std::invalid_argument("TrainConfig: normal_cholesky requires ridge > 0");
    if (collocation == Collocation::grid && p.d != 1)
        throw std::invalid_argument("TrainConfig: grid collocation requires d = 1");
    double tf = effective_t_floor(p);
    if (!(tf > 0.0) || tf >= p.horizon)
        throw std::invalid_argument("TrainConfig: t_floor must lie in (0, T)");
}

TrainingPoints sample_training_points(const ProblemSpec& p, const TrainConfig& cfg,
                                      RngState rng) {
    TrainingPoints pts;
    const double tf = cfg.effective_t_floor(p);
    const double At = p.train_half_width;
    const double A = p.box_half_width;

    if (cfg.collocation == Collocation::grid) {
        // Tensor grid in (0, T] x [-A~, A~]; the time count is matched to the
        // box aspect ratio so n_t * n_x is close to the requested n_pde.
        std::int64_t n_t = std::max<std::int64_t>(
            1, std::llround(std::sqrt(static_cast<double>(cfg.n_pde) * p.horizon / (2.0 * At))));
        std::int64_t n_x = std::max<std::int64_t>(1, cfg.n_pde / n_t);
        pts.pde_tx.resize(n_t * n_x, 2);
        std::int64_t row = 0;
        for (std::int64_t i = 0; i < n_t; ++i) {
            double t = p.horizon * static_cast<double>(i + 1) / static_cast<double>(n_t);
            t = std::max(t, tf);
            for (std::int64_t j = 0; j < n_x; ++j) {
                double x = n_x == 1 ? 0.0
                                    : -At + 2.0 * At * static_cast<double>(j) /
                                              static_cast<double>(n_x - 1);
                pts.pde_tx(row, 0) = t;
                pts.pde_tx(row, 1) = x;
                ++row;
            }
        }
        pts.ic_x.resize(cfg.n_ic, 1);
        for (std::int64_t j = 0; j < cfg.n_ic; ++j)
            pts.ic_x(j, 0) = cfg.n_ic == 1 ? 0.0
                                           : -A + 2.0 * A * static_cast<double>(j) /
                                                     static_cast<double>(cfg.n_ic - 1);
        return pts;
    }

    Rng gen_pde(RngState{rng.seed, rng.stream_id + 1});  // stream 1: PDE points
    pts.pde_tx.resize(cfg.n_pde, 1 + p.d);
    for (std::int64_t k = 0; k < cfg.n_pde; ++k) {
        pts.pde_tx(k, 0) = tf + (p.horizon - tf) * gen_pde.uniform();
        for (int i = 0; i < p.d; ++i)
            pts.pde_tx(k, 1 + i) = At * (2.0 * gen_pde.uniform() - 1.0);
    }
    Rng gen_ic(RngState{rng.seed, rng.stream_id + 2});  // stream 2: IC points
    pts.ic_x.resize(cfg.n_ic, p.d);
    for (std::int64_t k = 0; k < cfg.n_ic; ++k)
        for (int i = 0; i < p.d; ++i)
            pts.ic_x(k, i) = A * (2.0 * gen_ic.uniform() - 1.0);
    return pts;
}

namespace {

constexpr std::int64_t kChunkRows = 1024;
constexpr std::int64_t kGramPanel = 256;

/// Fills one stacked row (PDE heat-operator row or sqrt(omega)-scaled IC row).
void fill_row(const ProblemSpec& p, const FeatureBank& bank, const TrainingPoints& pts,
              double sqrt_w, std::int64_t global_row, double* a_out, double& b_out,
              FeatureWorkspace& ws) {
    const std::int64_t n_pde = pts.pde_tx.rows();
    if (global_row < n_pde) {
        const double t = pts.pde_tx(global_row, 0);
        auto x = pts.pde_tx.row(global_row).tail(p.d).transpose();
        eval_heat_op_row(bank, p, t, x, a_out, ws);
        b_out = p.forcing.value(t, x);
    } else {
        auto x = pts.ic_x.row(global_row - n_pde).transpose();
        eval_features_row(bank, p, 0.0, x, a_out, ws);
        const double u0 = p.u0.value(0.0, x);
        for (std::int64_t j = 0; j < bank.total(); ++j) a_out[j] *= sqrt_w;
        b_out = sqrt_w * u0;
    }
}

template <typename Mat>
void check_finite_chunk(const Mat& chunk, ConstVec b_chunk, std::int64_t row0,
                        std::int64_t n_pde) {
    if (chunk.allFinite() && b_chunk.allFinite()) return;
    for (Eigen::Index r = 0; r < chunk.rows(); ++r) {
        for (Eigen::Index c = 0; c < chunk.cols(); ++c) {
            if (!std::isfinite(chunk(r, c))) {
                std::int64_t row = row0 + r;
                throw std::runtime_error(
                    "assemble: non-finite entry at " +
                    std::string(row < n_pde ? "pde" : "ic") + " row " +
                    std::to_string(row < n_pde ? row : row - n_pde) + ", feature " +
                    std::to_string(c) +
                    " (check t_floor and truncation settings)");
            }
        }
        if (!std::isfinite(b_chunk[r]))
            throw std::runtime_error("assemble: non-finite rhs at row " + std::to_string(row0 + r));
    }
}

/// G (lower triangle) += Phi' Phi, panel-parallel with a fixed panel grid so
/// the accumulation is bit-identical for any worker count.
void gram_update(Matrix& G, const RowMatrix& chunk) {
    const std::int64_t M = G.cols();
    const std::int64_t panels = (M + kGramPanel - 1) / kGramPanel;
    parallel_for(panels, [&](std::int64_t pi) {
        const std::int64_t j0 = pi * kGramPanel;
        const std::int64_t bw = std::min(kGramPanel, M - j0);
        G.block(j0, j0, M - j0, bw).noalias() +=
            chunk.middleCols(j0, M - j0).transpose() * chunk.middleCols(j0, bw);
    }, 1);
}

struct NormalSystem {
    Matrix G;      // lower triangle of A'A
    Vector rhs;    // A'b
    double btb = 0.0;
};

/// Streams all stacked rows through chunk buffers into G = A'A and rhs = A'b.
NormalSystem assemble_normal(const ProblemSpec& p, const FeatureBank& bank,
                             const TrainingPoints& pts, const TrainConfig& cfg) {
    const std::int64_t M = bank.total();
    const std::int64_t n_pde = pts.pde_tx.rows();
    const std::int64_t n_total = n_pde + pts.ic_x.rows();
    const double sqrt_w = std::sqrt(cfg.effective_ic_weight());

    NormalSystem sys;
    sys.G = Matrix::Zero(M, M);
    sys.rhs = Vector::Zero(M);

    RowMatrix chunk;
    Vector b_chunk;
    for (std::int64_t row0 = 0; row0 < n_total; row0 += kChunkRows) {
        const std::int64_t rows = std::min(kChunkRows, n_total - row0);
        chunk.resize(rows, M);
        b_chunk.resize(rows);
        parallel_for(rows, [&](std::int64_t r) {
            thread_local FeatureWorkspace ws;
            ws.resize(p.d);
            fill_row(p, bank, pts, sqrt_w, row0 + r, chunk.row(r).data(), b_chunk[r], ws);
        }, 1);
        check_finite_chunk(chunk, b_chunk, row0, n_pde);
        gram_update(sys.G, chunk);
        sys.rhs.noalias() += chunk.transpose() * b_chunk;
        sys.btb += b_chunk.squaredNorm();
    }
    return sys;
}

/// Solve (G + ridge I) w = c with jitter escalation and one refinement step.
/// G_lower carries the lower triangle only; the factorization runs in place
/// on a single full copy to keep the peak footprint at 2 M^2 doubles.
Vector solve_normal(const Matrix& G_lower, const Vector& c, double ridge,
                    SolveDiagnostics* diag) {
    const std::int64_t M = G_lower.cols();
    auto G = G_lower.selfadjointView<Eigen::Lower>();
    const double base =
        ridge > 0.0 ? ridge
                    : std::numeric_limits<double>::epsilon() * G_lower.diagonal().maxCoeff();

    Matrix Gs;
    double shift = ridge;
    int attempt = 0;
    bool ok = false;
    std::unique_ptr<Eigen::LLT<Eigen::Ref<Matrix>>> llt;
    for (; attempt < 3; ++attempt) {
        Gs = G;
        Gs.diagonal().array() += shift;
        llt = std::make_unique<Eigen::LLT<Eigen::Ref<Matrix>>>(Gs);
        if (llt->info() == Eigen::Success) {
            ok = true;
            break;
        }
        shift = ridge + base * std::pow(10.0, attempt + 1);
    }
    if (!ok)
        throw std::runtime_error("solve_ridge: factorization failed after jitter escalation");

    Vector w = llt->solve(c);
    // one iterative-refinement step on the normal equations
    Vector resid = c - G * w - shift * w;
    w += llt->solve(resid);

    if (diag) {
        diag->jitter_attempts = attempt;
        diag->rank = M;
        Vector grad = G * w + ridge * w - c;
        diag->grad_residual = grad.norm() / (c.norm() + 1.0);
        double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
        for (std::int64_t i = 0; i < M; ++i) {
            double v = Gs(i, i);  // holds L after the in-place factorization
            dmax = std::max(dmax, v);
            dmin = std::min(dmin, v);
        }
        diag->cond_estimate = dmin > 0.0 ? (dmax / dmin) * (dmax / dmin) : 0.0;
    }
    return w;
}

Vector solve_pinv(const Matrix& A, const Vector& b, SolveDiagnostics* diag) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double rcond = std::numeric_limits<double>::epsilon() *
                         static_cast<double>(std::max(A.rows(), A.cols()));
    const Vector& s = svd.singularValues();
    const double cut = s.size() > 0 ? rcond * s[0] : 0.0;
    Vector ub = svd.matrixU().transpose() * b;
    Vector siub = Vector::Zero(s.size());
    std::int64_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > cut) {
            siub[i] = ub[i] / s[i];
            ++rank;
        }
    }
    Vector w = svd.matrixV() * siub;
    if (diag) {
        diag->rank = rank;
        diag->cond_estimate = rank > 0 ? s[0] / s[rank - 1] : 0.0;
        Vector grad = A.transpose() * (A * w - b);
        diag->grad_residual = grad.norm() / ((A.transpose() * b).norm() + 1.0);
    }
    return w;
}

}  // namespace

LinearSystem assemble_system(const ProblemSpec& p, const FeatureBank& bank,
                             const TrainingPoints& pts, const TrainConfig& cfg) {
    if (bank.problem_fingerprint != p.fingerprint())
        throw std::invalid_argument("assemble_system: bank does not match the problem");
    const std::int64_t M = bank.total();
    const std::int64_t n_pde = pts.pde_tx.rows();
    const std::int64_t n_ic = pts.ic_x.rows();
    const std::int64_t n = n_pde + n_ic;
    if (n * M > std::int64_t(2e8))
        throw std::invalid_argument(
            "assemble_system: N*M exceeds the materialization limit (2e8 entries); "
            "use the streamed normal-equations path");
    const double sqrt_w = std::sqrt(cfg.effective_ic_weight());

    LinearSystem sys;
    sys.A.resize(n, M);
    sys.b.resize(n);
    sys.row_kind.resize(static_cast<std::size_t>(n));
    for (std::int64_t r = 0; r < n; ++r)
        sys.row_kind[static_cast<std::size_t>(r)] = r < n_pde ? RowKind::pde : RowKind::ic;

    // row-major staging buffer: fill_row wants contiguous rows
    RowMatrix staged(n, M);
    parallel_for(n, [&](std::int64_t r) {
        thread_local FeatureWorkspace ws;
        ws.resize(p.d);
        fill_row(p, bank, pts, sqrt_w, r, staged.row(r).data(), sys.b[r], ws);
    }, 1);
    sys.A = staged;
    check_finite_chunk(sys.A, sys.b, 0, n_pde);
    return sys;
}

Vector solve_ridge(const LinearSystem& sys, double ridge, SolverKind solver,
                   SolveDiagnostics* diag) {
    if (solver == SolverKind::svd_pinv) {
        if (ridge > 0.0) {
            // ridge via the augmented stacked system [A; sqrt(ridge) I]
            const std::int64_t n = sys.A.rows(), M = sys.A.cols();
            Matrix Aug(n + M, M);
            Aug.topRows(n) = sys.A;
            Aug.bottomRows(M) = std::sqrt(ridge) * Matrix::Identity(M, M);
            Vector baug = Vector::Zero(n + M);
            baug.head(n) = sys.b;
            LinearSystem aug{std::move(Aug), std::move(baug), {}};
            return solve_pinv(aug.A, aug.b, diag);
        }
        return solve_pinv(sys.A, sys.b, diag);
    }
    if (!(ridge > 0.0))
        throw std::invalid_argument("solve_ridge: normal_cholesky requires ridge > 0");
    Matrix G = Matrix::Zero(sys.A.cols(), sys.A.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(sys.A.transpose());
    Vector c = sys.A.transpose() * sys.b;
    return solve_normal(G, c, ridge, diag);
}

double TrainedModel::predict(double t, ConstVec x) const {
    if (t < -1e-12 || t > problem.horizon * (1.0 + 1e-12))
        throw std::domain_error("predict: t outside [0, T]");
    thread_local FeatureWorkspace ws;
    thread_local Vector phi;
    ws.resize(problem.d);
    phi.resize(bank.total());
    eval_features_row(bank, problem, std::max(t, 0.0), x, phi.data(), ws);
    return weights.dot(phi);
}

Vector TrainedModel::predict_batch(const RowMatrix& tx) const {
    if (tx.cols() != 1 + problem.d)
        throw std::invalid_argument("predict_batch: expected columns [t, x_1..x_d]");
    Vector out(tx.rows());
    parallel_for(tx.rows(), [&](std::int64_t r) {
        out[r] = predict(tx(r, 0), tx.row(r).tail(problem.d).transpose());
    });
    return out;
}

TrainedModel train(const ProblemSpec& p, const TrainConfig& cfg) {
    using clock = std::chrono::steady_clock;
    p.validate();
    cfg.validate(p);

    TrainedModel m;
    m.problem = p;
    m.config = cfg;

    auto t0 = clock::now();
    m.bank = build_bank(p, cfg.variant, cfg.M0, cfg.M1, cfg.sampler, cfg.seed, cfg.is_scale);
    TrainingPoints pts = sample_training_points(p, cfg, RngState{cfg.seed, 0});
    m.diag.rows_pde = pts.pde_tx.rows();
    m.diag.rows_ic = pts.ic_x.rows();

    const SolverKind solver = cfg.effective_solver();
    const double omega = cfg.effective_ic_weight();

    if (solver == SolverKind::normal_cholesky) {
        NormalSystem sys = assemble_normal(p, m.bank, pts, cfg);
        m.diag.build_seconds = std::chrono::duration<double>(clock::now() - t0).count();

        auto t1 = clock::now();
        m.weights = solve_normal(sys.G, sys.rhs, cfg.ridge, &m.diag.solve);
        m.diag.train_seconds = std::chrono::duration<double>(clock::now() - t1).count();

        // residual diagnostics: total from Gram identities, IC by direct pass
        Vector Gw = sys.G.selfadjointView<Eigen::Lower>() * m.weights;
        double total_sq = m.weights.dot(Gw) - 2.0 * m.weights.dot(sys.rhs) + sys.btb;
        total_sq = std::max(0.0, total_sq);
        double ic_sq = 0.0;
        if (pts.ic_x.rows() > 0) {
            FeatureWorkspace ws;
            ws.resize(p.d);
            Vector phi(m.bank.total());
            for (std::int64_t r = 0; r < pts.ic_x.rows(); ++r) {
                auto x = pts.ic_x.row(r).transpose();
                eval_features_row(m.bank, p, 0.0, x, phi.data(), ws);
                double e = m.weights.dot(phi) - p.u0.value(0.0, x);
                ic_sq += e * e;
            }
            m.diag.ic_rms = std::sqrt(ic_sq / static_cast<double>(pts.ic_x.rows()));
        }
        double pde_sq = std::max(0.0, total_sq - omega * ic_sq);
        if (pts.pde_tx.rows() > 0)
            m.diag.pde_rms = std::sqrt(pde_sq / static_cast<double>(pts.pde_tx.rows()));
    } else {
        LinearSystem sys = assemble_system(p, m.bank, pts, cfg);
        m.diag.build_seconds = std::chrono::duration<double>(clock::now() - t0).count();

        auto t1 = clock::now();
        m.weights = solve_ridge(sys, cfg.ridge, SolverKind::svd_pinv, &m.diag.solve);
        m.diag.train_seconds = std::chrono::duration<double>(clock::now() - t1).count();

        Vector resid = sys.A * m.weights - sys.b;
        const std::int64_t n_pde = pts.pde_tx.rows();
        if (n_pde > 0)
            m.diag.pde_rms = std::sqrt(resid.head(n_pde).squaredNorm() / double(n_pde));
        const std::int64_t n_ic = pts.ic_x.rows();
        if (n_ic > 0) {
            const double w = std::max(omega, 1e-300);
            m.diag.ic_rms = std::sqrt(resid.tail(n_ic).squaredNorm() / w / double(n_ic));
        }
    }
    return m;
}

}  // namespace heatnet
