#include "heatnet/features.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heatnet {

std::string to_string(FeatureVariant v) {
    return v == FeatureVariant::gaussian ? "gaussian" : "importance";
}

std::string to_string(IsScale s) { return s == IsScale::sqrt2Dt ? "sqrt2Dt" : "sqrt4Dt"; }

FeatureVariant variant_from_string(const std::string& s) {
    if (s == "gaussian") return FeatureVariant::gaussian;
    if (s == "importance") return FeatureVariant::importance;
    throw std::invalid_argument("unknown feature variant: " + s);
}

IsScale is_scale_from_string(const std::string& s) {
    if (s == "sqrt2Dt") return IsScale::sqrt2Dt;
    if (s == "sqrt4Dt") return IsScale::sqrt4Dt;
    throw std::invalid_argument("unknown is_scale: " + s);
}

double default_t_floor(const ProblemSpec& p) { return 1e-3 * p.horizon; }

void FeatureBank::finalize(const ProblemSpec& p) {
    tmap = TemporalMap::make(p.d, p.horizon);
    consts = KernelConsts::make(p.d, p.diffusion);
    problem_fingerprint = p.fingerprint();
    if (variant == FeatureVariant::gaussian) {
        const double pid = std::pow(std::numbers::pi, -0.5 * p.d);
        pref0.resize(M0);
        for (std::int64_t j = 0; j < M0; ++j)
            pref0[j] = pid * std::exp(-y.row(j).squaredNorm());
        g_tau.resize(M1);
        for (std::int64_t j = 0; j < M1; ++j) g_tau[j] = g_of_tau(tmap, tau[j]);
    } else {
        pref0.resize(0);
        g_tau.resize(0);
    }
}

FeatureBank build_bank(const ProblemSpec& p, FeatureVariant variant, std::int64_t M0,
                       std::int64_t M1, SamplerKind sampler, std::uint64_t seed,
                       IsScale is_scale) {
    p.validate();
    if (M0 < 0 || M1 < 0 || M0 + M1 < 1)
        throw std::invalid_argument("build_bank: needs M0 >= 0, M1 >= 0, M0 + M1 >= 1");
    if (variant == FeatureVariant::gaussian && sampler_is_normal(sampler))
        throw std::invalid_argument("build_bank: gaussian variant requires a uniform sampler");
    if (variant == FeatureVariant::importance && !sampler_is_normal(sampler))
        throw std::invalid_argument("build_bank: importance variant requires a normal sampler");

    FeatureBank b;
    b.variant = variant;
    b.M0 = M0;
    b.M1 = M1;
    b.d = p.d;
    b.is_scale = is_scale;
    b.sampler = sampler;
    b.seed = seed;

    const TemporalMap tm = TemporalMap::make(p.d, p.horizon);
    const double tau_lo = tm.lower(p.horizon);
    const double tau_hi = tm.upper(p.horizon);
    const double A = p.box_half_width;

    if (sampler_is_sobol(sampler)) {
        // One Sobol stream of dimension d+1: block [0, M0) covers the
        // initial-condition samples (coords 0..d-1), block [M0, M0+M1) the
        // forcing samples (coord 0 is temporal, coords 1..d spatial). Normal
        // blocks start at index 1: only point 0 carries zero coordinates.
        const std::int64_t skip = sampler == SamplerKind::sobol_normal ? 1 : 0;
        SobolSequence seq(p.d + 1, skip);
        std::vector<double> u(static_cast<std::size_t>(p.d) + 1);
        if (variant == FeatureVariant::gaussian) {
            b.y.resize(M0, p.d);
            for (std::int64_t j = 0; j < M0; ++j) {
                seq.next(u.data());
                for (int i = 0; i < p.d; ++i) b.y(j, i) = A * (2.0 * u[i] - 1.0);
            }
            b.tau.resize(M1);
            b.z.resize(M1, p.d);
            for (std::int64_t j = 0; j < M1; ++j) {
                seq.next(u.data());
                b.tau[j] = tau_lo + (tau_hi - tau_lo) * u[0];
                for (int i = 0; i < p.d; ++i) b.z(j, i) = A * (2.0 * u[i + 1] - 1.0);
            }
        } else {
            b.eta.resize(M0, p.d);
            for (std::int64_t j = 0; j < M0; ++j) {
                seq.next(u.data());
                for (int i = 0; i < p.d; ++i) b.eta(j, i) = inverse_normal_cdf(u[i]);
            }
            b.r.resize(M1);
            b.xi.resize(M1, p.d);
            for (std::int64_t j = 0; j < M1; ++j) {
                seq.next(u.data());
                b.r[j] = u[0];
                for (int i = 0; i < p.d; ++i) b.xi(j, i) = inverse_normal_cdf(u[i + 1]);
            }
        }
    } else {
        Rng gen(RngState{seed, 0});  // stream 0: feature bank
        if (variant == FeatureVariant::gaussian) {
            b.y.resize(M0, p.d);
            for (std::int64_t j = 0; j < M0; ++j)
                for (int i = 0; i < p.d; ++i) b.y(j, i) = A * (2.0 * gen.uniform() - 1.0);
            b.tau.resize(M1);
            b.z.resize(M1, p.d);
            for (std::int64_t j = 0; j < M1; ++j) {
                b.tau[j] = tau_lo + (tau_hi - tau_lo) * gen.uniform();
                for (int i = 0; i < p.d; ++i) b.z(j, i) = A * (2.0 * gen.uniform() - 1.0);
            }
        } else {
            b.eta.resize(M0, p.d);
            for (std::int64_t j = 0; j < M0; ++j)
                for (int i = 0; i < p.d; ++i) b.eta(j, i) = gen.normal();
            b.r.resize(M1);
            b.xi.resize(M1, p.d);
            for (std::int64_t j = 0; j < M1; ++j) {
                b.r[j] = gen.uniform();
                for (int i = 0; i < p.d; ++i) b.xi(j, i) = gen.normal();
            }
        }
    }

    b.finalize(p);
    return b;
}

void eval_features_row(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                       double* out, FeatureWorkspace& ws) {
    const double D = p.diffusion;
    if (b.variant == FeatureVariant::gaussian) {
        const double s4 = std::sqrt(4.0 * D * t);
        for (std::int64_t j = 0; j < b.M0; ++j) {
            ws.point = x + s4 * b.y.row(j).transpose();
            out[j] = b.pref0[j] * p.u0.value(0.0, ws.point);
        }
        for (std::int64_t j = 0; j < b.M1; ++j) {
            if (!b.tmap.contains(b.tau[j], t)) {
                out[b.M0 + j] = 0.0;
                continue;
            }
            const double g = b.g_tau[j];
            ws.point = b.z.row(j).transpose();
            const double r2 = (x - ws.point).squaredNorm();
            double w = (g > 0.0) ? std::exp(-r2 / (4.0 * D * g)) : (r2 == 0.0 ? 1.0 : 0.0);
            out[b.M0 + j] = b.consts.kappa * w * p.forcing.value(t - g, ws.point);
        }
    } else {
        const double cs = b.is_scale == IsScale::sqrt2Dt ? 2.0 : 4.0;
        const double sigma = std::sqrt(cs * D * t);
        for (std::int64_t j = 0; j < b.M0; ++j) {
            ws.point = x + sigma * b.eta.row(j).transpose();
            out[j] = p.u0.value(0.0, ws.point);
        }
        for (std::int64_t j = 0; j < b.M1; ++j) {
            const double s = b.r[j] * t;
            const double rho = std::sqrt(2.0 * D * (t - s));
            ws.point = x + rho * b.xi.row(j).transpose();
            out[b.M0 + j] = t * p.forcing.value(s, ws.point);
        }
    }
}

void eval_heat_op_row(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                      double* out, FeatureWorkspace& ws) {
    const double D = p.diffusion;
    if (b.variant == FeatureVariant::gaussian) {
        const double s4 = std::sqrt(4.0 * D * t);
        const double dsig = std::sqrt(D / t);  // d/dt of sqrt(4Dt) along y
        for (std::int64_t j = 0; j < b.M0; ++j) {
            ws.point = x + s4 * b.y.row(j).transpose();
            p.u0.eval_grad(0.0, ws.point, ws.grad);
            const double ddt = b.pref0[j] * dsig * ws.grad.dot(b.y.row(j).transpose());
            const double lap = b.pref0[j] * p.u0.eval_lap(0.0, ws.point);
            out[j] = ddt - D * lap;
        }
        for (std::int64_t j = 0; j < b.M1; ++j) {
            if (!b.tmap.contains(b.tau[j], t)) {
                out[b.M0 + j] = 0.0;
                continue;
            }
            const double g = b.g_tau[j];
            ws.point = b.z.row(j).transpose();
            const double r2 = (x - ws.point).squaredNorm();
            double w = (g > 0.0) ? std::exp(-r2 / (4.0 * D * g)) : (r2 == 0.0 ? 1.0 : 0.0);
            const double ts = t - g;
            const double f_t = p.forcing.eval_dt(ts, ws.point);
            const double f_v = p.forcing.value(ts, ws.point);
            const double lap_factor = r2 / (4.0 * D * D * g * g) - p.d / (2.0 * D * g);
            out[b.M0 + j] = b.consts.kappa * w * (f_t - D * lap_factor * f_v);
        }
    } else {
        const double cs = b.is_scale == IsScale::sqrt2Dt ? 2.0 : 4.0;
        const double sigma = std::sqrt(cs * D * t);
        const double dsigma = cs * D / (2.0 * sigma);
        for (std::int64_t j = 0; j < b.M0; ++j) {
            ws.point = x + sigma * b.eta.row(j).transpose();
            p.u0.eval_grad(0.0, ws.point, ws.grad);
            const double ddt = dsigma * ws.grad.dot(b.eta.row(j).transpose());
            out[j] = ddt - D * p.u0.eval_lap(0.0, ws.point);
        }
        for (std::int64_t j = 0; j < b.M1; ++j) {
            const double rj = b.r[j];
            const double s = rj * t;
            const double rho = std::sqrt(2.0 * D * (t - s));
            ws.point = x + rho * b.xi.row(j).transpose();
            const double f_v = p.forcing.value(s, ws.point);
            const double f_t = p.forcing.eval_dt(s, ws.point);
            // t * d(rho)/dt = sqrt(D t (1-r) / 2): finite all the way to r = 1
            const double grad_coef = std::sqrt(std::max(0.0, D * t * (1.0 - rj) * 0.5));
            double grad_term = 0.0;
            if (grad_coef > 0.0) {
                p.forcing.eval_grad(s, ws.point, ws.grad);
                grad_term = grad_coef * ws.grad.dot(b.xi.row(j).transpose());
            }
            const double ddt = f_v + t * rj * f_t + grad_term;
            out[b.M0 + j] = ddt - D * t * p.forcing.eval_lap(s, ws.point);
        }
    }
}

FeatureEval eval_features(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x) {
    if (x.size() != p.d) throw std::invalid_argument("eval_features: dimension mismatch");
    if (t < 0.0 || t > p.horizon * (1.0 + 1e-12))
        throw std::domain_error("eval_features: t outside [0, T]");
    FeatureEval e;
    e.phi.resize(b.total());
    e.active_mask.assign(static_cast<std::size_t>(b.total()), 1);
    FeatureWorkspace ws;
    ws.resize(p.d);
    eval_features_row(b, p, t, x, e.phi.data(), ws);
    if (b.variant == FeatureVariant::gaussian)
        for (std::int64_t j = 0; j < b.M1; ++j)
            e.active_mask[static_cast<std::size_t>(b.M0 + j)] = b.tmap.contains(b.tau[j], t);
    return e;
}

FeatureEval eval_heat_operator(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                               double t_floor) {
    if (x.size() != p.d) throw std::invalid_argument("eval_heat_operator: dimension mismatch");
    if (t_floor < 0.0) t_floor = default_t_floor(p);
    if (t < t_floor || t > p.horizon * (1.0 + 1e-12))
        throw std::domain_error("eval_heat_operator: t outside [t_floor, T]");
    FeatureEval e;
    e.heat_op_phi.resize(b.total());
    e.active_mask.assign(static_cast<std::size_t>(b.total()), 1);
    FeatureWorkspace ws;
    ws.resize(p.d);
    eval_heat_op_row(b, p, t, x, e.heat_op_phi.data(), ws);
    if (b.variant == FeatureVariant::gaussian)
        for (std::int64_t j = 0; j < b.M1; ++j)
            e.active_mask[static_cast<std::size_t>(b.M0 + j)] = b.tmap.contains(b.tau[j], t);
    return e;
}

}  // namespace heatnet
