#include "heatnet/mc.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "heatnet/quadrature.hpp"

namespace heatnet {

std::string to_string(McMode m) {
    return m == McMode::transformed ? "transformed" : "importance";
}

McMode mc_mode_from_string(const std::string& s) {
    if (s == "transformed") return McMode::transformed;
    if (s == "importance") return McMode::importance;
    throw std::invalid_argument("unknown mc mode: " + s);
}

McEstimate mc_from_terms(std::span<const double> terms) {
    if (terms.empty()) throw std::invalid_argument("mc_from_terms: sample count must be >= 1");
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t n = 0;
    for (double v : terms) {
        ++n;
        double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    McEstimate e;
    e.mean = mean;
    e.n_samples = n;
    e.std_error = n > 1 ? std::sqrt(m2 / (static_cast<double>(n) * (n - 1))) : 0.0;
    return e;
}

namespace {

void check_box_warning(const ProblemSpec& p, ConstVec x) {
    // Truncation bias of the box estimator is < e^{-18} relative when
    // A >= |x|_inf + 6 sqrt(2 D T).
    static std::atomic<bool> warned{false};
    double need = x.cwiseAbs().maxCoeff() + 6.0 * std::sqrt(2.0 * p.diffusion * p.horizon);
    if (p.box_half_width < need && !warned.exchange(true)) {
        std::cerr << "heatnet: warning: box half-width A=" << p.box_half_width
                  << " is below x_max + 6*sqrt(2DT)=" << need
                  << "; transformed-I truncation bias may not be negligible\n";
    }
}

}  // namespace

void I_transformed_terms(const ProblemSpec& p, double t, ConstVec x, const RowMatrix& y,
                         std::span<double> out) {
    const double s4 = std::sqrt(4.0 * p.diffusion * t);
    const double box = std::pow(2.0 * p.box_half_width, p.d);
    const double pref = box * std::pow(std::numbers::pi, -0.5 * p.d);
    Vector pt(p.d);
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
        pt = x + s4 * y.row(j).transpose();
        out[static_cast<std::size_t>(j)] =
            pref * std::exp(-y.row(j).squaredNorm()) * p.u0.value(0.0, pt);
    }
}

void J_transformed_terms(const ProblemSpec& p, double t, ConstVec x, ConstVec tau,
                         const RowMatrix& z, std::span<double> out) {
    const TemporalMap tm = TemporalMap::make(p.d, p.horizon);
    const KernelConsts kc = KernelConsts::make(p.d, p.diffusion);
    const double mu = tm.measure(t);
    const double box = std::pow(2.0 * p.box_half_width, p.d);
    Vector zv(p.d);
    for (Eigen::Index j = 0; j < tau.size(); ++j) {
        zv = z.row(j).transpose();
        const double g = g_of_tau(tm, tau[j]);
        const double r2 = (x - zv).squaredNorm();
        double w = (g > 0.0) ? std::exp(-r2 / (4.0 * p.diffusion * g)) : (r2 == 0.0 ? 1.0 : 0.0);
        out[static_cast<std::size_t>(j)] =
            mu * box * kc.kappa * w * p.forcing.value(t - g, zv);
    }
}

void I_is_terms(const ProblemSpec& p, double t, ConstVec x, const RowMatrix& eta,
                std::span<double> out) {
    const double s = std::sqrt(2.0 * p.diffusion * t);
    Vector pt(p.d);
    for (Eigen::Index j = 0; j < eta.rows(); ++j) {
        pt = x + s * eta.row(j).transpose();
        out[static_cast<std::size_t>(j)] = p.u0.value(0.0, pt);
    }
}

void J_is_terms(const ProblemSpec& p, double t, ConstVec x, ConstVec r, const RowMatrix& xi,
                std::span<double> out) {
    Vector pt(p.d);
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        const double s = r[j] * t;
        const double rho = std::sqrt(2.0 * p.diffusion * (t - s));
        pt = x + rho * xi.row(j).transpose();
        out[static_cast<std::size_t>(j)] = t * p.forcing.value(s, pt);
    }
}

McEstimate estimate_I_transformed(const ProblemSpec& p, double t, ConstVec x, std::int64_t M0,
                                  RngState rng) {
    if (M0 < 1) throw std::invalid_argument("estimate_I_transformed: M0 must be >= 1");
    if (t < 0.0) throw std::domain_error("estimate_I_transformed: t must be >= 0");
    check_box_warning(p, x);
    RowMatrix y = uniform_box(M0, p.d, p.box_half_width, rng);
    std::vector<double> terms(static_cast<std::size_t>(M0));
    I_transformed_terms(p, t, x, y, terms);
    return mc_from_terms(terms);
}

McEstimate estimate_J_transformed(const ProblemSpec& p, double t, ConstVec x, std::int64_t M1,
                                  RngState rng) {
    if (M1 < 1) throw std::invalid_argument("estimate_J_transformed: M1 must be >= 1");
    if (!(t > 0.0)) throw std::domain_error("estimate_J_transformed: t must be > 0");
    const TemporalMap tm = TemporalMap::make(p.d, p.horizon);
    auto [lo, hi] = temporal_domain(tm, t);
    Rng gen(rng);
    Vector tau(M1);
    RowMatrix z(M1, p.d);
    for (std::int64_t j = 0; j < M1; ++j) {
        tau[j] = lo + (hi - lo) * gen.uniform();
        for (int i = 0; i < p.d; ++i)
            z(j, i) = p.box_half_width * (2.0 * gen.uniform() - 1.0);
    }
    std::vector<double> terms(static_cast<std::size_t>(M1));
    J_transformed_terms(p, t, x, tau, z, terms);
    return mc_from_terms(terms);
}

McEstimate estimate_I_is(const ProblemSpec& p, double t, ConstVec x, std::int64_t M0,
                         RngState rng) {
    if (M0 < 1) throw std::invalid_argument("estimate_I_is: M0 must be >= 1");
    if (t < 0.0) throw std::domain_error("estimate_I_is: t must be >= 0");
    RowMatrix eta = std_normal(M0, p.d, rng);
    std::vector<double> terms(static_cast<std::size_t>(M0));
    I_is_terms(p, t, x, eta, terms);
    return mc_from_terms(terms);
}

McEstimate estimate_J_is(const ProblemSpec& p, double t, ConstVec x, std::int64_t M1,
                         RngState rng) {
    if (M1 < 1) throw std::invalid_argument("estimate_J_is: M1 must be >= 1");
    if (!(t > 0.0)) throw std::domain_error("estimate_J_is: t must be > 0");
    Rng gen(rng);
    Vector r(M1);
    RowMatrix xi(M1, p.d);
    for (std::int64_t j = 0; j < M1; ++j) {
        r[j] = gen.uniform();
        for (int i = 0; i < p.d; ++i)
            xi(j, i) = gen.normal();
    }
    std::vector<double> terms(static_cast<std::size_t>(M1));
    J_is_terms(p, t, x, r, xi, terms);
    return mc_from_terms(terms);
}

McEstimate estimate_solution(const ProblemSpec& p, double t, ConstVec x, std::int64_t M0,
                             std::int64_t M1, McMode mode, RngState rng) {
    // Independent substreams for the two component integrals.
    RngState rng_i{rng.seed, rng.stream_id};
    RngState rng_j{rng.seed, rng.stream_id + (1ULL << 48)};
    McEstimate ei, ej;
    if (mode == McMode::transformed) {
        ei = estimate_I_transformed(p, t, x, M0, rng_i);
        ej = (t > 0.0 && M1 > 0) ? estimate_J_transformed(p, t, x, M1, rng_j) : McEstimate{};
    } else {
        ei = estimate_I_is(p, t, x, M0, rng_i);
        ej = (t > 0.0 && M1 > 0) ? estimate_J_is(p, t, x, M1, rng_j) : McEstimate{};
    }
    McEstimate out;
    out.mean = ei.mean + ej.mean;
    out.std_error = std::hypot(ei.std_error, ej.std_error);
    out.n_samples = ei.n_samples + ej.n_samples;
    return out;
}

double quad_reference_1d(const ProblemSpec& p, double t, ConstVec x, double tol) {
    if (p.d != 1) throw std::invalid_argument("quad_reference_1d: requires d = 1");
    if (t < 0.0) throw std::domain_error("quad_reference_1d: t must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("quad_reference_1d: tol must be > 0");

    const double D = p.diffusion;
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    const double window = 9.0;  // exp(-81) tail is far below any useful tol
    const double x0 = x[0];
    Vector pt(1);

    // I(t,x) = int pi^{-1/2} e^{-y^2} u0(x + y sqrt(4Dt)) dy
    const double s4 = std::sqrt(4.0 * D * t);
    auto i_integrand = [&](double yv) {
        Vector q(1);
        q[0] = x0 + yv * s4;
        return inv_sqrt_pi * std::exp(-yv * yv) * p.u0.value(0.0, q);
    };
    double result = integrate(i_integrand, -window, window, 0.25 * tol);

    if (t > 0.0) {
        // J(t,x) = int_0^sqrt(t) (2 tau / sqrt(pi)) int e^{-v^2}
        //          F(t - tau^2, x + 2 sqrt(D) tau v) dv dtau
        const double sqrt_t = std::sqrt(t);
        const double inner_tol = 0.05 * tol / std::max(sqrt_t, 1.0);
        auto outer = [&](double tauv) {
            double scale = 2.0 * std::sqrt(D) * tauv;
            auto inner = [&](double v) {
                Vector q(1);
                q[0] = x0 + scale * v;
                return std::exp(-v * v) * p.forcing.value(t - tauv * tauv, q);
            };
            double iv = integrate(inner, -window, window, inner_tol);
            return 2.0 * tauv * inv_sqrt_pi * iv;
        };
        result += integrate(outer, 0.0, sqrt_t, 0.25 * tol);
    }
    return result;
}

}  // namespace heatnet
