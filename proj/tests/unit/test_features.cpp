#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "heatnet/features.hpp"
#include "heatnet/mc.hpp"

using namespace heatnet;

namespace {

constexpr double kPi = std::numbers::pi;

Vector random_point(Rng& gen, int d, double half) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = half * (2.0 * gen.uniform() - 1.0);
    return x;
}

/// finite-difference heat operator of the feature map; mask frozen by
/// skipping features whose activation boundary lies near t. Gaussian forcing
/// features can be sharply peaked (length scale sqrt(4 D g(tau))), so the
/// Laplacian stencil is tried at several steps and a feature passes if any
/// step matches.
void check_heat_op_fd(const FeatureBank& b, const ProblemSpec& p, double t, ConstVec x,
                      double tol) {
    FeatureEval an = eval_heat_operator(b, p, t, x);
    const double ht = 3e-6 * std::max(1.0, t);
    FeatureEval fp = eval_features(b, p, t + ht, x);
    FeatureEval fm = eval_features(b, p, t - ht, x);
    Vector ddt = (fp.phi - fm.phi) / (2.0 * ht);

    const double steps[4] = {1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<char> ok(static_cast<std::size_t>(b.total()), 0);
    FeatureEval f0 = eval_features(b, p, t, x);
    double scale = an.heat_op_phi.cwiseAbs().maxCoeff() + 1e-12;
    for (double hx : steps) {
        Vector lap = Vector::Zero(b.total());
        Vector xv = x;
        for (int i = 0; i < p.d; ++i) {
            double xi = xv[i];
            xv[i] = xi + hx;
            FeatureEval fxp = eval_features(b, p, t, xv);
            xv[i] = xi - hx;
            FeatureEval fxm = eval_features(b, p, t, xv);
            xv[i] = xi;
            lap += (fxp.phi - 2.0 * f0.phi + fxm.phi) / (hx * hx);
        }
        for (std::int64_t j = 0; j < b.total(); ++j) {
            double fd = ddt[j] - p.diffusion * lap[j];
            // dt and lap can cancel by orders of magnitude; measure against
            // the term scale (the spec tolerance applies to the parts)
            double terms = std::abs(ddt[j]) + p.diffusion * std::abs(lap[j]);
            double denom = std::max(
                {std::abs(an.heat_op_phi[j]), std::abs(fd), 0.01 * terms, 1e-9 * scale});
            if (std::abs(an.heat_op_phi[j] - fd) <= tol * denom)
                ok[static_cast<std::size_t>(j)] = 1;
        }
    }
    for (std::int64_t j = 0; j < b.total(); ++j) {
        if (b.variant == FeatureVariant::gaussian && j >= b.M0) {
            // skip nodes whose indicator flips inside the stencil
            double tau = b.tau[j - b.M0];
            bool lo = b.tmap.contains(tau, t - 2.0 * ht);
            bool hi = b.tmap.contains(tau, t + 2.0 * ht);
            if (lo != hi) continue;
            if (!lo) continue;  // inactive nodes are exactly zero on both paths
        }
        CHECK(ok[static_cast<std::size_t>(j)] == 1);
    }
}

}  // namespace

TEST_SUITE_BEGIN("features");

TEST_CASE("bank construction freezes reproducible samples") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    FeatureBank a = build_bank(p, FeatureVariant::importance, 16, 24,
                               SamplerKind::pseudo_normal, 42);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 16, 24,
                               SamplerKind::pseudo_normal, 42);
    CHECK((a.eta - b.eta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.xi - b.xi).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.r - b.r).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.r.minCoeff() >= 0.0);
    CHECK(a.r.maxCoeff() < 1.0);

    FeatureBank g = build_bank(p, FeatureVariant::gaussian, 16, 24,
                               SamplerKind::pseudo_uniform, 42);
    for (std::int64_t j = 0; j < g.M1; ++j) CHECK(g.tmap.contains(g.tau[j], p.horizon));
    CHECK(g.y.cwiseAbs().maxCoeff() <= p.box_half_width);
}

TEST_CASE("gaussian tau samples live in [0, sqrt(T)] for d = 1") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1, 1.0, 1.0);
    FeatureBank b = build_bank(p, FeatureVariant::gaussian, 4, 64,
                               SamplerKind::pseudo_uniform, 5);
    CHECK(b.tau.minCoeff() >= 0.0);
    CHECK(b.tau.maxCoeff() <= 1.0);
}

TEST_CASE("ex2a-style bank: importance with M1 = 0") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2a, 2, 1.0, 0.05);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 32, 0,
                               SamplerKind::pseudo_normal, 1);
    CHECK(b.eta.rows() == 32);
    CHECK(b.r.size() == 0);
    FeatureEval e = eval_features(b, p, 0.03, Vector::Zero(2));
    CHECK(e.phi.size() == 32);
}

TEST_CASE("bank construction rejects invalid requests") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    CHECK_THROWS(build_bank(p, FeatureVariant::importance, 0, 0, SamplerKind::pseudo_normal, 0));
    CHECK_THROWS(build_bank(p, FeatureVariant::gaussian, 8, 8, SamplerKind::pseudo_normal, 0));
    CHECK_THROWS(build_bank(p, FeatureVariant::importance, 8, 8, SamplerKind::sobol_uniform, 0));
    // sobol banks need d+1 stream dimensions, so d == table size must fail
    ProblemSpec big = make_benchmark(BenchmarkName::ex2b, SobolSequence::max_dims(), 1.0, 0.5);
    CHECK_THROWS(build_bank(big, FeatureVariant::importance, 2, 2, SamplerKind::sobol_normal, 0));
}

TEST_CASE("sobol banks are deterministic and skip the zero point for normals") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 4, 1.0, 0.5);
    FeatureBank a = build_bank(p, FeatureVariant::importance, 8, 8, SamplerKind::sobol_normal, 7);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 8, 8, SamplerKind::sobol_normal, 99);
    CHECK((a.eta - b.eta).cwiseAbs().maxCoeff() == 0.0);  // seed is recorded, not used
    CHECK(a.eta.allFinite());
    CHECK(a.xi.allFinite());
    // first eta row comes from Sobol point 1 = (0.5, ...) -> all zeros after Phi^-1
    CHECK(a.eta.row(0).cwiseAbs().maxCoeff() == 0.0);

    FeatureBank g = build_bank(p, FeatureVariant::gaussian, 8, 8, SamplerKind::sobol_uniform, 7);
    CHECK(g.y.row(0).cwiseAbs().maxCoeff() == p.box_half_width);  // kept zero point -> corner
}

TEST_CASE("importance features at t = 0") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 8, 8,
                               SamplerKind::pseudo_normal, 3);
    Vector x(3);
    x << 0.2, -0.4, 1.0;
    FeatureEval e = eval_features(b, p, 0.0, x);
    const double u0 = p.u0.value(0.0, x);
    for (std::int64_t j = 0; j < 8; ++j) {
        CHECK(e.phi[j] == doctest::Approx(u0).epsilon(1e-15));
        CHECK(e.phi[8 + j] == 0.0);
    }
}

TEST_CASE("gaussian indicator masks all forcing nodes at small t") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1, 1.0, 1.0);
    FeatureBank b = build_bank(p, FeatureVariant::gaussian, 4, 32,
                               SamplerKind::pseudo_uniform, 11);
    double t_small = 0.5 * b.tau.minCoeff() * b.tau.minCoeff();
    if (t_small == 0.0) t_small = 1e-12;
    FeatureEval e = eval_features(b, p, t_small, Vector::Zero(1));
    for (std::int64_t j = 0; j < 32; ++j) {
        CHECK(e.phi[4 + j] == 0.0);
        CHECK(e.active_mask[static_cast<std::size_t>(4 + j)] == 0);
    }
}

TEST_CASE("single gaussian forcing feature matches the transformed integrand") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1);
    FeatureBank b = build_bank(p, FeatureVariant::gaussian, 0, 1,
                               SamplerKind::pseudo_uniform, 21);
    KernelConsts kc = KernelConsts::make(1, p.diffusion);
    TemporalMap tm = TemporalMap::make(1, p.horizon);
    Rng gen({77, 0});
    for (int rep = 0; rep < 50; ++rep) {
        double t = 0.05 + 0.95 * gen.uniform();
        Vector x = random_point(gen, 1, kPi);
        FeatureEval e = eval_features(b, p, t, x);
        double expected = tm.contains(b.tau[0], t)
                              ? transformed_inner_integrand(kc, tm, t, x, b.tau[0],
                                                            b.z.row(0).transpose(), p.forcing)
                              : 0.0;
        CHECK(e.phi[0] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("mask monotonicity in t") {
    Rng gen({55, 0});
    ProblemSpec p1 = make_benchmark(BenchmarkName::ex1, 1);
    FeatureBank b1 = build_bank(p1, FeatureVariant::gaussian, 0, 64,
                                SamplerKind::pseudo_uniform, 1);
    ProblemSpec p2 = make_benchmark(BenchmarkName::ex2b, 2, 1.0, 1.0);
    FeatureBank b2 = build_bank(p2, FeatureVariant::gaussian, 0, 64,
                                SamplerKind::pseudo_uniform, 1);
    for (int rep = 0; rep < 100; ++rep) {
        double ta = 0.05 + 0.9 * gen.uniform();
        double tb = ta + (1.0 - ta) * gen.uniform();
        for (std::int64_t j = 0; j < 64; ++j) {
            // d = 1: active at the smaller time implies active at the larger
            if (b1.tmap.contains(b1.tau[j], ta)) CHECK(b1.tmap.contains(b1.tau[j], tb));
            // d >= 2: active at the smaller time implies active at the larger
            // (the lower endpoint decreases with t)
            if (b2.tmap.contains(b2.tau[j], ta)) CHECK(b2.tmap.contains(b2.tau[j], tb));
        }
    }
}

TEST_CASE("features are linear in the forcing") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 4, 16,
                               SamplerKind::pseudo_normal, 9);
    const double lambda = -2.5;
    ProblemSpec scaled = p;
    auto base = p.forcing;
    scaled.forcing.value = [base, lambda](double t, ConstVec x) {
        return lambda * base.value(t, x);
    };
    scaled.forcing.dt = [base, lambda](double t, ConstVec x) { return lambda * base.dt(t, x); };
    scaled.forcing.grad = [base, lambda](double t, ConstVec x, Eigen::Ref<Vector> out) {
        base.grad(t, x, out);
        out *= lambda;
    };
    scaled.forcing.lap = [base, lambda](double t, ConstVec x) { return lambda * base.lap(t, x); };

    Vector x(3);
    x << 0.5, -1.0, 0.25;
    FeatureEval e1 = eval_features(b, p, 0.3, x);
    FeatureEval e2 = eval_features(b, scaled, 0.3, x);
    FeatureEval h1 = eval_heat_operator(b, p, 0.3, x);
    FeatureEval h2 = eval_heat_operator(b, scaled, 0.3, x);
    for (std::int64_t j = 0; j < 4; ++j) {
        CHECK(e2.phi[j] == e1.phi[j]);  // phi0 ignores F
    }
    for (std::int64_t j = 4; j < 20; ++j) {
        CHECK(e2.phi[j] == doctest::Approx(lambda * e1.phi[j]).epsilon(1e-14));
        CHECK(h2.heat_op_phi[j] == doctest::Approx(lambda * h1.heat_op_phi[j]).epsilon(1e-13));
    }
}

TEST_CASE("uniform weights reproduce the MC estimators from the same samples") {
    // importance variant, any t
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 32, 48,
                               SamplerKind::pseudo_normal, 77);
    Vector x(3);
    x << 0.4, 0.9, -0.2;
    const double t = 0.35;
    FeatureEval e = eval_features(b, p, t, x);

    std::vector<double> ti(32), tj(48);
    I_is_terms(p, t, x, b.eta, ti);
    J_is_terms(p, t, x, b.r, b.xi, tj);
    double from_terms =
        mc_from_terms(ti).mean + mc_from_terms(tj).mean;
    double from_phi = e.phi.head(32).sum() / 32.0 + e.phi.tail(48).sum() / 48.0;
    CHECK(from_phi == doctest::Approx(from_terms).epsilon(1e-12));

    // gaussian variant ties out at t = T where the sampling domains coincide
    ProblemSpec p1 = make_benchmark(BenchmarkName::ex1, 1);
    FeatureBank g = build_bank(p1, FeatureVariant::gaussian, 40, 56,
                               SamplerKind::pseudo_uniform, 78);
    Vector x1(1);
    x1 << 0.8;
    const double T = p1.horizon;
    FeatureEval eg = eval_features(g, p1, T, x1);
    std::vector<double> gi(40), gj(56);
    I_transformed_terms(p1, T, x1, g.y, gi);
    J_transformed_terms(p1, T, x1, g.tau, g.z, gj);
    const double box = 2.0 * p1.box_half_width;
    const double mu = g.tmap.measure(T);
    double w0 = box / 40.0, w1 = mu * box / 56.0;
    double phi_sum = w0 * eg.phi.head(40).sum() + w1 * eg.phi.tail(56).sum();
    double term_sum = mc_from_terms(gi).mean + mc_from_terms(gj).mean;
    CHECK(phi_sum == doctest::Approx(term_sum).epsilon(1e-12));
}

TEST_CASE("closed-form heat operator matches finite differences") {
    Rng gen({99, 0});
    // both variants on ex1 (d = 1) and ex3 (d = 3, non-separable forcing)
    ProblemSpec p1 = make_benchmark(BenchmarkName::ex1, 1);
    FeatureBank g1 = build_bank(p1, FeatureVariant::gaussian, 12, 20,
                                SamplerKind::pseudo_uniform, 31);
    FeatureBank i1 = build_bank(p1, FeatureVariant::importance, 12, 20,
                                SamplerKind::pseudo_normal, 32);
    ProblemSpec p3 = make_benchmark(BenchmarkName::ex3, 3, 1.0, 0.5);
    FeatureBank g3 = build_bank(p3, FeatureVariant::gaussian, 12, 20,
                                SamplerKind::pseudo_uniform, 33);
    FeatureBank i3 = build_bank(p3, FeatureVariant::importance, 12, 20,
                                SamplerKind::pseudo_normal, 34);
    for (int rep = 0; rep < 25; ++rep) {
        double u = gen.uniform();
        double t1 = 0.05 + 0.95 * u;
        Vector x1 = random_point(gen, 1, kPi / 2);
        check_heat_op_fd(g1, p1, t1, x1, 2e-5);
        check_heat_op_fd(i1, p1, t1, x1, 2e-5);
        double t3 = 0.05 * 0.5 + 0.95 * 0.5 * u;
        Vector x3 = random_point(gen, 3, kPi / 2);
        check_heat_op_fd(g3, p3, t3, x3, 2e-5);
        check_heat_op_fd(i3, p3, t3, x3, 2e-5);
    }
}

TEST_CASE("importance heat operator special cases") {
    // affine u0: lap = 0, only the gradient term remains
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 2, 1.0, 0.5);
    Vector a(2);
    a << 1.5, -0.5;
    p.u0.value = [a](double, ConstVec x) { return a.dot(x); };
    p.u0.grad = [a](double, ConstVec, Eigen::Ref<Vector> out) { out = a; };
    p.u0.lap = [](double, ConstVec) { return 0.0; };
    FeatureBank b = build_bank(p, FeatureVariant::importance, 8, 0,
                               SamplerKind::pseudo_normal, 13);
    const double t = 0.2, D = p.diffusion;
    const double sigma = std::sqrt(2.0 * D * t);
    FeatureEval h = eval_heat_operator(b, p, t, Vector::Zero(2));
    for (std::int64_t j = 0; j < 8; ++j) {
        double expected = a.dot(b.eta.row(j).transpose()) * D / sigma;
        CHECK(h.heat_op_phi[j] == doctest::Approx(expected).epsilon(1e-13));
    }

    // constant forcing: heat operator of phi1 equals F
    ProblemSpec pc = make_benchmark(BenchmarkName::ex2b, 2, 1.0, 0.5);
    pc.forcing.value = [](double, ConstVec) { return 7.25; };
    pc.forcing.dt = [](double, ConstVec) { return 0.0; };
    pc.forcing.grad = [](double, ConstVec, Eigen::Ref<Vector> out) { out.setZero(); };
    pc.forcing.lap = [](double, ConstVec) { return 0.0; };
    FeatureBank bc = build_bank(pc, FeatureVariant::importance, 0, 8,
                                SamplerKind::pseudo_normal, 14);
    FeatureEval hc = eval_heat_operator(bc, pc, 0.3, Vector::Zero(2));
    for (std::int64_t j = 0; j < 8; ++j)
        CHECK(hc.heat_op_phi[j] == doctest::Approx(7.25).epsilon(1e-14));
}

TEST_CASE("evaluation guards") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 2, 1.0, 0.5);
    FeatureBank b = build_bank(p, FeatureVariant::importance, 4, 4,
                               SamplerKind::pseudo_normal, 15);
    CHECK_THROWS(eval_features(b, p, -0.1, Vector::Zero(2)));
    CHECK_THROWS(eval_features(b, p, 0.6, Vector::Zero(2)));
    CHECK_THROWS(eval_features(b, p, 0.1, Vector::Zero(3)));
    CHECK_THROWS(eval_heat_operator(b, p, 1e-9, Vector::Zero(2)));  // below t_floor
}

TEST_SUITE_END();
