#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heatnet/kernels.hpp"
#include "heatnet/quadrature.hpp"
#include "heatnet/sampling.hpp"

using namespace heatnet;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE_BEGIN("kernels");

TEST_CASE("heat kernel prefactor identities") {
    Vector x1(1), z1(1);
    x1 << 0.3;
    z1 << 0.3;
    CHECK(heat_kernel(1.0 / (4.0 * kPi), x1, 0.0, z1, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));

    Vector x2(2), z2(2);
    x2 << 0.1, -0.2;
    z2 = x2;
    CHECK(heat_kernel(1.0, x2, 0.0, z2, 1.0) ==
          doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("heat kernel indicator, symmetry and singularity") {
    Vector x(2), z(2);
    x << 0.4, 0.0;
    z << -0.1, 0.6;
    CHECK(heat_kernel(0.5, x, 0.7, z, 1.0) == 0.0);  // s > t
    CHECK(heat_kernel(0.5, x, 0.5, z, 1.0) == 0.0);  // s == t, x != z
    CHECK(heat_kernel(0.9, x, 0.2, z, 0.7) ==
          doctest::Approx(heat_kernel(0.9, z, 0.2, x, 0.7)).epsilon(1e-15));
    CHECK_THROWS(heat_kernel(0.5, x, 0.5, x, 1.0));  // on-diagonal singularity
    Vector w(3);
    w.setZero();
    CHECK_THROWS(heat_kernel(0.5, x, 0.0, w, 1.0));  // dimension mismatch
}

TEST_CASE("heat kernel integrates to one in z (d = 1)") {
    const double t = 0.37, s = 0.12, D = 0.8, x0 = 0.45;
    Vector x(1), z(1);
    x << x0;
    const double sigma = std::sqrt(2.0 * D * (t - s));
    auto f = [&](double zv) {
        Vector zz(1);
        zz << zv;
        return heat_kernel(t, x, s, zz, D);
    };
    double mass = integrate(f, x0 - 10.0 * sigma, x0 + 10.0 * sigma, 1e-11);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("heat kernel solves the heat equation (finite differences)") {
    Rng gen({3, 0});
    for (int d : {1, 2, 3}) {
        Vector x(d), z(d);
        for (int rep = 0; rep < 20; ++rep) {
            double dt = 0.1 + 0.9 * gen.uniform();
            double D = 0.5 + gen.uniform();
            for (int i = 0; i < d; ++i) {
                x[i] = 2.0 * gen.uniform() - 1.0;
                z[i] = 2.0 * gen.uniform() - 1.0;
            }
            const double ht = 1e-5;
            double ddt = (heat_kernel(dt + ht, x, 0.0, z, D) -
                          heat_kernel(dt - ht, x, 0.0, z, D)) /
                         (2.0 * ht);
            double lap = 0.0;
            const double hx = 1e-4;
            double g0 = heat_kernel(dt, x, 0.0, z, D);
            for (int i = 0; i < d; ++i) {
                Vector xp = x, xm = x;
                xp[i] += hx;
                xm[i] -= hx;
                lap += (heat_kernel(dt, xp, 0.0, z, D) - 2.0 * g0 +
                        heat_kernel(dt, xm, 0.0, z, D)) /
                       (hx * hx);
            }
            double scale = std::abs(ddt) + D * std::abs(lap) + 1e-12;
            CHECK(std::abs(ddt - D * lap) / scale < 1e-4);
        }
    }
}

TEST_CASE("temporal domain per dimension") {
    TemporalMap t1 = TemporalMap::make(1, 1.0);
    auto [lo1, hi1] = temporal_domain(t1, 0.25);
    CHECK(lo1 == 0.0);
    CHECK(hi1 == doctest::Approx(0.5).epsilon(1e-15));

    TemporalMap t2 = TemporalMap::make(2, 1.0);
    t2.trunc_upper = 20.0;
    auto [lo2, hi2] = temporal_domain(t2, 1.0);
    CHECK(lo2 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(hi2 == 20.0);

    TemporalMap t4 = TemporalMap::make(4, 1.0);
    CHECK(t4.alpha == doctest::Approx(-1.0));
    t4.trunc_upper = 50.0;
    auto [lo4, hi4] = temporal_domain(t4, 0.5);
    CHECK(lo4 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(hi4 == 50.0);

    CHECK_THROWS(temporal_domain(t1, 0.0));
    CHECK_THROWS(temporal_domain(t1, -0.5));
    // below the truncation cutoff the d >= 2 domain is empty
    TemporalMap t2b = TemporalMap::make(2, 1.0);
    CHECK_THROWS(temporal_domain(t2b, 1e-12));
}

TEST_CASE("g_of_tau per dimension") {
    TemporalMap t1 = TemporalMap::make(1, 1.0);
    CHECK(g_of_tau(t1, 0.3) == doctest::Approx(0.09).epsilon(1e-15));
    TemporalMap t2 = TemporalMap::make(2, 1.0);
    CHECK(g_of_tau(t2, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    TemporalMap t4 = TemporalMap::make(4, 1.0);
    CHECK(g_of_tau(t4, 4.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("g maps the domain onto (0, t] with the right monotonicity") {
    for (int d : {1, 2, 5}) {
        TemporalMap tm = TemporalMap::make(d, 1.0);
        for (double t : {0.2, 0.7, 1.0}) {
            auto [lo, hi] = temporal_domain(tm, t);
            double g_lo = g_of_tau(tm, lo);
            double g_hi = g_of_tau(tm, hi);
            if (d == 1) {
                CHECK(g_lo == 0.0);
                CHECK(g_hi == doctest::Approx(t).epsilon(1e-12));
            } else {
                CHECK(g_lo == doctest::Approx(t).epsilon(1e-12));
                CHECK(g_hi <= TemporalMap::trunc_eps * tm.horizon * (1.0 + 1e-9));
                CHECK(g_hi > 0.0);
            }
        }
    }
}

TEST_CASE("activation monotonicity of the domain membership") {
    Rng gen({13, 0});
    for (int d : {1, 2, 4}) {
        TemporalMap tm = TemporalMap::make(d, 1.0);
        for (int rep = 0; rep < 200; ++rep) {
            double t_small = 0.05 + 0.4 * gen.uniform();
            double t_big = t_small + (1.0 - t_small) * gen.uniform();
            double u = gen.uniform();
            if (d == 1) {
                // tau in D(t') implies tau in D(t) for t' <= t
                double tau = tm.upper(t_small) * u;
                CHECK(tm.contains(tau, t_small));
                CHECK(tm.contains(tau, t_big));
            } else {
                // tau in D(t) implies tau in D(t') for t' >= t
                double tau = tm.lower(t_small) + (tm.upper(t_small) - tm.lower(t_small)) * u;
                CHECK(tm.contains(tau, t_small));
                CHECK(tm.contains(tau, t_big));
            }
        }
    }
}

TEST_CASE("transformed integrand constants") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1);
    TemporalMap tm = TemporalMap::make(1, p.horizon);
    KernelConsts kc = KernelConsts::make(1, 1.0);
    CHECK(kc.kappa == doctest::Approx(2.0 / std::sqrt(4.0 * kPi)).epsilon(1e-15));
    CHECK(std::abs(kc.kappa - 0.564190) < 1e-6);

    Vector x(1), z(1);
    x << 0.4;
    z << 0.4;
    ScalarFieldBundle one;
    one.value = [](double, ConstVec) { return 1.0; };
    CHECK(transformed_inner_integrand(kc, tm, 0.5, x, 0.3, z, one) ==
          doctest::Approx(kc.kappa).epsilon(1e-15));

    ScalarFieldBundle zero;
    zero.value = [](double, ConstVec) { return 0.0; };
    CHECK(transformed_inner_integrand(kc, tm, 0.5, x, 0.3, z, zero) == 0.0);
    CHECK_THROWS(transformed_inner_integrand(kc, tm, 0.5, x, 0.9, z, one));  // tau > sqrt(t)
}

TEST_CASE("d=1 change of variables matches the untransformed integral") {
    // transformed J over D(t) x [-A, A] vs untransformed over [0, t-eps] x [-A, A]
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1);
    TemporalMap tm = TemporalMap::make(1, p.horizon);
    KernelConsts kc = KernelConsts::make(1, p.diffusion);
    const double t = 0.5, A = p.box_half_width, eps = 1e-8;
    Vector x(1);
    x << 1.0;

    // The inner integrand is a Gaussian of width sqrt(4 D (t-s)) around x;
    // restrict the z-quadrature to x +- 10 widths (the remainder of the box
    // carries < e^{-100} of the mass) so the spike cannot slip between nodes.
    auto window = [&](double width, double& lo, double& hi) {
        lo = std::max(-A, x[0] - 10.0 * width);
        hi = std::min(A, x[0] + 10.0 * width);
    };
    auto transformed_outer = [&](double tau) {
        auto inner = [&](double zv) {
            Vector z(1);
            z << zv;
            return transformed_inner_integrand(kc, tm, t, x, tau, z, p.forcing);
        };
        double lo, hi;
        window(std::sqrt(4.0 * p.diffusion) * tau, lo, hi);
        if (!(hi > lo)) return 0.0;
        return integrate(inner, lo, hi, 1e-11);
    };
    double transformed = integrate(transformed_outer, 0.0, std::sqrt(t), 1e-10);

    auto untransformed_outer = [&](double s) {
        auto inner = [&](double zv) {
            Vector z(1);
            z << zv;
            return heat_kernel(t, x, s, z, p.diffusion) * p.forcing.value(s, z);
        };
        double lo, hi;
        window(std::sqrt(4.0 * p.diffusion * (t - s)), lo, hi);
        if (!(hi > lo)) return 0.0;
        return integrate(inner, lo, hi, 1e-11);
    };
    double untransformed = integrate(untransformed_outer, 0.0, t - eps, 1e-10);

    // the dropped [t-eps, t] sliver carries at most eps * max|F|
    double f_max = 2.5;  // |(1+t) sin x| <= 2 on [0,1] x [-pi,pi], with margin
    CHECK(std::abs(transformed - untransformed) <= eps * f_max + 1e-6);
}

TEST_SUITE_END();
