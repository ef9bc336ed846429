#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heatnet/problem.hpp"
#include "heatnet/sampling.hpp"

using namespace heatnet;

namespace {

constexpr double kPi = std::numbers::pi;

Vector random_point(Rng& gen, int d, double half) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = half * (2.0 * gen.uniform() - 1.0);
    return x;
}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// central finite differences of a (t,x)->v map, independent of the bundle's
/// own fallback machinery
double fd_dt(const std::function<double(double, ConstVec)>& f, double t, const Vector& x) {
    double h = 1e-5 * std::max(1.0, std::abs(t));
    return (f(t + h, x) - f(t - h, x)) / (2.0 * h);
}

double fd_lap(const std::function<double(double, ConstVec)>& f, double t, const Vector& x) {
    double acc = 0.0;
    Vector xv = x;
    double f0 = f(t, xv);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = 2e-4 * std::max(1.0, std::abs(x[i]));
        double xi = xv[i];
        xv[i] = xi + h;
        double fp = f(t, xv);
        xv[i] = xi - h;
        double fm = f(t, xv);
        xv[i] = xi;
        acc += (fp - 2.0 * f0 + fm) / (h * h);
    }
    return acc;
}

void check_bundle_derivatives(const ScalarFieldBundle& b, int d, double t_lo, double t_hi,
                              std::uint64_t seed) {
    Rng gen({seed, 0});
    Vector g(d);
    for (int probe = 0; probe < 100; ++probe) {
        double t = t_lo + (t_hi - t_lo) * gen.uniform();
        Vector x = random_point(gen, d, 0.8 * kPi);
        // dt
        if (b.has_dt()) CHECK(rel_close(b.dt(t, x), fd_dt(b.value, t, x), 1e-5));
        // grad
        if (b.has_grad()) {
            b.grad(t, x, g);
            Vector xv = x;
            for (int i = 0; i < d; ++i) {
                double h = 1e-6 * std::max(1.0, std::abs(x[i]));
                double xi = xv[i];
                xv[i] = xi + h;
                double fp = b.value(t, xv);
                xv[i] = xi - h;
                double fm = b.value(t, xv);
                xv[i] = xi;
                CHECK(rel_close(g[i], (fp - fm) / (2.0 * h), 1e-5));
            }
        }
        // lap
        if (b.has_lap()) CHECK(rel_close(b.lap(t, x), fd_lap(b.value, t, x), 1e-4));
    }
}

void check_pde_residual(const ProblemSpec& p, std::uint64_t seed) {
    Rng gen({seed, 1});
    for (int probe = 0; probe < 100; ++probe) {
        double t = 0.05 + 0.9 * p.horizon * gen.uniform();
        Vector x = random_point(gen, p.d, 0.8 * kPi);
        double ut = fd_dt(p.exact, t, x);
        double lap = fd_lap(p.exact, t, x);
        double f = p.forcing.value(t, x);
        double resid = ut - p.diffusion * lap - f;
        CHECK(std::abs(resid) <= 1e-6 * (1.0 + std::abs(f)) + 1e-7 * std::abs(ut));
    }
}

}  // namespace

TEST_SUITE_BEGIN("problem");

TEST_CASE("ex1 closed form") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1);
    Vector x(1);
    x[0] = kPi / 2.0;
    CHECK(p.exact(0.0, x) == doctest::Approx(1.0).epsilon(1e-14));
    // forcing reduces to (1+t) sin(x) at D = 1
    x[0] = 1.0;
    CHECK(p.forcing.value(0.3, x) == doctest::Approx(1.3 * std::sin(1.0)).epsilon(1e-12));
    CHECK(p.u0.value(0.0, x) == doctest::Approx(std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("ex2a closed form at the spec probe") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2a, 2, 1.0, 0.05);
    Vector x(2);
    x << 0.5, 0.5;
    double expected = std::exp(-2.0 * kPi * kPi * 0.05);
    CHECK(p.exact(0.05, x) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(std::abs(expected - 0.372707) < 5e-6);
    CHECK(p.forcing.value(0.01, x) == 0.0);
}

TEST_CASE("ex2b closed form is g(t) S_k(x)") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    Rng gen({5, 0});
    for (int i = 0; i < 20; ++i) {
        double t = 0.5 * gen.uniform();
        Vector x = random_point(gen, 3, kPi);
        double sk = (std::sin(2 * x[0]) + std::sin(2 * x[1]) + std::sin(2 * x[2])) / std::sqrt(3.0);
        double expected = (t + std::exp(-t)) * sk;
        CHECK(p.exact(t, x) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("initial condition consistency: exact(0, x) == u0(x)") {
    for (auto name : {BenchmarkName::ex1, BenchmarkName::ex2a, BenchmarkName::ex2b,
                      BenchmarkName::ex3}) {
        int d = name == BenchmarkName::ex1 ? 1 : 4;
        ProblemSpec p = make_benchmark(name, d, 1.0, 0.5);
        Rng gen({17, 0});
        for (int i = 0; i < 50; ++i) {
            Vector x = random_point(gen, d, kPi);
            CHECK(std::abs(p.exact(0.0, x) - p.u0.value(0.0, x)) < 1e-12);
        }
    }
}

TEST_CASE("bundle analytic derivatives agree with finite differences") {
    for (auto name : {BenchmarkName::ex1, BenchmarkName::ex2a, BenchmarkName::ex2b,
                      BenchmarkName::ex3}) {
        int d = name == BenchmarkName::ex1 ? 1 : 3;
        ProblemSpec p = make_benchmark(name, d, 1.0, 1.0);
        check_bundle_derivatives(p.u0, d, 0.0, 0.0, 21);
        check_bundle_derivatives(p.forcing, d, 0.05, 1.0, 22);
    }
}

TEST_CASE("exact solutions satisfy the PDE residual") {
    check_pde_residual(make_benchmark(BenchmarkName::ex1, 1), 31);
    check_pde_residual(make_benchmark(BenchmarkName::ex2a, 2, 1.0, 0.05), 32);
    check_pde_residual(make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5), 33);
    check_pde_residual(make_benchmark(BenchmarkName::ex3, 3, 1.0, 0.5), 34);
    // ex2b/ex3 stay consistent for non-unit diffusion
    check_pde_residual(make_benchmark(BenchmarkName::ex2b, 2, 0.7, 0.5), 35);
    check_pde_residual(make_benchmark(BenchmarkName::ex3, 2, 1.3, 0.5), 36);
}

TEST_CASE("ex3 forcing matches the finite-difference expansion of the closed form") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex3, 4, 1.0, 0.5);
    Rng gen({41, 0});
    for (int probe = 0; probe < 100; ++probe) {
        double t = 0.05 + 0.9 * gen.uniform() * 0.5;
        Vector x = random_point(gen, 4, 0.8 * kPi);
        double f_fd = fd_dt(p.exact, t, x) - fd_lap(p.exact, t, x);
        CHECK(rel_close(p.forcing.value(t, x), f_fd, 1e-5));
    }
}

TEST_CASE("eval_bundle returns analytic members and finite-difference fallbacks") {
    ProblemSpec p = make_benchmark(BenchmarkName::ex1, 1);
    Vector x0(1);
    x0[0] = 0.0;
    CHECK(eval_bundle(p.u0, BundleMember::value, 0.0, x0) == 0.0);
    CHECK(eval_bundle_grad(p.u0, 0.0, x0)[0] == doctest::Approx(1.0).epsilon(1e-12));

    ScalarFieldBundle constant;
    constant.value = [](double, ConstVec) { return 3.5; };
    CHECK(std::abs(eval_bundle(constant, BundleMember::lap, 0.0, x0)) < 1e-6);
    CHECK(std::abs(eval_bundle(constant, BundleMember::dt, 0.0, x0)) < 1e-9);
    CHECK(std::abs(eval_bundle_grad(constant, 0.0, x0)[0]) < 1e-9);

    Vector bad(2);
    bad.setZero();
    CHECK_THROWS(eval_bundle(p.u0, BundleMember::value, 0.0, bad));
    CHECK_THROWS(eval_bundle_grad(p.forcing, 0.0, bad));
}

TEST_CASE("make_benchmark rejects invalid requests") {
    CHECK_THROWS(make_benchmark(BenchmarkName::ex1, 2));  // ex1 is 1-d
    BenchmarkParams params;
    params.name = BenchmarkName::ex2b;
    params.c = Vector::Zero(3);
    CHECK_THROWS(make_benchmark(params, 3, 1.0, 1.0));  // zero coefficients
    CHECK_THROWS(make_benchmark(BenchmarkName::ex2b, 0));
    CHECK_THROWS(benchmark_from_string("ex9"));
}

TEST_CASE("fingerprint distinguishes problems and is stable") {
    ProblemSpec a = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    ProblemSpec b = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.5);
    ProblemSpec c = make_benchmark(BenchmarkName::ex2b, 3, 1.0, 0.6);
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.fingerprint() != make_benchmark(BenchmarkName::ex3, 3, 1.0, 0.5).fingerprint());
}

TEST_SUITE_END();
