#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "heatnet/metrics.hpp"

using namespace heatnet;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("rel_errors hand-computed cases") {
    Vector t(2), p(2);
    t << 1.0, 1.0;
    p = t;
    RelErrors same = rel_errors(p, t);
    CHECK(same.rel_l1 == 0.0);
    CHECK(same.rel_l2 == 0.0);
    CHECK(same.rel_linf == 0.0);

    RelErrors doubled = rel_errors(2.0 * t, t);
    CHECK(doubled.rel_l1 == doctest::Approx(1.0));
    CHECK(doubled.rel_l2 == doctest::Approx(1.0));
    CHECK(doubled.rel_linf == doctest::Approx(1.0));

    p << 1.0, 0.0;
    RelErrors mixed = rel_errors(p, t);
    CHECK(mixed.rel_l1 == doctest::Approx(0.5));
    CHECK(mixed.rel_l2 == doctest::Approx(1.0 / std::numbers::sqrt2));
    CHECK(mixed.rel_linf == doctest::Approx(1.0));

    Vector zero = Vector::Zero(2);
    CHECK_THROWS(rel_errors(p, zero));
    Vector three = Vector::Zero(3);
    CHECK_THROWS(rel_errors(p, three));
}

TEST_CASE("rel_errors scale and permutation invariance") {
    Rng gen({2, 0});
    Vector t(40), p(40);
    for (int i = 0; i < 40; ++i) {
        t[i] = gen.normal() + 2.0;
        p[i] = t[i] + 0.1 * gen.normal();
    }
    RelErrors base = rel_errors(p, t);
    RelErrors scaled = rel_errors(-3.0 * p, -3.0 * t);
    CHECK(scaled.rel_l1 == doctest::Approx(base.rel_l1).epsilon(1e-12));
    CHECK(scaled.rel_l2 == doctest::Approx(base.rel_l2).epsilon(1e-12));
    CHECK(scaled.rel_linf == doctest::Approx(base.rel_linf).epsilon(1e-12));

    std::vector<int> idx(40);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), std::mt19937(5));
    Vector tp(40), pp(40);
    for (int i = 0; i < 40; ++i) {
        tp[i] = t[idx[i]];
        pp[i] = p[idx[i]];
    }
    RelErrors perm = rel_errors(pp, tp);
    CHECK(perm.rel_l1 == doctest::Approx(base.rel_l1).epsilon(1e-12));
    CHECK(perm.rel_l2 == doctest::Approx(base.rel_l2).epsilon(1e-12));
    CHECK(perm.rel_linf == doctest::Approx(base.rel_linf).epsilon(1e-12));
}

TEST_CASE("test grids") {
    ProblemSpec p1 = make_benchmark(BenchmarkName::ex1, 1);
    RowMatrix grid = make_test_grid(p1, 10000, TestGridMode::grid_1d, {0, 0});
    CHECK(grid.rows() == 10000);
    CHECK(grid(0, 0) == 0.0);
    CHECK(grid(0, 1) == doctest::Approx(-std::numbers::pi / 2));
    CHECK(grid(grid.rows() - 1, 0) == doctest::Approx(1.0));
    CHECK(grid(grid.rows() - 1, 1) == doctest::Approx(std::numbers::pi / 2));

    ProblemSpec p100 = make_benchmark(BenchmarkName::ex2b, 100, 1.0, 0.5);
    RowMatrix rb = make_test_grid(p100, 6000, TestGridMode::random_box, {1, 0});
    CHECK(rb.rows() == 6000);
    CHECK(rb.col(0).minCoeff() >= 0.0);
    CHECK(rb.col(0).maxCoeff() <= 0.5);
    CHECK(rb.rightCols(100).cwiseAbs().maxCoeff() <= std::numbers::pi / 2);
    RowMatrix rb2 = make_test_grid(p100, 6000, TestGridMode::random_box, {1, 0});
    CHECK((rb - rb2).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS(make_test_grid(p100, 100, TestGridMode::grid_1d, {0, 0}));
    CHECK_THROWS(make_test_grid(p1, 0, TestGridMode::grid_1d, {0, 0}));
}

TEST_CASE("percentile bands") {
    auto constant = percentile_bands(std::vector<double>(7, 3.25));
    for (double v : constant) CHECK(v == 3.25);

    std::vector<double> v(20);
    std::iota(v.begin(), v.end(), 1.0);
    std::shuffle(v.begin(), v.end(), std::mt19937(3));
    auto bands = percentile_bands(v);
    CHECK(bands[2] == doctest::Approx(10.5));  // interpolated median of 1..20
    CHECK(bands[0] <= bands[1]);
    CHECK(bands[1] <= bands[2]);
    CHECK(bands[2] <= bands[3]);
    CHECK(bands[3] <= bands[4]);

    CHECK_THROWS(percentile_bands(std::vector<double>{1.0}));
}

TEST_SUITE_END();
