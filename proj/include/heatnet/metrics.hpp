#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "heatnet/problem.hpp"
#include "heatnet/sampling.hpp"

namespace heatnet {

struct RelErrors {
    double rel_l1 = 0.0;
    double rel_l2 = 0.0;
    double rel_linf = 0.0;
};

/// Norm ratios |pred - truth| / |truth| in L1, L2 and Linf over the point set.
/// Throws on length mismatch, empty input or zero-norm truth.
RelErrors rel_errors(ConstVec pred, ConstVec truth);

enum class TestGridMode { grid_1d, random_box };

std::string to_string(TestGridMode m);
TestGridMode test_grid_mode_from_string(const std::string& s);

/// Test points as rows [t, x_1..x_d] over [0, T] x [-A/2, A/2]^d.
/// grid_1d (d = 1 only): inclusive n x n tensor grid with n = round(sqrt(n_test));
/// random_box: n_test uniform samples.
RowMatrix make_test_grid(const ProblemSpec& p, std::int64_t n_test, TestGridMode mode,
                         RngState rng);

/// Linear-interpolation percentiles (P10, P25, P50, P75, P90) of the values.
std::array<double, 5> percentile_bands(std::vector<double> values);

struct ErrorReport {
    double rel_l1 = 0.0;
    double rel_l2 = 0.0;
    double rel_linf = 0.0;
    std::int64_t n_test = 0;
    double build_seconds = 0.0;
    double train_seconds = 0.0;
    std::uint64_t seed = 0;
};

}  // namespace heatnet
