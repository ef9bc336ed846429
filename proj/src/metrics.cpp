#include "heatnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heatnet {

RelErrors rel_errors(ConstVec pred, ConstVec truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("rel_errors: length mismatch");
    if (pred.size() < 1) throw std::invalid_argument("rel_errors: empty input");
    double e1 = 0.0, u1 = 0.0, e2 = 0.0, u2 = 0.0, einf = 0.0, uinf = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        double e = std::abs(pred[i] - truth[i]);
        double u = std::abs(truth[i]);
        e1 += e;
        u1 += u;
        e2 += e * e;
        u2 += u * u;
        einf = std::max(einf, e);
        uinf = std::max(uinf, u);
    }
    if (!(u1 > 0.0) || !(u2 > 0.0) || !(uinf > 0.0))
        throw std::invalid_argument("rel_errors: zero-norm truth");
    return {e1 / u1, std::sqrt(e2) / std::sqrt(u2), einf / uinf};
}

std::string to_string(TestGridMode m) {
    return m == TestGridMode::grid_1d ? "grid_1d" : "random_box";
}

TestGridMode test_grid_mode_from_string(const std::string& s) {
    if (s == "grid_1d") return TestGridMode::grid_1d;
    if (s == "random_box") return TestGridMode::random_box;
    throw std::invalid_argument("unknown test grid mode: " + s);
}

RowMatrix make_test_grid(const ProblemSpec& p, std::int64_t n_test, TestGridMode mode,
                         RngState rng) {
    if (n_test < 1) throw std::invalid_argument("make_test_grid: n_test must be >= 1");
    const double half = 0.5 * p.box_half_width;
    if (mode == TestGridMode::grid_1d) {
        if (p.d != 1) throw std::invalid_argument("make_test_grid: grid_1d requires d = 1");
        const std::int64_t n = std::max<std::int64_t>(
            2, std::llround(std::sqrt(static_cast<double>(n_test))));
        RowMatrix out(n * n, 2);
        for (std::int64_t i = 0; i < n; ++i) {
            double t = p.horizon * static_cast<double>(i) / static_cast<double>(n - 1);
            for (std::int64_t j = 0; j < n; ++j) {
                double x = -half + 2.0 * half * static_cast<double>(j) / static_cast<double>(n - 1);
                out(i * n + j, 0) = t;
                out(i * n + j, 1) = x;
            }
        }
        return out;
    }
    Rng gen(RngState{rng.seed, rng.stream_id + 3});  // stream 3: test grid
    RowMatrix out(n_test, 1 + p.d);
    for (std::int64_t k = 0; k < n_test; ++k) {
        out(k, 0) = p.horizon * gen.uniform();
        for (int i = 0; i < p.d; ++i)
            out(k, 1 + i) = half * (2.0 * gen.uniform() - 1.0);
    }
    return out;
}

std::array<double, 5> percentile_bands(std::vector<double> values) {
    if (values.size() < 2)
        throw std::invalid_argument("percentile_bands: needs at least 2 values");
    std::sort(values.begin(), values.end());
    auto pct = [&](double q) {
        double h = (static_cast<double>(values.size()) - 1.0) * q;
        std::size_t lo = static_cast<std::size_t>(h);
        if (lo + 1 >= values.size()) return values.back();
        double frac = h - static_cast<double>(lo);
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };
    return {pct(0.10), pct(0.25), pct(0.50), pct(0.75), pct(0.90)};
}

}  // namespace heatnet
