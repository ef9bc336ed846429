#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace heatnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Sample blocks are stored row-major so that row j (one draw of dimension d)
/// is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Seed plus substream id. The same (seed, stream_id) pair reproduces the
/// identical sequence on every platform: the engine is std::mt19937_64 (fully
/// specified by the standard), seeded through splitmix64, and all variate
/// transforms below avoid the implementation-defined std::*_distribution
/// classes. Stream assignments used by the library:
///   0 feature bank, 1 PDE collocation, 2 IC collocation, 3 test grid,
///   4+k MC estimation of point k.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic pseudo-random stream; thin wrapper around mt19937_64.
class Rng {
public:
    explicit Rng(RngState s)
        : engine_(detail::splitmix64(detail::splitmix64(s.seed) ^
                                     detail::splitmix64(s.stream_id + 0x5851f42d4c957f2dULL))) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1), strictly interior; safe as a quantile argument.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse CDF.
    double normal();

private:
    std::mt19937_64 engine_;
};

enum class SamplerKind { pseudo_uniform, pseudo_normal, sobol_uniform, sobol_normal };

std::string to_string(SamplerKind k);
SamplerKind sampler_from_string(const std::string& s);
inline bool sampler_is_sobol(SamplerKind k) {
    return k == SamplerKind::sobol_uniform || k == SamplerKind::sobol_normal;
}
inline bool sampler_is_normal(SamplerKind k) {
    return k == SamplerKind::pseudo_normal || k == SamplerKind::sobol_normal;
}

/// Phi^{-1}(p) for p in (0,1), absolute error below 1e-9 (rational
/// approximation refined by one Halley step on erfc). Throws outside (0,1).
double inverse_normal_cdf(double p);

/// n x d matrix with i.i.d. Unif[-half_width, half_width) entries.
RowMatrix uniform_box(std::int64_t n, int d, double half_width, RngState rng);

/// n x d matrix with i.i.d. standard normal entries.
RowMatrix std_normal(std::int64_t n, int d, RngState rng);

/// Sobol sequence (Joe-Kuo D(6) direction numbers), points in [0,1)^d.
///
/// Deterministic in the point index; point 0 is the all-zeros point. The
/// table covers sobol_max_dims() dimensions; beyond that the constructor
/// throws.
class SobolSequence {
public:
    explicit SobolSequence(int d, std::int64_t skip = 0);

    /// Next point, written into out[0..d).
    void next(double* out);

    int dim() const { return d_; }

    static int max_dims();

private:
    int d_;
    std::int64_t index_;
    std::vector<std::uint32_t> state_;  // current XOR state per dimension
    std::vector<std::uint32_t> v_;      // direction numbers, d_ x 32
};

/// First n Sobol points after skipping `skip`, as an n x d matrix.
RowMatrix sobol_unit(std::int64_t n, int d, std::int64_t skip = 0);

namespace detail {
extern const int sobol_table_dims;
extern const std::uint32_t sobol_poly[];
extern const std::uint32_t sobol_minit_offset[];
extern const std::uint32_t sobol_minit[];
}  // namespace detail

}  // namespace heatnet
