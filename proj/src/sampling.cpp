#include "heatnet/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heatnet {

double Rng::normal() { return inverse_normal_cdf(uniform_open()); }

std::string to_string(SamplerKind k) {
    switch (k) {
        case SamplerKind::pseudo_uniform: return "pseudo_uniform";
        case SamplerKind::pseudo_normal: return "pseudo_normal";
        case SamplerKind::sobol_uniform: return "sobol_uniform";
        case SamplerKind::sobol_normal: return "sobol_normal";
    }
    return "?";
}

SamplerKind sampler_from_string(const std::string& s) {
    if (s == "pseudo_uniform") return SamplerKind::pseudo_uniform;
    if (s == "pseudo_normal") return SamplerKind::pseudo_normal;
    if (s == "sobol_uniform") return SamplerKind::sobol_uniform;
    if (s == "sobol_normal") return SamplerKind::sobol_normal;
    throw std::invalid_argument("unknown sampler kind: " + s);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf: p must lie in (0,1)");

    // Acklam's rational approximation (|rel err| < 1.15e-9), then a Halley
    // refinement against erfc brings the absolute error to ~1e-15.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley step: e = Phi(x) - p, u = e / phi(x).
    const double sqrt2 = std::numbers::sqrt2;
    const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
    double e = 0.5 * std::erfc(-x / sqrt2) - p;
    double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

RowMatrix uniform_box(std::int64_t n, int d, double half_width, RngState rng) {
    if (n < 1) throw std::invalid_argument("uniform_box: n must be >= 1");
    if (d < 1) throw std::invalid_argument("uniform_box: d must be >= 1");
    if (!(half_width > 0.0)) throw std::invalid_argument("uniform_box: half_width must be > 0");
    Rng gen(rng);
    RowMatrix out(n, d);
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = half_width * (2.0 * gen.uniform() - 1.0);
    return out;
}

RowMatrix std_normal(std::int64_t n, int d, RngState rng) {
    if (n < 1) throw std::invalid_argument("std_normal: n must be >= 1");
    if (d < 1) throw std::invalid_argument("std_normal: d must be >= 1");
    Rng gen(rng);
    RowMatrix out(n, d);
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = gen.normal();
    return out;
}

namespace {
constexpr int kMaxBit = 32;
}

int SobolSequence::max_dims() { return detail::sobol_table_dims; }

SobolSequence::SobolSequence(int d, std::int64_t skip) : d_(d), index_(skip) {
    if (d < 1) throw std::invalid_argument("SobolSequence: d must be >= 1");
    if (d > detail::sobol_table_dims)
        throw std::invalid_argument("SobolSequence: d exceeds the direction-number table (" +
                                    std::to_string(detail::sobol_table_dims) + " dims)");
    if (skip < 0) throw std::invalid_argument("SobolSequence: skip must be >= 0");

    v_.assign(static_cast<std::size_t>(d_) * kMaxBit, 0);
    for (int k = 0; k < d_; ++k) {
        std::uint32_t* v = &v_[static_cast<std::size_t>(k) * kMaxBit];
        if (k == 0) {
            for (int j = 0; j < kMaxBit; ++j) v[j] = 1u << (kMaxBit - 1 - j);
            continue;
        }
        const std::uint32_t poly = detail::sobol_poly[k];
        int s = 0;
        while ((poly >> (s + 1)) != 0) ++s;  // degree = bit_length - 1
        const std::uint32_t* m = &detail::sobol_minit[detail::sobol_minit_offset[k]];
        for (int j = 0; j < s && j < kMaxBit; ++j) v[j] = m[j] << (kMaxBit - 1 - j);
        for (int j = s; j < kMaxBit; ++j) {
            std::uint32_t nv = v[j - s] ^ (v[j - s] >> s);
            for (int i = 1; i < s; ++i)
                if ((poly >> (s - i)) & 1u) nv ^= v[j - i];
            v[j] = nv;
        }
    }

    // Jump straight to index `skip`: XOR the directions selected by gray(skip).
    state_.assign(d_, 0);
    std::uint64_t gray = static_cast<std::uint64_t>(skip) ^ (static_cast<std::uint64_t>(skip) >> 1);
    for (int j = 0; j < kMaxBit && (gray >> j) != 0; ++j) {
        if ((gray >> j) & 1u)
            for (int k = 0; k < d_; ++k)
                state_[k] ^= v_[static_cast<std::size_t>(k) * kMaxBit + j];
    }
}

void SobolSequence::next(double* out) {
    for (int k = 0; k < d_; ++k)
        out[k] = static_cast<double>(state_[k]) * 0x1.0p-32;
    // Gray-code step: flip direction ctz(index+1).
    std::uint64_t n = static_cast<std::uint64_t>(index_) + 1;
    int c = 0;
    while ((n & 1u) == 0) {
        n >>= 1;
        ++c;
    }
    if (c >= kMaxBit) throw std::runtime_error("SobolSequence: point index exhausted");
    for (int k = 0; k < d_; ++k)
        state_[k] ^= v_[static_cast<std::size_t>(k) * kMaxBit + c];
    ++index_;
}

RowMatrix sobol_unit(std::int64_t n, int d, std::int64_t skip) {
    if (n < 1) throw std::invalid_argument("sobol_unit: n must be >= 1");
    SobolSequence seq(d, skip);
    RowMatrix out(n, d);
    for (std::int64_t i = 0; i < n; ++i) seq.next(out.row(i).data());
    return out;
}

}  // namespace heatnet
