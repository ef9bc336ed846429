#include "heatnet/problem.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace heatnet {

namespace {

double fd_first(const std::function<double(double, ConstVec)>& f, double t, ConstVec x,
                double step) {
    double h = step * std::max(1.0, std::abs(t));
    Vector xv = x;
    return (f(t + h, xv) - f(t - h, xv)) / (2.0 * h);
}

}  // namespace

double ScalarFieldBundle::eval_dt(double t, ConstVec x) const {
    if (dt) return dt(t, x);
    return fd_first(value, t, x, fd_step);
}

void ScalarFieldBundle::eval_grad(double t, ConstVec x, Eigen::Ref<Vector> out) const {
    if (grad) {
        grad(t, x, out);
        return;
    }
    Vector xv = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = fd_step * std::max(1.0, std::abs(x[i]));
        double xi = xv[i];
        xv[i] = xi + h;
        double fp = value(t, xv);
        xv[i] = xi - h;
        double fm = value(t, xv);
        xv[i] = xi;
        out[i] = (fp - fm) / (2.0 * h);
    }
}

double ScalarFieldBundle::eval_lap(double t, ConstVec x) const {
    if (lap) return lap(t, x);
    const double step = std::pow(fd_step, 0.75);
    Vector xv = x;
    double f0 = value(t, xv);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = step * std::max(1.0, std::abs(x[i]));
        double xi = xv[i];
        xv[i] = xi + h;
        double fp = value(t, xv);
        xv[i] = xi - h;
        double fm = value(t, xv);
        xv[i] = xi;
        acc += (fp - 2.0 * f0 + fm) / (h * h);
    }
    return acc;
}

double eval_bundle(const ScalarFieldBundle& b, BundleMember which, double t, ConstVec x) {
    if (b.dim >= 0 && x.size() != b.dim)
        throw std::invalid_argument("eval_bundle: dimension mismatch");
    switch (which) {
        case BundleMember::value: return b.value(t, x);
        case BundleMember::dt: return b.eval_dt(t, x);
        case BundleMember::lap: return b.eval_lap(t, x);
        case BundleMember::grad:
            throw std::invalid_argument("eval_bundle: use eval_bundle_grad for vector members");
    }
    return 0.0;
}

Vector eval_bundle_grad(const ScalarFieldBundle& b, double t, ConstVec x) {
    if (b.dim >= 0 && x.size() != b.dim)
        throw std::invalid_argument("eval_bundle_grad: dimension mismatch");
    Vector g(x.size());
    b.eval_grad(t, x, g);
    return g;
}

std::string to_string(BenchmarkName n) {
    switch (n) {
        case BenchmarkName::ex1: return "ex1";
        case BenchmarkName::ex2a: return "ex2a";
        case BenchmarkName::ex2b: return "ex2b";
        case BenchmarkName::ex3: return "ex3";
    }
    return "?";
}

BenchmarkName benchmark_from_string(const std::string& s) {
    if (s == "ex1") return BenchmarkName::ex1;
    if (s == "ex2a") return BenchmarkName::ex2a;
    if (s == "ex2b") return BenchmarkName::ex2b;
    if (s == "ex3") return BenchmarkName::ex3;
    throw std::invalid_argument("unknown benchmark name: " + s);
}

void ProblemSpec::validate() const {
    if (d < 1) throw std::invalid_argument("ProblemSpec: d must be >= 1");
    if (!(diffusion > 0.0)) throw std::invalid_argument("ProblemSpec: D must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("ProblemSpec: T must be > 0");
    if (!(box_half_width > 0.0)) throw std::invalid_argument("ProblemSpec: A must be > 0");
    if (!(train_half_width > 0.0) || train_half_width > box_half_width)
        throw std::invalid_argument("ProblemSpec: requires 0 < A_train <= A");
    if (!u0.value || !forcing.value)
        throw std::invalid_argument("ProblemSpec: u0 and forcing value maps are required");
}

std::uint64_t ProblemSpec::fingerprint() const {
    char buf[64];
    std::string s = example_name;
    auto add = [&](double v) {
        std::snprintf(buf, sizeof(buf), "|%.17g", v);
        s += buf;
    };
    s += "|" + std::to_string(d);
    add(diffusion);
    add(horizon);
    add(box_half_width);
    add(train_half_width);
    s += "|" + std::to_string(params.k) + "|" + std::to_string(params.m);
    add(params.alpha_q);
    add(params.beta_E);
    for (Eigen::Index i = 0; i < params.c.size(); ++i) add(params.c[i]);

    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

constexpr double kPi = std::numbers::pi;

struct GQ {  // time factors shared by ex1/ex2b/ex3
    static double g(double t) { return t + std::exp(-t); }
    static double gp(double t) { return 1.0 - std::exp(-t); }
    static double gpp(double t) { return std::exp(-t); }
};

/// u = g(t) S_k(x), F = (g' + D k^2 g) S_k; covers ex1 (k=1, d=1) and ex2b.
ProblemSpec make_separable(BenchmarkName name, const BenchmarkParams& params, int d, double D,
                           double T) {
    const int k = params.k;
    const Vector c = params.c;
    const double invC = 1.0 / std::sqrt(c.squaredNorm());

    auto S = [c, invC, k](ConstVec x) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) s += c[i] * std::sin(k * x[i]);
        return invC * s;
    };

    ProblemSpec p;
    p.d = d;
    p.diffusion = D;
    p.horizon = T;
    p.example_name = to_string(name);
    p.params = params;

    p.u0.value = [S](double, ConstVec x) { return S(x); };
    p.u0.grad = [c, invC, k](double, ConstVec x, Eigen::Ref<Vector> out) {
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = invC * k * c[i] * std::cos(k * x[i]);
    };
    p.u0.lap = [S, k](double, ConstVec x) { return -double(k) * k * S(x); };

    auto P = [D, k](double t) { return GQ::gp(t) + D * k * k * GQ::g(t); };
    auto Pp = [D, k](double t) { return GQ::gpp(t) + D * k * k * GQ::gp(t); };

    p.forcing.value = [S, P](double t, ConstVec x) { return P(t) * S(x); };
    p.forcing.dt = [S, Pp](double t, ConstVec x) { return Pp(t) * S(x); };
    p.forcing.grad = [c, invC, k, P](double t, ConstVec x, Eigen::Ref<Vector> out) {
        double pt = P(t);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out[i] = pt * invC * k * c[i] * std::cos(k * x[i]);
    };
    p.forcing.lap = [S, P, k](double t, ConstVec x) { return -double(k) * k * P(t) * S(x); };

    p.exact = [S](double t, ConstVec x) { return GQ::g(t) * S(x); };
    return p;
}

ProblemSpec make_ex2a(const BenchmarkParams& params, int d, double D, double T) {
    ProblemSpec p;
    p.d = d;
    p.diffusion = D;
    p.horizon = T;
    p.example_name = "ex2a";
    p.params = params;

    auto prod_sin = [](ConstVec x) {
        double v = 1.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) v *= std::sin(kPi * x[i]);
        return v;
    };

    p.u0.value = [prod_sin](double, ConstVec x) { return prod_sin(x); };
    p.u0.grad = [](double, ConstVec x, Eigen::Ref<Vector> out) {
        // prefix/suffix products keep this O(d) and zero-safe
        const Eigen::Index n = x.size();
        thread_local std::vector<double> sines, pre;
        sines.resize(n);
        pre.resize(n);
        double acc = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            sines[i] = std::sin(kPi * x[i]);
            pre[i] = acc;
            acc *= sines[i];
        }
        double suf = 1.0;
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            out[i] = kPi * std::cos(kPi * x[i]) * pre[i] * suf;
            suf *= sines[i];
        }
    };
    p.u0.lap = [prod_sin, d](double, ConstVec x) { return -d * kPi * kPi * prod_sin(x); };

    p.forcing.value = [](double, ConstVec) { return 0.0; };
    p.forcing.dt = [](double, ConstVec) { return 0.0; };
    p.forcing.grad = [](double, ConstVec, Eigen::Ref<Vector> out) { out.setZero(); };
    p.forcing.lap = [](double, ConstVec) { return 0.0; };

    p.exact = [prod_sin, d, D](double t, ConstVec x) {
        return std::exp(-D * d * kPi * kPi * t) * prod_sin(x);
    };
    return p;
}

ProblemSpec make_ex3(const BenchmarkParams& params, int d, double D, double T) {
    ProblemSpec p = make_separable(BenchmarkName::ex3, params, d, D, T);
    p.example_name = "ex3";

    const int k = params.k;
    const int m = params.m;
    const double alpha = params.alpha_q;
    const double beta = params.beta_E;
    const Vector c = params.c;
    const double invC = 1.0 / std::sqrt(c.squaredNorm());

    // u = g(t) S_k(x) + q(t) E(t,x) S_m(x), with E = exp(-t B), B = beta|x|^2/d.
    // All derivatives below are exact product-rule expansions in terms of
    //   a = t^2 |grad B|^2 - 2 beta t          (Delta E = a E)
    //   c1 = q' - q B - D q (a - m^2),  c2 = (4 D beta m / d) t q
    // so that F = P S_k + E (c1 S_m + c2 V) with V = invC sum c_i x_i cos(m x_i).
    struct Terms {
        double Sk, Sm, V, B, E, a, q, qp, qpp;
        double gradB2;  // |grad B|^2
    };
    auto q_of = [alpha](double t) { return alpha * t * t * std::exp(-t / 3.0); };
    auto qp_of = [alpha](double t) {
        return alpha * (2.0 * t - t * t / 3.0) * std::exp(-t / 3.0);
    };
    auto qpp_of = [alpha](double t) {
        return alpha * (2.0 - 4.0 * t / 3.0 + t * t / 9.0) * std::exp(-t / 3.0);
    };
    auto terms = [=](double t, ConstVec x) {
        Terms w;
        double sk = 0.0, sm = 0.0, v = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            sk += c[i] * std::sin(k * x[i]);
            double cm = std::cos(m * x[i]);
            sm += c[i] * std::sin(m * x[i]);
            v += c[i] * x[i] * cm;
        }
        w.Sk = invC * sk;
        w.Sm = invC * sm;
        w.V = invC * v;
        double x2 = x.squaredNorm();
        w.B = beta * x2 / d;
        w.E = std::exp(-t * w.B);
        w.gradB2 = 4.0 * beta * beta * x2 / (double(d) * d);
        w.a = t * t * w.gradB2 - 2.0 * beta * t;
        w.q = q_of(t);
        w.qp = qp_of(t);
        w.qpp = qpp_of(t);
        return w;
    };
    auto c1_of = [D, m](const Terms& w) {
        return w.qp - w.q * w.B - D * w.q * (w.a - double(m) * m);
    };
    auto c2_of = [D, beta, m, d](double t, const Terms& w) {
        return 4.0 * D * beta * m / double(d) * t * w.q;
    };
    auto P = [D, k](double t) { return GQ::gp(t) + D * k * k * GQ::g(t); };
    auto Pp = [D, k](double t) { return GQ::gpp(t) + D * k * k * GQ::gp(t); };

    p.forcing.value = [=](double t, ConstVec x) {
        Terms w = terms(t, x);
        return P(t) * w.Sk + w.E * (c1_of(w) * w.Sm + c2_of(t, w) * w.V);
    };
    p.forcing.dt = [=](double t, ConstVec x) {
        Terms w = terms(t, x);
        double c1 = c1_of(w), c2 = c2_of(t, w);
        double a_t = 2.0 * t * w.gradB2 - 2.0 * beta;
        double c1_t = w.qpp - w.qp * w.B - D * w.qp * (w.a - double(m) * m) - D * w.q * a_t;
        double c2_t = 4.0 * D * beta * m / double(d) * (w.q + t * w.qp);
        return Pp(t) * w.Sk +
               w.E * ((c1_t - w.B * c1) * w.Sm + (c2_t - w.B * c2) * w.V);
    };
    p.forcing.grad = [=](double t, ConstVec x, Eigen::Ref<Vector> out) {
        Terms w = terms(t, x);
        double c1 = c1_of(w), c2 = c2_of(t, w);
        double pt = P(t);
        double K = c1 * w.Sm + c2 * w.V;
        // grad c1 = -(q + D q 4 beta t^2 / d... ) grad B with grad a = (4 beta t^2/d) grad B
        double c1_gradB = -(w.q + D * w.q * 4.0 * beta * t * t / d);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double gradB_i = 2.0 * beta * x[i] / d;
            double dSk_i = invC * k * c[i] * std::cos(k * x[i]);
            double dSm_i = invC * m * c[i] * std::cos(m * x[i]);
            double dV_i = invC * (c[i] * std::cos(m * x[i]) - m * c[i] * x[i] * std::sin(m * x[i]));
            double dK_i = c1_gradB * gradB_i * w.Sm + c1 * dSm_i + c2 * dV_i;
            out[i] = pt * dSk_i + w.E * (dK_i - t * gradB_i * K);
        }
    };
    p.forcing.lap = [=](double t, ConstVec x) {
        Terms w = terms(t, x);
        double c1 = c1_of(w), c2 = c2_of(t, w);
        double K = c1 * w.Sm + c2 * w.V;
        double c1_gradB = -(w.q + D * w.q * 4.0 * beta * t * t / d);  // grad c1 = this * grad B
        double lap_c1 = -2.0 * beta * w.q - D * w.q * 8.0 * beta * beta * t * t / d;
        double lap_V = -2.0 * m * w.Sm - double(m) * m * w.V;
        // scalar products needed for Delta K and grad B . grad K
        double gradB_dSm = 0.0, gradB_dV = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double gradB_i = 2.0 * beta * x[i] / d;
            double dSm_i = invC * m * c[i] * std::cos(m * x[i]);
            double dV_i = invC * (c[i] * std::cos(m * x[i]) - m * c[i] * x[i] * std::sin(m * x[i]));
            gradB_dSm += gradB_i * dSm_i;
            gradB_dV += gradB_i * dV_i;
        }
        double lap_K = lap_c1 * w.Sm + 2.0 * c1_gradB * gradB_dSm - c1 * double(m) * m * w.Sm +
                       c2 * lap_V;
        double gradB_dK = c1_gradB * w.gradB2 * w.Sm + c1 * gradB_dSm + c2 * gradB_dV;
        double lap_Sk = -double(k) * k * P(t) * w.Sk;
        return lap_Sk + w.E * (w.a * K - 2.0 * t * gradB_dK + lap_K);
    };

    p.exact = [=](double t, ConstVec x) {
        Terms w = terms(t, x);
        return GQ::g(t) * w.Sk + w.q * w.E * w.Sm;
    };
    // u0 = S_k (g(0)=1, q(0)=0): inherited from make_separable.
    return p;
}

}  // namespace

ProblemSpec make_benchmark(const BenchmarkParams& params_in, int d, double D, double T) {
    if (d < 1) throw std::invalid_argument("make_benchmark: d must be >= 1");
    if (!(D > 0.0)) throw std::invalid_argument("make_benchmark: D must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("make_benchmark: T must be > 0");

    BenchmarkParams params = params_in;
    if (params.c.size() == 0) params.c = Vector::Ones(d);
    if (params.c.size() != d)
        throw std::invalid_argument("make_benchmark: coefficient vector length must equal d");
    if (!(params.c.squaredNorm() > 0.0))
        throw std::invalid_argument("make_benchmark: coefficient vector must be nonzero");
    if (params.k < 1 || params.m < 1)
        throw std::invalid_argument("make_benchmark: k and m must be positive");
    if (params.name == BenchmarkName::ex1 && d != 1)
        throw std::invalid_argument("make_benchmark: ex1 is one-dimensional");

    ProblemSpec p;
    switch (params.name) {
        case BenchmarkName::ex1: p = make_separable(BenchmarkName::ex1, params, d, D, T); break;
        case BenchmarkName::ex2a: p = make_ex2a(params, d, D, T); break;
        case BenchmarkName::ex2b: p = make_separable(BenchmarkName::ex2b, params, d, D, T); break;
        case BenchmarkName::ex3: p = make_ex3(params, d, D, T); break;
    }
    p.u0.dim = d;
    p.forcing.dim = d;
    p.box_half_width = kPi;
    p.train_half_width = kPi;
    p.validate();
    return p;
}

ProblemSpec make_benchmark(BenchmarkName name, int d, double D, double T) {
    BenchmarkParams params;
    params.name = name;
    if (name == BenchmarkName::ex1) params.k = 1;
    return make_benchmark(params, d, D, T);
}

}  // namespace heatnet
