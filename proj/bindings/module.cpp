#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heatnet/mc.hpp"
#include "heatnet/metrics.hpp"
#include "heatnet/model_io.hpp"
#include "heatnet/sampling.hpp"
#include "heatnet/trainer.hpp"

namespace py = pybind11;
using namespace heatnet;

namespace {

ProblemSpec make_benchmark_py(const std::string& name, int d, double D, double T, int k, int m,
                              double alpha_q, double beta_E, std::optional<Eigen::VectorXd> c,
                              std::optional<double> A, std::optional<double> A_train) {
    BenchmarkParams params;
    params.name = benchmark_from_string(name);
    params.k = k >= 0 ? k : (params.name == BenchmarkName::ex1 ? 1 : 2);
    params.m = m;
    params.alpha_q = alpha_q;
    params.beta_E = beta_E;
    if (c) params.c = *c;
    ProblemSpec p = make_benchmark(params, d, D, T);
    if (A) p.box_half_width = *A;
    if (A_train) p.train_half_width = *A_train;
    p.validate();
    return p;
}

TrainConfig make_config(FeatureVariant variant, std::int64_t m0, std::int64_t m1,
                        std::int64_t n_pde, std::int64_t n_ic, double ic_weight, double ridge,
                        const std::string& sampler, std::uint64_t seed, double t_floor,
                        const std::string& solver, const std::string& collocation,
                        const std::string& is_scale) {
    TrainConfig cfg;
    cfg.variant = variant;
    cfg.M0 = m0;
    cfg.M1 = m1;
    cfg.n_pde = n_pde;
    cfg.n_ic = n_ic;
    cfg.ic_weight = ic_weight;
    cfg.ridge = ridge;
    if (sampler.empty() || sampler == "pseudo")
        cfg.sampler = variant == FeatureVariant::gaussian ? SamplerKind::pseudo_uniform
                                                          : SamplerKind::pseudo_normal;
    else if (sampler == "sobol")
        cfg.sampler = variant == FeatureVariant::gaussian ? SamplerKind::sobol_uniform
                                                          : SamplerKind::sobol_normal;
    else
        cfg.sampler = sampler_from_string(sampler);
    cfg.seed = seed;
    cfg.t_floor = t_floor;
    if (!solver.empty()) cfg.solver = solver_from_string(solver);
    cfg.collocation = collocation_from_string(collocation);
    cfg.is_scale = is_scale_from_string(is_scale);
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_heatnet, mod) {
    mod.doc() = "Random-feature solver for linear parabolic PDEs (heat-kernel features, "
                "physics-informed least squares, Monte Carlo oracles)";

    py::enum_<FeatureVariant>(mod, "FeatureVariant")
        .value("gaussian", FeatureVariant::gaussian)
        .value("importance", FeatureVariant::importance);

    py::class_<ProblemSpec>(mod, "Problem")
        .def_readonly("d", &ProblemSpec::d)
        .def_readonly("diffusion", &ProblemSpec::diffusion)
        .def_readonly("horizon", &ProblemSpec::horizon)
        .def_readonly("box_half_width", &ProblemSpec::box_half_width)
        .def_readonly("train_half_width", &ProblemSpec::train_half_width)
        .def_readonly("name", &ProblemSpec::example_name)
        .def(
            "exact",
            [](const ProblemSpec& p, double t, const Eigen::VectorXd& x) {
                if (!p.has_exact()) throw std::runtime_error("no exact solution");
                return p.exact(t, x);
            },
            py::arg("t"), py::arg("x"))
        .def(
            "u0", [](const ProblemSpec& p, const Eigen::VectorXd& x) { return p.u0.value(0.0, x); },
            py::arg("x"))
        .def(
            "forcing",
            [](const ProblemSpec& p, double t, const Eigen::VectorXd& x) {
                return p.forcing.value(t, x);
            },
            py::arg("t"), py::arg("x"))
        .def("__repr__", [](const ProblemSpec& p) {
            return "<heatnet.Problem " + p.example_name + " d=" + std::to_string(p.d) + ">";
        });

    mod.def("make_benchmark", &make_benchmark_py, py::arg("name"), py::arg("d"),
            py::arg("D") = 1.0, py::arg("T") = 1.0, py::arg("k") = -1, py::arg("m") = 3,
            py::arg("alpha_q") = 1.0, py::arg("beta_E") = 1.0, py::arg("c") = std::nullopt,
            py::arg("A") = std::nullopt, py::arg("A_train") = std::nullopt,
            "Benchmark problem by name: ex1, ex2a, ex2b or ex3");

    py::class_<TrainConfig>(mod, "TrainConfig")
        .def(py::init(&make_config), py::arg("variant") = FeatureVariant::importance,
             py::arg("m0") = 32, py::arg("m1") = 64, py::arg("n_pde") = 1000,
             py::arg("n_ic") = 200, py::arg("ic_weight") = -1.0, py::arg("ridge") = 1e-6,
             py::arg("sampler") = "", py::arg("seed") = 0, py::arg("t_floor") = -1.0,
             py::arg("solver") = "", py::arg("collocation") = "random",
             py::arg("is_scale") = "sqrt2Dt")
        .def_readwrite("m0", &TrainConfig::M0)
        .def_readwrite("m1", &TrainConfig::M1)
        .def_readwrite("n_pde", &TrainConfig::n_pde)
        .def_readwrite("n_ic", &TrainConfig::n_ic)
        .def_readwrite("ridge", &TrainConfig::ridge)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<TrainedModel>(mod, "TrainedModel")
        .def("predict", &TrainedModel::predict, py::arg("t"), py::arg("x"))
        .def("predict_batch", &TrainedModel::predict_batch, py::arg("tx"),
             "Batched prediction; rows are [t, x_1..x_d]")
        .def_property_readonly("weights",
                               [](const TrainedModel& m) -> Eigen::VectorXd { return m.weights; })
        .def_property_readonly("build_seconds",
                               [](const TrainedModel& m) { return m.diag.build_seconds; })
        .def_property_readonly("train_seconds",
                               [](const TrainedModel& m) { return m.diag.train_seconds; })
        .def_property_readonly("problem", [](const TrainedModel& m) { return m.problem; })
        .def("save", &save_model, py::arg("path"));

    mod.def("train", &train, py::arg("problem"), py::arg("config"),
            py::call_guard<py::gil_scoped_release>(),
            "Sample features, assemble the physics-informed system and solve it");
    mod.def("load_model", &load_model, py::arg("path"));

    mod.def(
        "mc_estimate",
        [](const ProblemSpec& p, double t, const Eigen::VectorXd& x, const std::string& mode,
           std::int64_t m0, std::int64_t m1, std::uint64_t seed) {
            McEstimate e =
                estimate_solution(p, t, x, m0, m1, mc_mode_from_string(mode), RngState{seed, 4});
            return py::make_tuple(e.mean, e.std_error, e.n_samples);
        },
        py::arg("problem"), py::arg("t"), py::arg("x"), py::arg("mode") = "importance",
        py::arg("m0") = 100000, py::arg("m1") = 100000, py::arg("seed") = 0,
        "Pointwise Monte Carlo estimate of the solution; returns (mean, std_error, n)");

    mod.def("quad_reference_1d", &quad_reference_1d, py::arg("problem"), py::arg("t"),
            py::arg("x"), py::arg("tol") = 1e-9,
            "Deterministic adaptive-quadrature oracle (d = 1 problems)");

    mod.def(
        "rel_errors",
        [](const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
            RelErrors e = rel_errors(pred, truth);
            return py::make_tuple(e.rel_l1, e.rel_l2, e.rel_linf);
        },
        py::arg("pred"), py::arg("truth"), "Relative (L1, L2, Linf) error norms");

    mod.def(
        "make_test_grid",
        [](const ProblemSpec& p, std::int64_t n, const std::string& mode, std::uint64_t seed) {
            RowMatrix g = make_test_grid(p, n, test_grid_mode_from_string(mode), RngState{seed, 0});
            return Matrix(g);
        },
        py::arg("problem"), py::arg("n"), py::arg("mode") = "random_box", py::arg("seed") = 0,
        "Test points as rows [t, x_1..x_d]");

    mod.def(
        "sobol_points",
        [](std::int64_t n, int d, std::int64_t skip) { return Matrix(sobol_unit(n, d, skip)); },
        py::arg("n"), py::arg("d"), py::arg("skip") = 0,
        "Sobol sequence points in [0,1)^d (Joe-Kuo direction numbers)");

    mod.attr("__version__") = "0.1.0";
}
