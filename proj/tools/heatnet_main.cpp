#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <vector>

#include "heatnet/cli.hpp"
#include "heatnet/run_config.hpp"

namespace {

using heatnet::RunConfig;

struct PendingArgs {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> assignments;
    bool dry_run = false;
    bool force = false;
};

/// Registers the flags shared by every subcommand. Values are collected and
/// applied after the config file, so flags override file settings.
void add_common_options(CLI::App* cmd, PendingArgs& pending) {
    cmd->add_option("--config", pending.config_file, "key-value config file");
    auto opt = [cmd, &pending](const char* flag, const char* key, const char* desc) {
        cmd->add_option_function<std::string>(
            flag, [&pending, key](const std::string& v) { pending.assignments.emplace_back(key, v); },
            desc);
    };
    opt("--example", "example", "benchmark name: ex1|ex2a|ex2b|ex3");
    opt("--d", "problem.d", "spatial dimension");
    opt("--D", "problem.D", "diffusion coefficient");
    opt("--T", "problem.T", "time horizon");
    opt("--A", "problem.A", "feature/IC box half-width");
    opt("--A-train", "problem.A_train", "PDE collocation box half-width");
    opt("--k", "problem.k", "benchmark frequency k");
    opt("--m", "problem.m", "benchmark frequency m (ex3)");
    opt("--alpha-q", "problem.alpha_q", "ex3 q(t) amplitude");
    opt("--beta-E", "problem.beta_E", "ex3 E(t,x) decay rate");
    opt("--c", "problem.c", "coefficient vector, comma separated");
    opt("--variant", "train.variant", "feature variant: gaussian|importance");
    opt("--is-scale", "train.is_scale", "IS initial-condition scale: sqrt2Dt|sqrt4Dt");
    opt("--sampler", "train.sampler", "pseudo|sobol or a full sampler kind");
    opt("--M0", "train.M0", "initial-condition feature count");
    opt("--M1", "train.M1", "forcing feature count");
    opt("--n-pde", "train.n_pde", "PDE collocation point count");
    opt("--n-ic", "train.n_ic", "IC collocation point count");
    opt("--ic-weight", "train.ic_weight", "IC block weight omega");
    opt("--ridge", "train.ridge", "ridge coefficient");
    opt("--seed", "train.seed", "base RNG seed");
    opt("--t-floor", "train.t_floor", "collocation time floor");
    opt("--solver", "train.solver", "normal_cholesky|svd_pinv");
    opt("--collocation", "train.collocation", "random|grid");
    opt("--test-n", "test.n", "test point count");
    opt("--test-mode", "test.mode", "grid_1d|random_box");
    opt("--repeat", "repeat", "number of seeds to run");
    opt("--out", "out", "output path ('-' for stdout)");
    opt("--points-out", "points_out", "sidecar file for hashed points");
    cmd->add_flag("--dry-run", pending.dry_run, "echo the resolved config and exit");
}

RunConfig resolve(const PendingArgs& pending) {
    RunConfig cfg;
    if (!pending.config_file.empty()) cfg = heatnet::parse_config_file(pending.config_file);
    for (const auto& [key, value] : pending.assignments) cfg.set(key, value);
    cfg.dry_run = pending.dry_run;
    cfg.force_fingerprint = pending.force;
    cfg.finalize();
    return cfg;
}

/// cfg.out == "-" routes data to stdout, otherwise to the named file.
struct OutStream {
    explicit OutStream(const std::string& path) {
        if (path != "-") {
            file = std::make_unique<std::ofstream>(path);
            if (!*file) throw heatnet::ConfigError("config: cannot open output file " + path);
        }
    }
    std::ostream& get() { return file ? *file : std::cout; }
    std::unique_ptr<std::ofstream> file;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatnet: random-feature solver for linear parabolic PDEs"};
    app.require_subcommand(1);

    PendingArgs train_args, eval_args, mc_args, bench_args;

    CLI::App* train_cmd = app.add_subcommand("train", "train a model and save it to --out");
    add_common_options(train_cmd, train_args);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a saved model as CSV");
    add_common_options(eval_cmd, eval_args);
    std::string eval_model, eval_grid, eval_points;
    eval_cmd->add_option("model", eval_model, "model file")->required();
    eval_cmd->add_option("--grid", eval_grid, "tensor grid spec NtxNx (d = 1)");
    eval_cmd->add_option("--points", eval_points, "points file, rows 't x1 .. xd'");
    eval_cmd->add_flag("--force", eval_args.force, "skip the example/fingerprint check");

    CLI::App* mc_cmd = app.add_subcommand("mc", "Monte Carlo solution estimates as CSV");
    add_common_options(mc_cmd, mc_args);
    std::string mc_samples;
    mc_cmd->add_option_function<std::string>(
        "--mode", [&](const std::string& v) { mc_args.assignments.emplace_back("mc.mode", v); },
        "transformed|importance");
    mc_cmd->add_option("--samples", mc_samples, "sample count for both integrals");
    mc_cmd->add_option_function<std::string>(
        "--m0", [&](const std::string& v) { mc_args.assignments.emplace_back("mc.m0", v); },
        "samples for the initial-condition integral");
    mc_cmd->add_option_function<std::string>(
        "--m1", [&](const std::string& v) { mc_args.assignments.emplace_back("mc.m1", v); },
        "samples for the forcing integral");
    mc_cmd->add_option_function<std::string>(
        "--t", [&](const std::string& v) { mc_args.assignments.emplace_back("mc.t", v); },
        "evaluation time (default T/2)");
    mc_cmd->add_option_function<std::string>(
        "--x-file", [&](const std::string& v) { mc_args.assignments.emplace_back("mc.x_file", v); },
        "points file, rows 'x1 .. xd'");
    mc_cmd->add_option_function<std::string>(
        "--x", [&](const std::string& v) { mc_args.assignments.emplace_back("mc.x", v); },
        "single point, comma separated");

    CLI::App* bench_cmd = app.add_subcommand("bench", "train/evaluate benchmark runs as CSV");
    add_common_options(bench_cmd, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) {
            RunConfig cfg = resolve(train_args);
            cmd_train(cfg, std::cerr);
        } else if (eval_cmd->parsed()) {
            eval_args.assignments.emplace_back("eval.model", eval_model);
            if (!eval_grid.empty()) eval_args.assignments.emplace_back("eval.grid", eval_grid);
            if (!eval_points.empty())
                eval_args.assignments.emplace_back("mc.x_file", eval_points);
            RunConfig cfg = resolve(eval_args);
            OutStream os(cfg.out);
            cmd_eval(cfg, os.get(), std::cerr);
        } else if (mc_cmd->parsed()) {
            if (!mc_samples.empty()) {
                mc_args.assignments.emplace_back("mc.m0", mc_samples);
                mc_args.assignments.emplace_back("mc.m1", mc_samples);
            }
            RunConfig cfg = resolve(mc_args);
            OutStream os(cfg.out);
            cmd_mc(cfg, os.get(), std::cerr);
        } else if (bench_cmd->parsed()) {
            RunConfig cfg = resolve(bench_args);
            OutStream os(cfg.out);
            cmd_bench(cfg, os.get(), std::cerr);
        }
    } catch (const heatnet::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
