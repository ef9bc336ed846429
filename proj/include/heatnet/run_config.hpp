#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heatnet/mc.hpp"
#include "heatnet/metrics.hpp"
#include "heatnet/trainer.hpp"

namespace heatnet {

/// Configuration errors map to CLI exit code 2, numerical failures to 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat configuration of one CLI run. Populated from built-in per-example
/// defaults, then a key-value config file, then command-line flags (each
/// layer overrides the previous one through set()). Unknown keys are
/// rejected with the offending key path.
struct RunConfig {
    std::string example = "ex1";
    bool example_set = false;

    // problem overrides; negative sentinels select per-example defaults
    int d = -1;
    double D = -1.0;
    double T = -1.0;
    double A = -1.0;
    double A_train = -1.0;
    int k = -1;
    int m = -1;
    double alpha_q = 1.0;
    double beta_E = 1.0;
    std::vector<double> c;  // empty: all ones

    // train overrides; sentinels select per-example defaults
    std::string variant;  // "", "gaussian", "importance"
    std::string is_scale = "sqrt2Dt";
    std::string sampler;  // "", "pseudo", "sobol", or a full SamplerKind name
    std::int64_t M0 = -1;
    std::int64_t M1 = -1;
    std::int64_t n_pde = -1;
    std::int64_t n_ic = -1;
    double ic_weight = -1.0;
    double ridge = -1.0;
    std::uint64_t seed = 0;
    double t_floor = -1.0;
    std::string solver;       // "", "normal_cholesky", "svd_pinv"
    std::string collocation;  // "", "random", "grid"

    // evaluation / reporting
    std::int64_t test_n = -1;
    std::string test_mode;  // "", "grid_1d", "random_box"
    std::int64_t repeat = 1;
    std::string out = "-";
    std::string points_out;

    // mc command
    std::string mc_mode = "importance";
    std::int64_t mc_m0 = 100000;
    std::int64_t mc_m1 = 100000;
    double mc_t = -1.0;  // sentinel: T/2
    std::string x_file;
    std::string x_inline;

    // eval command
    std::string model_path;
    std::string grid_spec;  // e.g. "100x100" (d = 1)
    bool force_fingerprint = false;
    bool dry_run = false;

    /// Applies one `key = value` assignment; throws ConfigError on unknown
    /// keys, type mismatches or constraint violations.
    void set(const std::string& key, const std::string& value);

    /// Fills per-example defaults into the remaining sentinels and validates.
    void finalize();

    ProblemSpec make_problem() const;
    TrainConfig make_train_config() const;
    TestGridMode effective_test_mode() const;
    std::int64_t effective_test_n() const;
    double effective_mc_t() const;

    /// Full configuration echo (key order is fixed so output is diffable).
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses a flat key-value config file ('#' comments, dotted sections) on
/// top of the given base configuration.
RunConfig parse_config_file(const std::string& path, RunConfig base = {});

}  // namespace heatnet
