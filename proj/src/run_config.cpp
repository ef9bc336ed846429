#include "heatnet/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace heatnet {

namespace {

double parse_f(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': expected a number, got '" + v + "'");
    }
}

std::int64_t parse_i(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::int64_t r = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::uint64_t r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': expected an unsigned integer, got '" + v +
                          "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_f(key, item));
    if (out.empty()) throw ConfigError("config: key '" + key + "': empty list");
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ExampleDefaults {
    int d;
    double D, T;
    std::string variant;
    std::int64_t M0, M1, n_pde, n_ic;
    double ridge;
    std::string collocation;
};

ExampleDefaults example_defaults(const std::string& example) {
    if (example == "ex1")
        return {1, 1.0, 1.0, "gaussian", 32, 64, 3000, 1000, 0.0, "grid"};
    if (example == "ex2a")
        return {2, 1.0, 0.05, "importance", 15000, 0, 20000, 4000, 1e-6, "random"};
    if (example == "ex2b")
        return {10, 1.0, 0.5, "importance", 500, 1000, 10000, 2000, 1e-6, "random"};
    if (example == "ex3")
        return {10, 1.0, 0.5, "importance", 4000, 6000, 15000, 3000, 1e-6, "random"};
    throw ConfigError("config: key 'example': unknown example '" + example + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "example") {
        example_defaults(v);  // validates
        example = v;
        example_set = true;
    } else if (key == "problem.d") {
        d = static_cast<int>(parse_i(key, v));
        if (d < 1) throw ConfigError("config: key 'problem.d': must be >= 1");
    } else if (key == "problem.D") {
        D = parse_f(key, v);
        if (!(D > 0.0)) throw ConfigError("config: key 'problem.D': must be > 0");
    } else if (key == "problem.T") {
        T = parse_f(key, v);
        if (!(T > 0.0)) throw ConfigError("config: key 'problem.T': must be > 0");
    } else if (key == "problem.A") {
        A = parse_f(key, v);
        if (!(A > 0.0)) throw ConfigError("config: key 'problem.A': must be > 0");
    } else if (key == "problem.A_train") {
        A_train = parse_f(key, v);
        if (!(A_train > 0.0)) throw ConfigError("config: key 'problem.A_train': must be > 0");
    } else if (key == "problem.k") {
        k = static_cast<int>(parse_i(key, v));
    } else if (key == "problem.m") {
        m = static_cast<int>(parse_i(key, v));
    } else if (key == "problem.alpha_q") {
        alpha_q = parse_f(key, v);
    } else if (key == "problem.beta_E") {
        beta_E = parse_f(key, v);
    } else if (key == "problem.c") {
        c = parse_list(key, v);
    } else if (key == "train.variant") {
        variant_from_string(v);  // validates
        variant = v;
    } else if (key == "train.is_scale") {
        is_scale_from_string(v);
        is_scale = v;
    } else if (key == "train.sampler") {
        if (v != "pseudo" && v != "sobol") sampler_from_string(v);
        sampler = v;
    } else if (key == "train.M0") {
        M0 = parse_i(key, v);
    } else if (key == "train.M1") {
        M1 = parse_i(key, v);
    } else if (key == "train.n_pde") {
        n_pde = parse_i(key, v);
    } else if (key == "train.n_ic") {
        n_ic = parse_i(key, v);
    } else if (key == "train.ic_weight") {
        ic_weight = parse_f(key, v);
        if (ic_weight < 0.0) throw ConfigError("config: key 'train.ic_weight': must be >= 0");
    } else if (key == "train.ridge") {
        ridge = parse_f(key, v);
        if (ridge < 0.0) throw ConfigError("config: key 'train.ridge': must be >= 0");
    } else if (key == "train.seed") {
        seed = parse_u(key, v);
    } else if (key == "train.t_floor") {
        t_floor = parse_f(key, v);
    } else if (key == "train.solver") {
        solver_from_string(v);
        solver = v;
    } else if (key == "train.collocation") {
        collocation_from_string(v);
        collocation = v;
    } else if (key == "test.n") {
        test_n = parse_i(key, v);
        if (test_n < 1) throw ConfigError("config: key 'test.n': must be >= 1");
    } else if (key == "test.mode") {
        test_grid_mode_from_string(v);
        test_mode = v;
    } else if (key == "repeat") {
        repeat = parse_i(key, v);
        if (repeat < 1) throw ConfigError("config: key 'repeat': must be >= 1");
    } else if (key == "out") {
        out = v;
    } else if (key == "points_out") {
        points_out = v;
    } else if (key == "mc.mode") {
        mc_mode_from_string(v);
        mc_mode = v;
    } else if (key == "mc.m0") {
        mc_m0 = parse_i(key, v);
    } else if (key == "mc.m1") {
        mc_m1 = parse_i(key, v);
    } else if (key == "mc.t") {
        mc_t = parse_f(key, v);
    } else if (key == "mc.x_file") {
        x_file = v;
    } else if (key == "mc.x") {
        x_inline = v;
    } else if (key == "eval.model") {
        model_path = v;
    } else if (key == "eval.grid") {
        grid_spec = v;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void RunConfig::finalize() {
    const ExampleDefaults def = example_defaults(example);
    if (d < 0) d = def.d;
    if (example == "ex1" && d != 1)
        throw ConfigError("config: key 'problem.d': ex1 is one-dimensional");
    if (D < 0.0) D = def.D;
    if (T < 0.0) T = def.T;
    if (A < 0.0) A = std::numbers::pi;
    if (A_train < 0.0) A_train = A;
    if (A_train > A)
        throw ConfigError("config: key 'problem.A_train': must be <= problem.A");
    if (k < 0) k = example == "ex1" ? 1 : 2;
    if (m < 0) m = 3;
    if (!c.empty() && static_cast<int>(c.size()) != d)
        throw ConfigError("config: key 'problem.c': length must equal problem.d");
    if (variant.empty()) variant = def.variant;
    if (M0 < 0) M0 = def.M0;
    if (M1 < 0) M1 = def.M1;
    if (n_pde < 0) n_pde = def.n_pde;
    if (n_ic < 0) n_ic = def.n_ic;
    if (ridge < 0.0) ridge = def.ridge;
    if (collocation.empty()) collocation = def.collocation;
    if (sampler.empty() || sampler == "pseudo")
        sampler = variant == "gaussian" ? "pseudo_uniform" : "pseudo_normal";
    else if (sampler == "sobol")
        sampler = variant == "gaussian" ? "sobol_uniform" : "sobol_normal";
    if (test_mode.empty()) test_mode = d == 1 ? "grid_1d" : "random_box";
    if (test_n < 0) test_n = d == 1 ? 10000 : 6000;

    // cross-field validation (throws ConfigError with the key path)
    try {
        ProblemSpec p = make_problem();
        make_train_config().validate(p);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ProblemSpec RunConfig::make_problem() const {
    BenchmarkParams params;
    params.name = benchmark_from_string(example);
    params.k = k;
    params.m = m;
    params.alpha_q = alpha_q;
    params.beta_E = beta_E;
    if (!c.empty())
        params.c = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
    ProblemSpec p = make_benchmark(params, d, D, T);
    p.box_half_width = A;
    p.train_half_width = A_train;
    p.validate();
    return p;
}

TrainConfig RunConfig::make_train_config() const {
    TrainConfig cfg;
    cfg.variant = variant_from_string(variant);
    cfg.is_scale = is_scale_from_string(is_scale);
    cfg.M0 = M0;
    cfg.M1 = M1;
    cfg.n_pde = n_pde;
    cfg.n_ic = n_ic;
    cfg.ic_weight = ic_weight;
    cfg.ridge = ridge;
    cfg.sampler = sampler_from_string(sampler);
    cfg.seed = seed;
    cfg.t_floor = t_floor;
    if (!solver.empty()) cfg.solver = solver_from_string(solver);
    cfg.collocation = collocation_from_string(collocation);
    return cfg;
}

TestGridMode RunConfig::effective_test_mode() const {
    return test_grid_mode_from_string(test_mode);
}

std::int64_t RunConfig::effective_test_n() const { return test_n; }

double RunConfig::effective_mc_t() const { return mc_t >= 0.0 ? mc_t : 0.5 * T; }

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("example", example);
    e.emplace_back("problem.d", std::to_string(d));
    e.emplace_back("problem.D", fmt(D));
    e.emplace_back("problem.T", fmt(T));
    e.emplace_back("problem.A", fmt(A));
    e.emplace_back("problem.A_train", fmt(A_train));
    e.emplace_back("problem.k", std::to_string(k));
    e.emplace_back("problem.m", std::to_string(m));
    e.emplace_back("problem.alpha_q", fmt(alpha_q));
    e.emplace_back("problem.beta_E", fmt(beta_E));
    if (!c.empty()) {
        std::string list;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) list += ",";
            list += fmt(c[i]);
        }
        e.emplace_back("problem.c", list);
    }
    e.emplace_back("train.variant", variant);
    e.emplace_back("train.is_scale", is_scale);
    e.emplace_back("train.sampler", sampler);
    e.emplace_back("train.M0", std::to_string(M0));
    e.emplace_back("train.M1", std::to_string(M1));
    e.emplace_back("train.n_pde", std::to_string(n_pde));
    e.emplace_back("train.n_ic", std::to_string(n_ic));
    e.emplace_back("train.ic_weight",
                   ic_weight >= 0.0 ? fmt(ic_weight) : "auto(" + fmt(make_train_config().effective_ic_weight()) + ")");
    e.emplace_back("train.ridge", fmt(ridge));
    e.emplace_back("train.seed", std::to_string(seed));
    e.emplace_back("train.t_floor", t_floor >= 0.0 ? fmt(t_floor) : "auto(" + fmt(1e-3 * T) + ")");
    e.emplace_back("train.solver",
                   solver.empty() ? std::string("auto(") + to_string(make_train_config().effective_solver()) + ")"
                                  : solver);
    e.emplace_back("train.collocation", collocation);
    e.emplace_back("test.n", std::to_string(test_n));
    e.emplace_back("test.mode", test_mode);
    e.emplace_back("repeat", std::to_string(repeat));
    return e;
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        base.set(key, value);
    }
    return base;
}

}  // namespace heatnet
