#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "heatnet/cli.hpp"
#include "heatnet/model_io.hpp"
#include "heatnet/run_config.hpp"

using namespace heatnet;

namespace {
struct TempFile {
    std::string path;
    explicit TempFile(const char* name) : path(std::string("/tmp/heatnet_cfg_") + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};
}  // namespace

TEST_SUITE_BEGIN("run_config");

TEST_CASE("minimal ex1 config resolves the paper defaults") {
    RunConfig cfg;
    cfg.set("example", "ex1");
    cfg.finalize();
    CHECK(cfg.d == 1);
    CHECK(cfg.D == 1.0);
    CHECK(cfg.T == 1.0);
    CHECK(cfg.M0 == 32);
    CHECK(cfg.M1 == 64);
    CHECK(cfg.n_pde == 3000);
    CHECK(cfg.n_ic == 1000);
    CHECK(cfg.variant == "gaussian");
    CHECK(cfg.sampler == "pseudo_uniform");
    CHECK(cfg.make_train_config().effective_ic_weight() == doctest::Approx(3.0));
    CHECK(cfg.make_train_config().effective_solver() == SolverKind::svd_pinv);
}

TEST_CASE("ex2a defaults follow the paper") {
    RunConfig cfg;
    cfg.set("example", "ex2a");
    cfg.finalize();
    CHECK(cfg.d == 2);
    CHECK(cfg.T == 0.05);
    CHECK(cfg.M0 == 15000);
    CHECK(cfg.M1 == 0);
    CHECK(cfg.ridge == 1e-6);
    CHECK(cfg.make_train_config().effective_ic_weight() == doctest::Approx(5.0));
    CHECK(cfg.variant == "importance");
    CHECK(cfg.sampler == "pseudo_normal");
}

TEST_CASE("config file parsing, overrides and errors") {
    TempFile f("basic.cfg");
    {
        std::ofstream os(f.path);
        os << "# benchmark run\n";
        os << "example = ex2b\n";
        os << "problem.d = 4\n";
        os << "train.M0 = 100\n";
        os << "train.seed = 5\n";
        os << "\n";
    }
    RunConfig cfg = parse_config_file(f.path);
    CHECK(cfg.example == "ex2b");
    CHECK(cfg.d == 4);
    CHECK(cfg.M0 == 100);
    CHECK(cfg.seed == 5);
    cfg.set("train.seed", "7");  // flag-style override wins
    cfg.finalize();
    CHECK(cfg.seed == 7);
    CHECK(cfg.M1 == 1000);  // untouched defaults still fill in

    CHECK_THROWS_AS(RunConfig{}.set("train.bogus", "1"), ConfigError);
    CHECK_THROWS_AS(RunConfig{}.set("train.M0", "ten"), ConfigError);
    CHECK_THROWS_AS(RunConfig{}.set("example", "ex9"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/tmp/heatnet_missing.cfg"), ConfigError);

    TempFile bad("bad.cfg");
    {
        std::ofstream os(bad.path);
        os << "just some junk\n";
    }
    CHECK_THROWS_AS(parse_config_file(bad.path), ConfigError);
}

TEST_CASE("constraint violations carry the key path") {
    RunConfig cfg;
    cfg.set("example", "ex2b");
    cfg.set("problem.A", "2.0");
    cfg.set("problem.A_train", "3.0");
    try {
        cfg.finalize();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("A_train") != std::string::npos);
    }

    RunConfig d0;
    d0.set("example", "ex1");
    d0.set("problem.d", "3");
    CHECK_THROWS_AS(d0.finalize(), ConfigError);
}

TEST_CASE("echo lists every resolved key") {
    RunConfig cfg;
    cfg.set("example", "ex2b");
    cfg.finalize();
    auto echo = cfg.echo();
    auto has = [&](const std::string& k) {
        for (auto& [key, value] : echo)
            if (key == k) return true;
        return false;
    };
    for (const char* k : {"example", "problem.d", "problem.T", "train.M0", "train.sampler",
                          "train.ridge", "test.n", "repeat"})
        CHECK(has(k));
}

TEST_CASE("point hash is stable and order-sensitive") {
    Vector a(3), b(3);
    a << 1.0, 2.0, 3.0;
    b << 3.0, 2.0, 1.0;
    CHECK(point_hash(a) == point_hash(a));
    CHECK(point_hash(a) != point_hash(b));
    CHECK(point_hash_hex(a).size() == 16);
}

TEST_CASE("cmd_mc writes a deterministic CSV with the spec columns") {
    RunConfig cfg;
    cfg.set("example", "ex1");
    cfg.set("mc.m0", "5000");
    cfg.set("mc.m1", "5000");
    cfg.set("mc.t", "0.5");
    cfg.set("mc.x", "1.0");
    cfg.finalize();
    std::ostringstream log;
    std::ostringstream csv1, csv2;
    cmd_mc(cfg, csv1, log);
    cmd_mc(cfg, csv2, log);
    CHECK(csv1.str() == csv2.str());
    CHECK(csv1.str().find("t,x_hash,mean,std_error,n,mode") != std::string::npos);
    CHECK(csv1.str().find("# example = ex1") != std::string::npos);

    RunConfig bad = cfg;
    bad.mc_m0 = 0;
    CHECK_THROWS_AS(cmd_mc(bad, csv1, log), ConfigError);
}

TEST_CASE("cmd_bench emits rows plus percentile summaries") {
    RunConfig cfg;
    cfg.set("example", "ex2b");
    cfg.set("problem.d", "2");
    cfg.set("train.M0", "16");
    cfg.set("train.M1", "24");
    cfg.set("train.n_pde", "200");
    cfg.set("train.n_ic", "50");
    cfg.set("test.n", "500");
    cfg.set("repeat", "3");
    cfg.finalize();
    std::ostringstream csv, log;
    auto reports = cmd_bench(cfg, csv, log);
    CHECK(reports.size() == 3);
    std::string s = csv.str();
    CHECK(s.find("example,variant,d,D,T,M0,M1,N_pde,N_ic,ic_weight,ridge,sampler,seed,"
                 "rel_l1,rel_l2,rel_linf,build_s,train_s") != std::string::npos);
    CHECK(s.find(",P50,") != std::string::npos);
    CHECK(s.find(",P90,") != std::string::npos);
    for (const auto& r : reports) CHECK(r.rel_l2 < 0.5);
}

TEST_CASE("cmd_train then cmd_eval round trip") {
    TempFile model("trained.hnm");
    RunConfig tcfg;
    tcfg.set("example", "ex2b");
    tcfg.set("problem.d", "2");
    tcfg.set("train.M0", "16");
    tcfg.set("train.M1", "24");
    tcfg.set("train.n_pde", "200");
    tcfg.set("train.n_ic", "50");
    tcfg.set("out", model.path);
    tcfg.finalize();
    std::ostringstream log;
    cmd_train(tcfg, log);

    RunConfig ecfg;
    ecfg.set("eval.model", model.path);
    ecfg.set("test.n", "100");
    ecfg.finalize();
    std::ostringstream csv;
    cmd_eval(ecfg, csv, log);
    std::string s = csv.str();
    CHECK(s.find("t,x1,x2,prediction,exact,abs_error") != std::string::npos);

    // example mismatch is rejected without --force
    RunConfig mismatch;
    mismatch.set("example", "ex3");
    mismatch.set("eval.model", model.path);
    mismatch.finalize();
    std::ostringstream csv2;
    CHECK_THROWS_AS(cmd_eval(mismatch, csv2, log), ConfigError);
    mismatch.force_fingerprint = true;
    cmd_eval(mismatch, csv2, log);  // forced override works
}

TEST_SUITE_END();
