#include "heatnet/cli.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "heatnet/model_io.hpp"

namespace heatnet {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_echo(const RunConfig& cfg, std::ostream& os) {
    for (const auto& [key, value] : cfg.echo()) os << "# " << key << " = " << value << "\n";
}

RowMatrix read_points_file(const std::string& path, int cols_expected, const char* what) {
    std::ifstream is(path);
    if (!is) throw ConfigError(std::string("config: cannot open ") + what + " file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) continue;
        if (static_cast<int>(row.size()) != cols_expected)
            throw ConfigError(std::string("config: ") + path + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(cols_expected) + " values per line");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(std::string("config: ") + path + ": no points");
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), cols_expected);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < cols_expected; ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][j];
    return out;
}

}  // namespace

std::uint64_t point_hash(ConstVec v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::uint64_t u = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) {
            h ^= (u >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string point_hash_hex(ConstVec v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, point_hash(v));
    return buf;
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
    if (cfg.out.empty() || cfg.out == "-")
        throw ConfigError("config: key 'out': train requires a model file path");
    ProblemSpec p = cfg.make_problem();
    TrainConfig tc = cfg.make_train_config();
    if (cfg.dry_run) {
        for (const auto& [key, value] : cfg.echo()) log << key << " = " << value << "\n";
        return;
    }
    TrainedModel m = train(p, tc);
    save_model(m, cfg.out);
    log << "trained " << cfg.example << " d=" << p.d << " M=" << m.bank.total()
        << " rows=" << (m.diag.rows_pde + m.diag.rows_ic) << " build=" << m.diag.build_seconds
        << "s solve=" << m.diag.train_seconds << "s grad_res=" << m.diag.solve.grad_residual
        << " -> " << cfg.out << "\n";
}

std::vector<ErrorReport> cmd_bench(const RunConfig& cfg, std::ostream& csv, std::ostream& log) {
    ProblemSpec p = cfg.make_problem();

    write_echo(cfg, csv);
    csv << "example,variant,d,D,T,M0,M1,N_pde,N_ic,ic_weight,ridge,sampler,seed,"
           "rel_l1,rel_l2,rel_linf,build_s,train_s\n";
    csv.flush();

    std::vector<ErrorReport> reports;
    if (cfg.dry_run) return reports;

    std::vector<double> l1s, l2s, linfs;
    for (std::int64_t rep = 0; rep < cfg.repeat; ++rep) {
        TrainConfig tc = cfg.make_train_config();
        tc.seed = cfg.seed + static_cast<std::uint64_t>(rep);

        TrainedModel m = train(p, tc);
        RowMatrix grid = make_test_grid(p, cfg.effective_test_n(), cfg.effective_test_mode(),
                                        RngState{tc.seed, 0});
        Vector pred = m.predict_batch(grid);
        Vector truth(grid.rows());
        for (Eigen::Index i = 0; i < grid.rows(); ++i)
            truth[i] = p.exact(grid(i, 0), grid.row(i).tail(p.d).transpose());
        RelErrors re = rel_errors(pred, truth);

        ErrorReport r;
        r.rel_l1 = re.rel_l1;
        r.rel_l2 = re.rel_l2;
        r.rel_linf = re.rel_linf;
        r.n_test = grid.rows();
        r.build_seconds = m.diag.build_seconds;
        r.train_seconds = m.diag.train_seconds;
        r.seed = tc.seed;
        reports.push_back(r);
        l1s.push_back(re.rel_l1);
        l2s.push_back(re.rel_l2);
        linfs.push_back(re.rel_linf);

        csv << cfg.example << "," << cfg.variant << "," << p.d << "," << fmt(p.diffusion) << ","
            << fmt(p.horizon) << "," << tc.M0 << "," << tc.M1 << "," << tc.n_pde << ","
            << tc.n_ic << "," << fmt(tc.effective_ic_weight()) << "," << fmt(tc.ridge) << ","
            << cfg.sampler << "," << tc.seed << "," << fmt(re.rel_l1) << "," << fmt(re.rel_l2)
            << "," << fmt(re.rel_linf) << "," << fmt(r.build_seconds) << ","
            << fmt(r.train_seconds) << "\n";
        csv.flush();
        log << "seed " << tc.seed << ": rel_l2=" << re.rel_l2 << " rel_linf=" << re.rel_linf
            << " (build " << r.build_seconds << "s, solve " << r.train_seconds << "s)\n";
    }

    if (cfg.repeat > 1) {
        auto b1 = percentile_bands(l1s);
        auto b2 = percentile_bands(l2s);
        auto binf = percentile_bands(linfs);
        const char* names[5] = {"P10", "P25", "P50", "P75", "P90"};
        for (int i = 0; i < 5; ++i) {
            csv << cfg.example << "," << cfg.variant << "," << p.d << "," << fmt(p.diffusion)
                << "," << fmt(p.horizon) << "," << cfg.M0 << "," << cfg.M1 << "," << cfg.n_pde
                << "," << cfg.n_ic << ","
                << fmt(cfg.make_train_config().effective_ic_weight()) << "," << fmt(cfg.ridge)
                << "," << cfg.sampler << "," << names[i] << "," << fmt(b1[i]) << "," << fmt(b2[i])
                << "," << fmt(binf[i]) << ",," << "\n";
        }
        csv.flush();
    }
    return reports;
}

void cmd_eval(const RunConfig& cfg, std::ostream& csv, std::ostream& log) {
    if (cfg.model_path.empty())
        throw ConfigError("config: key 'eval.model': a model file is required");
    TrainedModel m = load_model(cfg.model_path);
    const ProblemSpec& p = m.problem;

    if (cfg.example_set && cfg.example != p.example_name && !cfg.force_fingerprint)
        throw ConfigError("config: model was trained on '" + p.example_name +
                          "' but '" + cfg.example + "' was requested (use --force to override)");

    RowMatrix pts;
    if (!cfg.grid_spec.empty()) {
        if (p.d != 1) throw ConfigError("config: key 'eval.grid': grid specs require d = 1");
        auto xpos = cfg.grid_spec.find('x');
        if (xpos == std::string::npos)
            throw ConfigError("config: key 'eval.grid': expected NtxNx, e.g. 100x100");
        std::int64_t n_t = std::stoll(cfg.grid_spec.substr(0, xpos));
        std::int64_t n_x = std::stoll(cfg.grid_spec.substr(xpos + 1));
        if (n_t < 1 || n_x < 1) throw ConfigError("config: key 'eval.grid': counts must be >= 1");
        pts.resize(n_t * n_x, 2);
        const double half = 0.5 * p.box_half_width;
        for (std::int64_t i = 0; i < n_t; ++i) {
            double t = n_t == 1 ? 0.0 : p.horizon * double(i) / double(n_t - 1);
            for (std::int64_t j = 0; j < n_x; ++j) {
                pts(i * n_x + j, 0) = t;
                pts(i * n_x + j, 1) =
                    n_x == 1 ? 0.0 : -half + 2.0 * half * double(j) / double(n_x - 1);
            }
        }
    } else if (!cfg.x_file.empty()) {
        pts = read_points_file(cfg.x_file, 1 + p.d, "points");
    } else {
        pts = make_test_grid(p, cfg.effective_test_n(),
                             p.d == 1 ? TestGridMode::grid_1d : TestGridMode::random_box,
                             RngState{cfg.seed, 0});
    }

    const bool hashed = p.d > 8;
    write_echo(cfg, csv);
    csv << "# model = " << cfg.model_path << "\n";
    csv << "t,";
    if (hashed)
        csv << "x_hash";
    else
        for (int i = 0; i < p.d; ++i) csv << "x" << (i + 1) << ",";
    if (!hashed) csv << "prediction,exact,abs_error\n";
    else csv << ",prediction,exact,abs_error\n";

    std::ofstream sidecar;
    if (hashed && !cfg.points_out.empty()) {
        sidecar.open(cfg.points_out);
        if (!sidecar) throw ConfigError("config: cannot open points_out file " + cfg.points_out);
    }

    Vector pred = m.predict_batch(pts);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        auto x = pts.row(i).tail(p.d).transpose();
        csv << fmt(pts(i, 0)) << ",";
        if (hashed)
            csv << point_hash_hex(x) << ",";
        else
            for (int j = 0; j < p.d; ++j) csv << fmt(x[j]) << ",";
        csv << fmt(pred[i]) << ",";
        if (p.has_exact()) {
            double ex = p.exact(pts(i, 0), x);
            csv << fmt(ex) << "," << fmt(std::abs(pred[i] - ex));
        } else {
            csv << ",";
        }
        csv << "\n";
        if (sidecar.is_open()) {
            sidecar << fmt(pts(i, 0));
            for (int j = 0; j < p.d; ++j) sidecar << " " << fmt(x[j]);
            sidecar << "\n";
        }
    }
    csv.flush();
    log << "evaluated " << pts.rows() << " points from " << cfg.model_path << "\n";
}

void cmd_mc(const RunConfig& cfg, std::ostream& csv, std::ostream& log) {
    ProblemSpec p = cfg.make_problem();
    if (cfg.mc_m0 < 1 || cfg.mc_m1 < 0)
        throw ConfigError("config: keys 'mc.m0'/'mc.m1': sample counts must be positive");

    RowMatrix xs;
    if (!cfg.x_file.empty()) {
        xs = read_points_file(cfg.x_file, p.d, "points");
    } else if (!cfg.x_inline.empty()) {
        std::string s = cfg.x_inline;
        for (char& ch : s)
            if (ch == ',') ch = ' ';
        std::istringstream ls(s);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (static_cast<int>(row.size()) != p.d)
            throw ConfigError("config: key 'mc.x': expected " + std::to_string(p.d) + " values");
        xs.resize(1, p.d);
        for (int j = 0; j < p.d; ++j) xs(0, j) = row[j];
    } else {
        xs = RowMatrix::Zero(1, p.d);
    }

    const double t = cfg.effective_mc_t();
    const McMode mode = mc_mode_from_string(cfg.mc_mode);

    write_echo(cfg, csv);
    csv << "# mc.mode = " << cfg.mc_mode << "\n";
    csv << "# mc.t = " << fmt(t) << "\n";
    csv << "t,x_hash,mean,std_error,n,mode\n";
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        auto x = xs.row(i).transpose();
        // stream 4+i: every point owns its substream, so results do not
        // depend on how points are scheduled
        McEstimate e = estimate_solution(p, t, x, cfg.mc_m0, cfg.mc_m1, mode,
                                         RngState{cfg.seed, 4 + static_cast<std::uint64_t>(i)});
        csv << fmt(t) << "," << point_hash_hex(x) << "," << fmt(e.mean) << ","
            << fmt(e.std_error) << "," << e.n_samples << "," << cfg.mc_mode << "\n";
        csv.flush();
    }
    log << "estimated " << xs.rows() << " point(s) at t=" << t << "\n";
}

}  // namespace heatnet
