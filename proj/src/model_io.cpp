#include "heatnet/model_io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace heatnet {

namespace {

void write_f64_le(std::ostream& os, double v) {
    auto u = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

double read_f64_le(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i)
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return std::bit_cast<double>(u);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_array(std::ostream& os, const std::string& name, const double* data,
                 std::int64_t count) {
    os << "array " << name << " " << count << "\n";
    for (std::int64_t i = 0; i < count; ++i) write_f64_le(os, data[i]);
    os << "\n";
}

class HeaderMap {
public:
    void set(const std::string& k, const std::string& v) { kv_[k] = v; }
    const std::string& get(const std::string& k) const {
        auto it = kv_.find(k);
        if (it == kv_.end()) throw std::runtime_error("model file: missing key '" + k + "'");
        return it->second;
    }
    bool has(const std::string& k) const { return kv_.count(k) != 0; }
    double get_f(const std::string& k) const { return std::stod(get(k)); }
    std::int64_t get_i(const std::string& k) const { return std::stoll(get(k)); }
    std::uint64_t get_u(const std::string& k) const { return std::stoull(get(k)); }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace

void save_model(const TrainedModel& m, const std::string& path) {
    if (m.problem.example_name == "custom")
        throw std::invalid_argument("save_model: only benchmark problems are persistable");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_model: cannot open " + path);

    const ProblemSpec& p = m.problem;
    const TrainConfig& c = m.config;
    os << model_magic << "\n";
    os << "example = " << p.example_name << "\n";
    os << "d = " << p.d << "\n";
    os << "D = " << fmt(p.diffusion) << "\n";
    os << "T = " << fmt(p.horizon) << "\n";
    os << "A = " << fmt(p.box_half_width) << "\n";
    os << "A_train = " << fmt(p.train_half_width) << "\n";
    os << "k = " << p.params.k << "\n";
    os << "m = " << p.params.m << "\n";
    os << "alpha_q = " << fmt(p.params.alpha_q) << "\n";
    os << "beta_E = " << fmt(p.params.beta_E) << "\n";
    os << "variant = " << to_string(c.variant) << "\n";
    os << "is_scale = " << to_string(c.is_scale) << "\n";
    os << "sampler = " << to_string(c.sampler) << "\n";
    os << "seed = " << c.seed << "\n";
    os << "M0 = " << c.M0 << "\n";
    os << "M1 = " << c.M1 << "\n";
    os << "n_pde = " << c.n_pde << "\n";
    os << "n_ic = " << c.n_ic << "\n";
    os << "ic_weight = " << fmt(c.ic_weight) << "\n";
    os << "ridge = " << fmt(c.ridge) << "\n";
    os << "t_floor = " << fmt(c.t_floor) << "\n";
    os << "solver = " << to_string(c.effective_solver()) << "\n";
    os << "collocation = " << to_string(c.collocation) << "\n";
    os << "rng = " << rng_id << "\n";
    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016" PRIx64, p.fingerprint());
    os << "fingerprint = " << fp << "\n";
    os << "---\n";

    // coefficient vector first (needed to rebuild the problem), then the bank
    write_array(os, "c", p.params.c.data(), p.params.c.size());
    if (m.bank.variant == FeatureVariant::gaussian) {
        write_array(os, "y", m.bank.y.data(), m.bank.y.size());
        write_array(os, "tau", m.bank.tau.data(), m.bank.tau.size());
        write_array(os, "z", m.bank.z.data(), m.bank.z.size());
    } else {
        write_array(os, "eta", m.bank.eta.data(), m.bank.eta.size());
        write_array(os, "r", m.bank.r.data(), m.bank.r.size());
        write_array(os, "xi", m.bank.xi.data(), m.bank.xi.size());
    }
    write_array(os, "weights", m.weights.data(), m.weights.size());
    if (!os) throw std::runtime_error("save_model: write failure on " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_model: cannot open " + path);

    std::string line;
    if (!std::getline(is, line) || line != model_magic)
        throw std::runtime_error("load_model: bad magic / unsupported format version in " + path);

    HeaderMap h;
    while (std::getline(is, line)) {
        if (line == "---") break;
        auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw std::runtime_error("load_model: malformed header line: " + line);
        h.set(line.substr(0, eq), line.substr(eq + 3));
    }

    if (h.get("rng") != rng_id)
        throw std::runtime_error("load_model: model was produced by a different generator (" +
                                 h.get("rng") + ")");

    std::map<std::string, std::vector<double>> arrays;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, name;
        std::int64_t count = 0;
        ls >> tag >> name >> count;
        if (tag != "array" || count < 0)
            throw std::runtime_error("load_model: malformed array record: " + line);
        std::vector<double> data(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) data[static_cast<std::size_t>(i)] = read_f64_le(is);
        if (!is) throw std::runtime_error("load_model: truncated array " + name);
        arrays.emplace(name, std::move(data));
    }

    auto take = [&](const std::string& name) -> std::vector<double> {
        auto it = arrays.find(name);
        if (it == arrays.end()) throw std::runtime_error("load_model: missing array " + name);
        return std::move(it->second);
    };

    const int d = static_cast<int>(h.get_i("d"));
    BenchmarkParams params;
    params.name = benchmark_from_string(h.get("example"));
    params.k = static_cast<int>(h.get_i("k"));
    params.m = static_cast<int>(h.get_i("m"));
    params.alpha_q = h.get_f("alpha_q");
    params.beta_E = h.get_f("beta_E");
    std::vector<double> cvec = take("c");
    params.c = Eigen::Map<const Vector>(cvec.data(), static_cast<Eigen::Index>(cvec.size()));

    ProblemSpec p = make_benchmark(params, d, h.get_f("D"), h.get_f("T"));
    p.box_half_width = h.get_f("A");
    p.train_half_width = h.get_f("A_train");
    p.validate();

    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016" PRIx64, p.fingerprint());
    if (h.get("fingerprint") != fp)
        throw std::runtime_error("load_model: fingerprint mismatch (file " + h.get("fingerprint") +
                                 ", rebuilt " + fp + ")");

    TrainConfig cfg;
    cfg.variant = variant_from_string(h.get("variant"));
    cfg.is_scale = is_scale_from_string(h.get("is_scale"));
    cfg.sampler = sampler_from_string(h.get("sampler"));
    cfg.seed = h.get_u("seed");
    cfg.M0 = h.get_i("M0");
    cfg.M1 = h.get_i("M1");
    cfg.n_pde = h.get_i("n_pde");
    cfg.n_ic = h.get_i("n_ic");
    cfg.ic_weight = h.get_f("ic_weight");
    cfg.ridge = h.get_f("ridge");
    cfg.t_floor = h.get_f("t_floor");
    cfg.solver = solver_from_string(h.get("solver"));
    cfg.collocation = collocation_from_string(h.get("collocation"));

    TrainedModel m;
    m.problem = p;
    m.config = cfg;

    FeatureBank& b = m.bank;
    b.variant = cfg.variant;
    b.M0 = cfg.M0;
    b.M1 = cfg.M1;
    b.d = d;
    b.is_scale = cfg.is_scale;
    b.sampler = cfg.sampler;
    b.seed = cfg.seed;
    auto to_rowmat = [&](const std::string& name, std::int64_t rows) {
        std::vector<double> v = take(name);
        if (static_cast<std::int64_t>(v.size()) != rows * d)
            throw std::runtime_error("load_model: array " + name + " has unexpected length");
        RowMatrix mrows(rows, d);
        std::memcpy(mrows.data(), v.data(), v.size() * sizeof(double));
        return mrows;
    };
    auto to_vec = [&](const std::string& name, std::int64_t n) {
        std::vector<double> v = take(name);
        if (static_cast<std::int64_t>(v.size()) != n)
            throw std::runtime_error("load_model: array " + name + " has unexpected length");
        return Vector(Eigen::Map<const Vector>(v.data(), n));
    };
    if (b.variant == FeatureVariant::gaussian) {
        b.y = to_rowmat("y", b.M0);
        b.tau = to_vec("tau", b.M1);
        b.z = to_rowmat("z", b.M1);
    } else {
        b.eta = to_rowmat("eta", b.M0);
        b.r = to_vec("r", b.M1);
        b.xi = to_rowmat("xi", b.M1);
    }
    b.finalize(p);
    m.weights = to_vec("weights", b.total());
    return m;
}

}  // namespace heatnet
