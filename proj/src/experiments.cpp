#include "somlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "somlab/categorical.hpp"
#include "somlab/meanfield.hpp"
#include "somlab/order_analysis.hpp"
#include "somlab/parallel.hpp"
#include "somlab/quadrature.hpp"
#include "somlab/quantization.hpp"

namespace somlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            cfg.data_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        if (cfg.data_[section].count(key))
            throw ConfigError("duplicate key " + section + "." + key);
        cfg.data_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::raw(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    if (s == data_.end() || !s->second.count(key))
        throw ConfigError("missing required key " + section + "." + key);
    consumed_.insert(section + "." + key);
    return s->second.at(key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    return raw(section, key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return has(section, key) ? raw(section, key) : fallback;
}

double ConfigFile::get_real(const std::string& section, const std::string& key) const {
    const std::string v = raw(section, key);
    try {
        std::size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": not a number: " + v);
    }
}

double ConfigFile::get_real(const std::string& section, const std::string& key,
                            double fallback) const {
    return has(section, key) ? get_real(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const std::string v = raw(section, key);
    try {
        std::size_t pos = 0;
        const std::int64_t r = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": not an integer: " + v);
    }
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

std::vector<double> ConfigFile::get_real_list(const std::string& section,
                                              const std::string& key) const {
    const std::string v = raw(section, key);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const std::string c = trim(cell);
        try {
            out.push_back(std::stod(c));
        } catch (const std::exception&) {
            throw ConfigError(section + "." + key + ": not a number: " + c);
        }
    }
    if (out.empty()) throw ConfigError(section + "." + key + ": empty list");
    return out;
}

std::vector<std::int64_t> ConfigFile::get_int_list(const std::string& section,
                                                   const std::string& key) const {
    std::vector<std::int64_t> out;
    for (double v : get_real_list(section, key)) {
        const auto i = static_cast<std::int64_t>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError(section + "." + key + ": expected integers");
        out.push_back(i);
    }
    return out;
}

void ConfigFile::require_all_consumed() const {
    std::vector<std::string> unknown;
    for (const auto& [section, kv] : data_)
        for (const auto& [key, value] : kv)
            if (!consumed_.count(section + "." + key)) unknown.push_back(section + "." + key);
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
}

std::string ConfigFile::echo() const {
    std::string out;
    for (const auto& [section, kv] : data_) {
        out += "[" + section + "]\n";
        for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
    }
    return out;
}

LatticeSpec parse_lattice(const ConfigFile& cfg) {
    const std::string kind = cfg.get_string("lattice", "kind", "string-1d");
    if (kind == "string-1d")
        return LatticeSpec::string1d(static_cast<int>(cfg.get_int("lattice", "n")));
    if (kind == "grid-2d")
        return LatticeSpec::grid2d(static_cast<int>(cfg.get_int("lattice", "n1")),
                                   static_cast<int>(cfg.get_int("lattice", "n2")));
    throw ConfigError("lattice.kind must be string-1d or grid-2d, got " + kind);
}

NeighborhoodFunction parse_neighborhood(const ConfigFile& cfg) {
    const std::string kind = cfg.get_string("neighborhood", "kind", "step");
    if (kind == "indicator-0") return NeighborhoodFunction::indicator0();
    if (kind == "indicator-8") return NeighborhoodFunction::indicator8();
    if (kind == "step")
        return NeighborhoodFunction::step(static_cast<int>(cfg.get_int("neighborhood", "k", 1)));
    if (kind == "table")
        return NeighborhoodFunction::from_table(cfg.get_real_list("neighborhood", "values"));
    throw ConfigError("neighborhood.kind must be indicator-0, indicator-8, step or table");
}

StimuliDistribution make_named_density(const std::string& name) {
    if (name == "linear")
        return StimuliDistribution::density1d([](double x) { return 2.0 * x; }, "linear",
                                              /*strictly_log_concave=*/true);
    if (name == "truncated-gaussian") {
        const double mu = 0.5, sigma = 0.2;
        const double z =
            0.5 * (std::erf((1.0 - mu) / (sigma * M_SQRT2)) - std::erf((0.0 - mu) / (sigma * M_SQRT2)));
        return StimuliDistribution::density1d(
            [mu, sigma, z](double x) {
                return std::exp(-0.5 * sq((x - mu) / sigma)) / (sigma * std::sqrt(2.0 * M_PI) * z);
            },
            "truncated-gaussian", /*strictly_log_concave=*/true);
    }
    throw ConfigError("unknown density name: " + name);
}

StimuliDistribution parse_stimuli(const ConfigFile& cfg) {
    const std::string kind = cfg.get_string("stimuli", "kind", "uniform");
    if (kind == "uniform") {
        std::vector<double> b{0.0, 1.0};
        if (cfg.has("stimuli", "bounds")) b = cfg.get_real_list("stimuli", "bounds");
        if (b.size() % 2 != 0) throw ConfigError("stimuli.bounds needs lo,hi pairs");
        std::vector<Interval> axes;
        for (std::size_t i = 0; i + 1 < b.size(); i += 2) axes.push_back({b[i], b[i + 1]});
        return StimuliDistribution::uniform_box(std::move(axes));
    }
    if (kind == "density") return make_named_density(cfg.get_string("stimuli", "density"));
    if (kind == "discrete")
        return StimuliDistribution::discrete_from_csv(cfg.get_string("stimuli", "file"));
    throw ConfigError("stimuli.kind must be uniform, density or discrete");
}

GainSchedule parse_schedule(const ConfigFile& cfg) {
    const std::string kind = cfg.get_string("schedule", "kind", "constant");
    if (kind == "constant") return GainSchedule::constant(cfg.get_real("schedule", "eps", 0.1));
    if (kind == "power")
        return GainSchedule::power(cfg.get_real("schedule", "a", 1.0),
                                   cfg.get_real("schedule", "b", 100.0),
                                   cfg.get_real("schedule", "gamma", 1.0));
    if (kind == "log") return GainSchedule::log_rule(cfg.get_real("schedule", "A", 0.5));
    throw ConfigError("schedule.kind must be constant, power or log");
}

namespace {

InitMode parse_init(const ConfigFile& cfg, InitMode fallback) {
    const std::string v = cfg.get_string("run", "init", "");
    if (v.empty()) return fallback;
    if (v == "random") return InitMode::Random;
    if (v == "ordered") return InitMode::Ordered1d;
    if (v == "grid-fpp") return InitMode::GridFpp;
    throw ConfigError("run.init must be random, ordered or grid-fpp");
}

class Csv {
  public:
    Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error("cannot open " + path.string());
        write_row(header);
    }
    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

std::string num(double v) { return format_real(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

struct Reporter {
    std::filesystem::path dir;
    std::string summary;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit Reporter(const std::string& out_dir) : dir(out_dir) {
        std::filesystem::create_directories(dir);
    }
    void echo_config(const std::string& kind, const ConfigFile& cfg, std::uint64_t seed) {
        std::ofstream out(dir / "config_echo.txt");
        out << "# experiment = " << kind << "\n# seed = " << seed << "\n" << cfg.echo();
    }
    void note(const std::string& line) { summary += line + "\n"; }
    void finish() {
        const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        summary += "wall_clock_ms = " + std::to_string(dt) + "\n";
        std::ofstream out(dir / "summary.txt");
        out << summary;
    }
};

void write_hitting_csvs(Reporter& rep, const HittingTimeReport& r) {
    Csv trials(rep.dir / "trials.csv", {"trial", "seed", "tau"});
    for (const auto& t : r.trials)
        trials.write_row({num(t.trial), num(t.seed), num(t.time)});
    Csv summary(rep.dir / "summary.csv",
                {"trials", "finite", "mean", "median", "max", "budget"});
    summary.write_row({num(r.trials.size()), num(r.finite_count), num(r.mean), num(r.median),
                       num(r.max), num(r.budget)});
    rep.note("trials = " + std::to_string(r.trials.size()));
    rep.note("finite = " + std::to_string(r.finite_count));
    rep.note("mean_tau = " + num(r.mean));
}

std::uint64_t resolve_seed(const ConfigFile& cfg, const RunOptions& opt) {
    const auto base = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 1));
    return opt.seed_override ? *opt.seed_override : base;
}

// ---- experiment runners ------------------------------------------------
// Each runner parses and validates its whole configuration up front; a dry
// run stops right before any computation or output.

void run_ordering(ConfigFile& cfg, const RunOptions& opt, Reporter* rep, std::uint64_t seed,
                  bool dry) {
    const LatticeSpec lattice = parse_lattice(cfg);
    ProcessScenario sc{lattice, parse_neighborhood(cfg), parse_stimuli(cfg), parse_schedule(cfg),
                       parse_init(cfg, InitMode::Random), std::nullopt};
    const OrgPredicate pred = lattice.kind == LatticeKind::String1d ? OrgPredicate::Ordered1d
                                                                    : OrgPredicate::Fpp;
    const int trials = static_cast<int>(cfg.get_int("run", "trials", 200));
    const auto budget = static_cast<std::uint64_t>(cfg.get_int("run", "budget", 1000000));
    if (trials < 1) throw ConfigError("run.trials must be positive");
    if (dry) return;
    const auto r = hitting_time_experiment(sc, pred, trials, budget, seed, opt.workers);
    write_hitting_csvs(*rep, r);
}

void run_exit(ConfigFile& cfg, const RunOptions& opt, Reporter* rep, std::uint64_t seed,
              bool dry) {
    const LatticeSpec lattice = parse_lattice(cfg);
    const bool grid = lattice.kind == LatticeKind::Grid2d;
    ProcessScenario sc{lattice, parse_neighborhood(cfg), parse_stimuli(cfg),
                       GainSchedule::constant(0.5),  // placeholder; exit runs take a raw eps
                       parse_init(cfg, grid ? InitMode::GridFpp : InitMode::Ordered1d),
                       std::nullopt};
    const double eps = cfg.get_real("run", "eps", 0.1);
    const int trials = static_cast<int>(cfg.get_int("run", "trials", 50));
    const auto budget = static_cast<std::uint64_t>(cfg.get_int("run", "budget", 1000000));
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("run.eps must lie in [0,1[");
    if (dry) return;
    const auto r = exit_time_experiment(sc, grid ? OrgPredicate::Fpp : OrgPredicate::Ordered1d,
                                        eps, trials, budget, seed, opt.workers);
    write_hitting_csvs(*rep, r);
    rep->note("exits = " + std::to_string(r.finite_count));
}

void run_converge(ConfigFile& cfg, const RunOptions& opt, Reporter* rep, std::uint64_t seed,
                  bool dry) {
    const LatticeSpec lattice = parse_lattice(cfg);
    const NeighborhoodFunction lambda = parse_neighborhood(cfg);
    const StimuliDistribution mu = parse_stimuli(cfg);
    ProcessScenario sc{lattice, lambda, mu, parse_schedule(cfg),
                       parse_init(cfg, InitMode::Ordered1d), std::nullopt};
    const int trials = static_cast<int>(cfg.get_int("run", "trials", 100));
    const auto steps = static_cast<std::uint64_t>(cfg.get_int("run", "steps", 1000000));
    const double tol = cfg.get_real("converge", "tolerance", 1e-2);
    std::optional<Vec> explicit_target;
    if (cfg.has("converge", "target")) {
        explicit_target = cfg.get_real_list("converge", "target");
        if (explicit_target->size() != static_cast<std::size_t>(lattice.units()))
            throw ConfigError("converge.target length does not match the lattice");
    }
    if (dry) return;

    Vec target;
    if (explicit_target) {
        target = *explicit_target;
    } else if (mu.kind() == StimuliKind::UniformBox && lambda.is_step()) {
        target = uniform_limit_linear_system(lattice.units(), lambda);
    } else {
        const MeanField mf = MeanField::make(lattice, lambda, mu);
        const int n = lattice.units();
        Vec w0(static_cast<std::size_t>(n));
        const auto& b = mu.bounds()[0];
        for (int i = 0; i < n; ++i)
            w0[static_cast<std::size_t>(i)] = b.lo + (b.hi - b.lo) * (2.0 * i + 1.0) / (2.0 * n);
        target = solve_equilibrium(mf, NetworkState::from_weights(lattice, 1, w0)).state.w;
    }

    std::vector<double> dev(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t k) {
        RandomStream rng(trial_seed(seed, k));
        NetworkState s = sc.make_initial(rng);
        const RunResult res = run(std::move(s), mu, sc.schedule, lambda, steps, rng);
        double m = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i)
            m = std::max(m, std::abs(res.state.w[i] - target[i]));
        dev[k] = m;
    }, opt.workers);

    Csv trials_csv(rep->dir / "trials.csv", {"trial", "seed", "max_abs_dev", "within_tol"});
    int pass = 0;
    for (int k = 0; k < trials; ++k) {
        const bool ok = dev[static_cast<std::size_t>(k)] <= tol;
        pass += ok ? 1 : 0;
        trials_csv.write_row({num(k), num(trial_seed(seed, static_cast<std::uint64_t>(k))),
                              num(dev[static_cast<std::size_t>(k)]), ok ? "1" : "0"});
    }
    Csv target_csv(rep->dir / "target.csv", {"unit", "value"});
    for (std::size_t i = 0; i < target.size(); ++i) target_csv.write_row({num(i), num(target[i])});
    rep->note("within_tolerance = " + std::to_string(pass) + "/" + std::to_string(trials));
}

void run_invariant(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t seed,
                   bool dry) {
    const LatticeSpec lattice = parse_lattice(cfg);
    const NeighborhoodFunction lambda = parse_neighborhood(cfg);
    const StimuliDistribution mu = parse_stimuli(cfg);
    const auto eps_values = cfg.get_real_list("invariant", "eps");
    const auto burn_in = static_cast<std::uint64_t>(cfg.get_int("invariant", "burn_in", 100000));
    const auto horizon = static_cast<std::uint64_t>(cfg.get_int("invariant", "horizon", 1000000));
    if (dry) return;
    const auto rows =
        invariant_concentration_experiment(lattice, lambda, mu, eps_values, burn_in, horizon, seed);
    Csv out(rep->dir / "concentration.csv", {"eps", "mean_distance"});
    for (const auto& r : rows) out.write_row({num(r.eps), num(r.mean_distance)});
    for (const auto& r : rows)
        rep->note("eps " + num(r.eps) + " -> mean distance " + num(r.mean_distance));
}

void write_equilibrium_csv(Reporter& rep, const std::string& file, const EquilibriumReport& eq) {
    std::vector<std::string> header{"residual", "max_real_eig_flow", "cooperative", "verdict"};
    for (int e = 0; e < 5; ++e) header.push_back("eig" + std::to_string(e + 1));
    for (std::size_t i = 0; i < eq.state.w.size(); ++i) header.push_back("m" + std::to_string(i));
    Csv out(rep.dir / file, header);
    std::vector<std::string> row{num(eq.residual_inf), num(eq.max_real_eig_flow),
                                 eq.cooperative ? "1" : "0",
                                 eq.verdict == StabilityVerdict::Stable     ? "stable"
                                 : eq.verdict == StabilityVerdict::Unstable ? "unstable"
                                                                            : "inconclusive"};
    for (int e = 0; e < 5; ++e)
        row.push_back(e < static_cast<int>(eq.flow_eigs_real.size())
                          ? num(eq.flow_eigs_real[static_cast<std::size_t>(e)])
                          : "");
    for (double v : eq.state.w) row.push_back(num(v));
    out.write_row(row);
}

void run_meanfield(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t seed,
                   bool dry) {
    const LatticeSpec lattice = parse_lattice(cfg);
    const NeighborhoodFunction lambda = parse_neighborhood(cfg);
    const StimuliDistribution mu = parse_stimuli(cfg);
    const double tol = cfg.get_real("meanfield", "tolerance", 1e-10);
    const std::string mode = cfg.get_string("meanfield", "init", "linear");
    if (mode != "linear" && mode != "ordered-random")
        throw ConfigError("meanfield.init must be linear or ordered-random");
    if (mu.dim() != 1) throw ConfigError("meanfield experiment is one-dimensional");
    if (dry) return;

    const MeanField mf = MeanField::make(lattice, lambda, mu);
    NetworkState init = [&] {
        const int n = lattice.units();
        if (mode == "linear") {
            const auto& b = mu.bounds()[0];
            Vec w(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                w[static_cast<std::size_t>(i)] = b.lo + (b.hi - b.lo) * (2.0 * i + 1.0) / (2.0 * n);
            return NetworkState::from_weights(lattice, 1, std::move(w));
        }
        RandomStream rng(seed);
        return init_ordered_1d(lattice, mu, rng);
    }();

    const EquilibriumReport eq = solve_equilibrium(mf, init, tol);
    write_equilibrium_csv(*rep, "equilibrium.csv", eq);
    rep->note("residual = " + num(eq.residual_inf));
    rep->note("max_real_eig_flow = " + num(eq.max_real_eig_flow));
}

void run_zador(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t seed, bool dry) {
    const StimuliDistribution mu = parse_stimuli(cfg);
    std::vector<int> ns;
    for (auto v : cfg.get_int_list("zador", "ns")) ns.push_back(static_cast<int>(v));
    const int restarts = static_cast<int>(cfg.get_int("zador", "restarts", 20));
    const auto sgd_steps = static_cast<std::uint64_t>(cfg.get_int("zador", "sgd_steps", 200000));
    for (int n : ns)
        if (n < 1) throw ConfigError("zador.ns must be positive");
    if (dry) return;
    const auto rows = zador_scan(ns, mu, restarts, seed, sgd_steps);
    Csv out(rep->dir / "zador.csv", {"n", "vn", "scaled_vn", "fdist_sq"});
    for (const auto& r : rows)
        out.write_row({num(r.n), num(r.vn), num(r.scaled),
                       r.fdist_sq ? num(*r.fdist_sq) : std::string("")});
    for (const auto& r : rows)
        rep->note("n=" + std::to_string(r.n) + " scaled V_n = " + num(r.scaled));
}

void run_integrate(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t, bool dry) {
    const StimuliDistribution mu = parse_stimuli(cfg);
    if (mu.dim() != 1) throw ConfigError("integrate experiment is one-dimensional");
    std::vector<int> ns;
    for (auto v : cfg.get_int_list("integrate", "ns")) ns.push_back(static_cast<int>(v));
    const std::string gname = cfg.get_string("integrate", "g", "x2");
    std::function<double(double)> g;
    if (gname == "x2")
        g = [](double x) { return x * x; };
    else if (gname == "x3")
        g = [](double x) { return x * x * x; };
    else if (gname == "cos")
        g = [](double x) { return std::cos(x); };
    else
        throw ConfigError("integrate.g must be x2, x3 or cos");
    if (dry) return;

    const auto& b = mu.bounds()[0];
    const double exact =
        integrate([&](double x) { return g(x) * mu.density(x); }, b.lo, b.hi, 1e-13);

    Csv out(rep->dir / "integrate.csv", {"n", "estimate", "exact", "abs_error"});
    double prev_err = -1.0;
    for (int n : ns) {
        const QuantizerReport q = optimal_quantizer_1d(n, mu);
        const double est = quantize_integrate1d(g, q);
        const double err = std::abs(est - exact);
        out.write_row({num(n), num(est), num(exact), num(err)});
        if (prev_err > 0.0 && err > 0.0)
            rep->note("error ratio " + std::to_string(n) + " vs previous = " + num(prev_err / err));
        prev_err = err;
    }
}

void run_magnification(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t,
                       bool dry) {
    const StimuliDistribution mu = parse_stimuli(cfg);
    const int n = static_cast<int>(cfg.get_int("magnification", "n", 64));
    if (n < 1) throw ConfigError("magnification.n must be positive");
    if (dry) return;
    const auto rows = magnification_experiment(mu, n);
    Csv out(rep->dir / "magnification.csv",
            {"unit", "code", "cell_mass", "code_density", "zador_density"});
    for (const auto& r : rows)
        out.write_row({num(r.unit), num(r.code), num(r.cell_mass), num(r.code_density),
                       num(r.zador_density)});
    rep->note("rows = " + std::to_string(rows.size()) + " (descriptive, no pass/fail)");
}

void run_dimsel(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t, bool dry) {
    const LatticeSpec lattice = parse_lattice(cfg);
    const NeighborhoodFunction lambda = parse_neighborhood(cfg);
    const StimuliDistribution mu = parse_stimuli(cfg);
    const double sigma = cfg.get_real("dimsel", "sigma", 0.01);
    if (sigma < 0.0) throw ConfigError("dimsel.sigma must be >= 0");
    if (dry) return;

    const MeanField mf = MeanField::make(lattice, lambda, mu);
    NetworkState base = [&] {
        if (mu.kind() == StimuliKind::UniformBox && lambda.is_step()) {
            return NetworkState::from_weights(lattice, 1,
                                              uniform_limit_linear_system(lattice.units(), lambda));
        }
        const int n = lattice.units();
        const auto& b = mu.bounds()[0];
        Vec w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            w[static_cast<std::size_t>(i)] = b.lo + (b.hi - b.lo) * (2.0 * i + 1.0) / (2.0 * n);
        return solve_equilibrium(mf, NetworkState::from_weights(lattice, 1, std::move(w))).state;
    }();

    const DimSelReport r = dimension_selection_experiment(mf, base, sigma);
    std::vector<std::string> header{"sigma", "residual", "max_real_eig_flow", "verdict"};
    for (int e = 0; e < 5; ++e) header.push_back("eig" + std::to_string(e + 1));
    Csv out(rep->dir / "dimsel.csv", header);
    std::vector<std::string> row{num(r.sigma), num(r.residual_inf), num(r.max_real_eig_flow),
                                 r.verdict == StabilityVerdict::Stable     ? "stable"
                                 : r.verdict == StabilityVerdict::Unstable ? "unstable"
                                                                           : "inconclusive"};
    for (int e = 0; e < 5; ++e)
        row.push_back(e < static_cast<int>(r.flow_eigs_real.size())
                          ? num(r.flow_eigs_real[static_cast<std::size_t>(e)])
                          : "");
    out.write_row(row);
    rep->note("verdict = " + row[3]);
}

void run_grid(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t, bool dry) {
    std::vector<int> n1s, n2s;
    for (auto v : cfg.get_int_list("grid", "n1")) n1s.push_back(static_cast<int>(v));
    for (auto v : cfg.get_int_list("grid", "n2")) n2s.push_back(static_cast<int>(v));
    const int k = static_cast<int>(cfg.get_int("grid", "k", 1));  // 1: the 8-neighbor setting
    if (k < 0) throw ConfigError("grid.k must be >= 0");
    if (dry) return;
    const NeighborhoodFunction axis_lambda = NeighborhoodFunction::step(k);

    Csv out(rep->dir / "grid.csv", {"n1", "n2", "residual", "max_real_eig_flow", "verdict"});
    for (int n1 : n1s)
        for (int n2 : n2s) {
            const Vec a0 = uniform_limit_linear_system(n1, axis_lambda);
            const Vec a1 = uniform_limit_linear_system(n2, axis_lambda);
            const NetworkState gs = grid_state(a0, a1);
            const MeanField mf = MeanField::make(
                gs.lattice, NeighborhoodFunction::step(k),
                StimuliDistribution::uniform_box({Interval{0, 1}, Interval{0, 1}}));
            const EquilibriumReport eq = analyze_state(mf, gs);
            out.write_row({num(n1), num(n2), num(eq.residual_inf), num(eq.max_real_eig_flow),
                           eq.verdict == StabilityVerdict::Stable     ? "stable"
                           : eq.verdict == StabilityVerdict::Unstable ? "unstable"
                                                                      : "inconclusive"});
        }
    rep->note("grid sweep reported; stability is asymptotic, nothing is asserted");
}

CategoricalConfig parse_categorical(ConfigFile& cfg, std::uint64_t seed,
                                    const std::string& section) {
    CategoricalConfig cc;
    if (cfg.has("lattice", "kind")) cc.lattice = parse_lattice(cfg);
    if (cfg.has("neighborhood", "kind")) cc.lambda = parse_neighborhood(cfg);
    if (cfg.has("schedule", "kind")) cc.schedule = parse_schedule(cfg);
    cc.steps = static_cast<std::uint64_t>(cfg.get_int(section, "steps", 20000));
    cc.seed = seed;
    cc.organize_eps = cfg.get_real(section, "organize_eps", 0.1);
    cc.organize_fraction = cfg.get_real(section, "organize_fraction", 0.5);
    cc.full_vector_winner = cfg.get_int(section, "full_vector_winner", 0) != 0;
    return cc;
}

void write_modality_map(Reporter& rep, const ModalityMap& map) {
    Csv out(rep.dir / "map.csv", {"label", "question", "unit_row", "unit_col"});
    for (const auto& e : map.entries) {
        const auto [r, c] = map.lattice.coords(e.unit);
        out.write_row({e.label, e.question, num(r), num(c)});
    }
    std::ofstream units(rep.dir / "units.txt");
    for (int u = 0; u < map.lattice.units(); ++u) {
        std::string line;
        for (const auto& e : map.entries)
            if (e.unit == u) line += (line.empty() ? "" : ", ") + e.label;
        if (!line.empty()) {
            const auto [r, c] = map.lattice.coords(u);
            units << "unit (" << r << "," << c << "): " << line << "\n";
        }
    }
    for (const auto& w : map.warnings) rep.note("warning: " + w);
    rep.note("modalities mapped = " + std::to_string(map.entries.size()));
}

void run_korresp(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t seed,
                 bool dry) {
    const CategoricalConfig cc = parse_categorical(cfg, seed, "korresp");
    const bool from_table = cfg.has("korresp", "table");
    const std::string path = from_table ? cfg.get_string("korresp", "table")
                                        : cfg.get_string("korresp", "responses");
    if (dry) return;
    ContingencyTable table = [&] {
        if (from_table) return ContingencyTable::from_csv(path);
        const ResponseTable rt = ResponseTable::from_csv(path);
        if (rt.n_questions() != 2)
            throw ConfigError("korresp responses must have exactly two questions");
        const int q = static_cast<int>(rt.modality_labels[1].size());
        const int p = static_cast<int>(rt.modality_labels[0].size());
        std::vector<std::int64_t> counts(static_cast<std::size_t>(p) * q, 0);
        for (const auto& row : rt.answers)
            counts[static_cast<std::size_t>(row[0]) * q + row[1]] += 1;
        return ContingencyTable::from_counts(std::move(counts), rt.modality_labels[0],
                                             rt.modality_labels[1]);
    }();
    write_modality_map(*rep, korresp_run(table, cc));
}

void run_kacm(ConfigFile& cfg, const RunOptions&, Reporter* rep, std::uint64_t seed, bool dry) {
    const CategoricalConfig cc = parse_categorical(cfg, seed, "kacm");
    const std::string path = cfg.get_string("kacm", "responses");
    if (dry) return;
    const ResponseTable rt = ResponseTable::from_csv(path);
    write_modality_map(*rep, kacm_run(build_burt(rt), cc));
}

}  // namespace

const std::vector<std::string> kExperimentKinds = {
    "ordering",  "exit",          "converge", "invariant", "meanfield", "zador",
    "integrate", "magnification", "dimsel",   "grid",      "korresp",   "kacm"};

void run_experiment(const std::string& kind, ConfigFile& cfg, const RunOptions& opt) {
    using Runner = void (*)(ConfigFile&, const RunOptions&, Reporter*, std::uint64_t, bool);
    Runner runner = nullptr;
    if (kind == "ordering") runner = run_ordering;
    else if (kind == "exit") runner = run_exit;
    else if (kind == "converge") runner = run_converge;
    else if (kind == "invariant") runner = run_invariant;
    else if (kind == "meanfield") runner = run_meanfield;
    else if (kind == "zador") runner = run_zador;
    else if (kind == "integrate") runner = run_integrate;
    else if (kind == "magnification") runner = run_magnification;
    else if (kind == "dimsel") runner = run_dimsel;
    else if (kind == "grid") runner = run_grid;
    else if (kind == "korresp") runner = run_korresp;
    else if (kind == "kacm") runner = run_kacm;
    else throw ConfigError("unknown experiment kind: " + kind);

    const std::uint64_t seed = resolve_seed(cfg, opt);

    if (opt.dry_run) {
        runner(cfg, opt, nullptr, seed, /*dry=*/true);
        cfg.require_all_consumed();
        return;
    }

    Reporter rep(opt.out_dir);
    rep.echo_config(kind, cfg, seed);
    rep.note("experiment = " + kind);
    rep.note("seed = " + std::to_string(seed));
    runner(cfg, opt, &rep, seed, /*dry=*/false);
    cfg.require_all_consumed();
    rep.finish();
}

}  // namespace somlab
