// qhe — command-line harness: parameter sweeps, the validation suite, and
// flywheel Monte Carlo runs, all emitting schema-stable CSV.
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error,
// 3 numerical abort.

#include "CLI11.hpp"

#include "qhe/closedform.hpp"
#include "qhe/common.hpp"
#include "qhe/evolve.hpp"
#include "qhe/flywheel.hpp"
#include "qhe/models.hpp"
#include "qhe/suite.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- flat key=value configuration -------------------------------------------

using Config = std::map<std::string, std::string>;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        // run shape
        "model", "out", "seed", "jobs",
        // engine parameters
        "E1", "E2", "beta1", "beta2", "p", "g", "k", "p_prime",
        // flywheel parameters
        "chi", "p0", "omega_z", "omega0", "d", "N", "trials",
        // sweep axis
        "sweep_param", "sweep_start", "sweep_stop", "sweep_count", "sweep_scale",
        // integration overrides
        "window_min", "window_max", "dt", "t_end", "transient_cut", "frame",
        "trace_tol", "leak_tol",
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void merge_config_text(Config& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key or value in '" + line + "'");
        if (!known_keys().count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": unknown config key '" + key + "'");
        cfg[key] = value;
    }
}

void merge_config_file(Config& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    merge_config_text(cfg, ss.str(), path);
}

void merge_set_overrides(Config& cfg, const std::vector<std::string>& sets) {
    for (const auto& s : sets) merge_config_text(cfg, s, "--set '" + s + "'");
}

double get_double(const Config& cfg, const std::string& key, double fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + it->second +
                          "' as a number");
    }
}

long get_long(const Config& cfg, const std::string& key, long fallback) {
    double v = get_double(cfg, key, double(fallback));
    long n = std::lround(v);
    if (double(n) != v)
        throw ConfigError("config key '" + key + "' must be an integer");
    return n;
}

std::string get_string(const Config& cfg, const std::string& key, std::string fallback) {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

// fail fast on malformed numbers no matter which command reads the key later
void check_config_types(const Config& cfg) {
    static const std::set<std::string> integers = {"N",          "trials",     "sweep_count",
                                                   "window_min", "window_max", "seed",
                                                   "jobs"};
    static const std::set<std::string> strings = {"model", "out", "sweep_param",
                                                  "sweep_scale", "frame"};
    for (const auto& [key, value] : cfg) {
        (void)value;
        if (strings.count(key)) continue;
        if (integers.count(key)) (void)get_long(cfg, key, 0);
        else (void)get_double(cfg, key, 0.0);
    }
}

// ---- presets (pure data) -----------------------------------------------------

constexpr const char* kPresetFig2 = R"(# Engine TUR sweep: beta1 E1 = 3, beta2 E2 = 1 (chi = 2), all three models.
model = 2qe-reset,2qe-local,3qe-effective
E1 = 1
E2 = 2
beta1 = 3
beta2 = 0.5
p = 1
sweep_param = g_over_p
sweep_start = 0.01
sweep_stop = 10
sweep_count = 40
sweep_scale = log
)";

constexpr const char* kPresetFig5 = R"(# Flywheel TUR ratios against the classical bounds at p0 = 0.6.
model = flywheel
p0 = 0.6
sweep_param = chi
sweep_start = 0.1
sweep_stop = 10
sweep_count = 100
sweep_scale = linear
)";

void merge_preset(Config& cfg, const std::string& name) {
    if (name == "fig2") merge_config_text(cfg, kPresetFig2, "preset fig2");
    else if (name == "fig5") merge_config_text(cfg, kPresetFig5, "preset fig5");
    else throw ConfigError("unknown preset '" + name + "' (expected fig2 or fig5)");
}

// ---- CSV helpers -------------------------------------------------------------

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw ConfigError("short write to '" + path + "'");
}

// run every index in [0, n) on `jobs` threads; fn must be exception-free
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const int nthreads = std::max(1, std::min<int>(jobs, int(n)));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

// ---- sweep -------------------------------------------------------------------

qhe::models::EngineParams engine_from_config(const Config& cfg) {
    qhe::models::EngineParams pr;
    pr.E1 = get_double(cfg, "E1", pr.E1);
    pr.E2 = get_double(cfg, "E2", pr.E2);
    pr.beta1 = get_double(cfg, "beta1", pr.beta1);
    pr.beta2 = get_double(cfg, "beta2", pr.beta2);
    pr.p = get_double(cfg, "p", pr.p);
    pr.g = get_double(cfg, "g", pr.g);
    pr.k = get_double(cfg, "k", pr.k);
    pr.p_prime = get_double(cfg, "p_prime", pr.p_prime);
    return pr;
}

void apply_engine_param(qhe::models::EngineParams& pr, const std::string& name, double v) {
    if (name == "g_over_p") pr.g = v * pr.p;
    else if (name == "g") pr.g = v;
    else if (name == "p") pr.p = v;
    else if (name == "k") pr.k = v;
    else if (name == "p_prime") pr.p_prime = v;
    else if (name == "E1") pr.E1 = v;
    else if (name == "E2") pr.E2 = v;
    else if (name == "beta1") pr.beta1 = v;
    else if (name == "beta2") pr.beta2 = v;
    else
        throw ConfigError("sweep_param '" + name + "' is not an engine parameter");
}

struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

SweepAxis sweep_axis_from_config(const Config& cfg) {
    SweepAxis ax;
    ax.param = get_string(cfg, "sweep_param", "");
    if (ax.param.empty()) throw ConfigError("sweep requires sweep_param");
    const double start = get_double(cfg, "sweep_start", NAN);
    if (std::isnan(start)) throw ConfigError("sweep requires sweep_start");
    const double stop = get_double(cfg, "sweep_stop", start);
    const long count = get_long(cfg, "sweep_count", 1);
    if (count < 1) throw ConfigError("sweep_count must be >= 1");
    const std::string scale = get_string(cfg, "sweep_scale", "log");
    try {
        if (count == 1) ax.values = {start};
        else if (scale == "log") ax.values = qhe::logspace(start, stop, int(count));
        else if (scale == "linear") ax.values = qhe::linspace(start, stop, int(count));
        else throw ConfigError("sweep_scale must be linear or log");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad sweep axis: ") + e.what());
    }
    return ax;
}

qhe::evolve::IntegrationConfig integration_from_config(const Config& cfg) {
    qhe::evolve::IntegrationConfig ic;
    ic.dt = get_double(cfg, "dt", 0.0);
    ic.t_end = get_double(cfg, "t_end", 0.0);
    ic.transient_cut = get_double(cfg, "transient_cut", ic.transient_cut);
    ic.trace_tol = get_double(cfg, "trace_tol", ic.trace_tol);
    ic.leak_tol = get_double(cfg, "leak_tol", ic.leak_tol);
    const std::string frame = get_string(cfg, "frame", "rotating");
    if (frame == "rotating") ic.frame = qhe::evolve::Frame::Rotating;
    else if (frame == "lab") ic.frame = qhe::evolve::Frame::Lab;
    else throw ConfigError("frame must be rotating or lab");
    return ic;
}

struct SweepRow {
    bool ok = false;
    bool aborted = false;
    double wall_s = 0.0;
    std::string status = "ok";
    qhe::evolve::NessReport sim;
    qhe::closedform::AnalyticReport oracle;
};

const char* kEngineSweepHeader =
    "model,sweep_param,sweep_value,"
    "sim_W_dot,sim_DeltaW_dot,sim_Sigma_dot,sim_tur_ratio,sim_eta,"
    "ana_W_dot,ana_DeltaW_dot,ana_Sigma_dot,ana_tur_ratio,ana_eta,"
    "rel_dev_W_dot,rel_dev_DeltaW_dot,rel_dev_Sigma_dot,rel_dev_tur_ratio,rel_dev_eta,"
    "fit_r2,wall_s,status";

std::string engine_sweep_csv(qhe::models::ModelKind kind, const SweepAxis& ax,
                             const std::vector<SweepRow>& rows) {
    using qhe::fmt12;
    std::string csv = std::string(kEngineSweepHeader) + "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        csv += qhe::models::model_name(kind);
        csv += "," + ax.param + "," + fmt12(ax.values[i]);
        const double sim[5] = {r.sim.W_dot, r.sim.DeltaW_dot, r.sim.Sigma_dot,
                               r.sim.tur_ratio, r.sim.eta};
        const double ana[5] = {r.oracle.W_dot, r.oracle.DeltaW_dot, r.oracle.Sigma_dot,
                               r.oracle.tur_ratio, r.oracle.eta};
        for (double v : sim) csv += "," + fmt12(r.ok ? v : NAN);
        for (double v : ana) csv += "," + fmt12(v);
        for (int j = 0; j < 5; ++j)
            csv += "," + fmt12(r.ok ? qhe::rel_dev(sim[j], ana[j]) : NAN);
        csv += "," + fmt12(r.ok ? r.sim.fit_r2 : NAN);
        csv += "," + fmt12(r.wall_s);
        csv += "," + csv_quote(r.status) + "\n";
    }
    return csv;
}

// insert a tag before the extension: fig2.csv + 2qe-reset -> fig2_2qe-reset.csv
std::string tagged_path(const std::string& path, const std::string& tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + "_" + tag;
    return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

int cmd_sweep(const Config& cfg, const std::string& out, int jobs) {
    const SweepAxis ax = sweep_axis_from_config(cfg);
    const std::string model_value = get_string(cfg, "model", "");
    if (model_value.empty())
        throw ConfigError("sweep requires model (engine model list or flywheel)");

    // -- flywheel sweep: analytic TUR ratios against the classical bounds -----
    if (model_value == "flywheel") {
        if (ax.param != "chi")
            throw ConfigError("flywheel sweeps support sweep_param = chi only");
        const double p0 = get_double(cfg, "p0", 0.6);
        const double omega_z = get_double(cfg, "omega_z", 20.0);
        const double omega0 = get_double(cfg, "omega0", 1.0);
        const double d = get_double(cfg, "d", 0.1);
        const long n_cycles = get_long(cfg, "N", 1000);
        std::string csv =
            "sweep_param,sweep_value,p_zero,p_plus,p_minus,q,"
            "tur_coherent,tur_fock,tur_ct,status\n";
        bool any_fail = false;
        for (double chi : ax.values) {
            using qhe::fmt12;
            csv += ax.param + "," + fmt12(chi);
            try {
                auto pr = qhe::flywheel::params_from_bias(chi, p0, omega_z, omega0, d,
                                                          n_cycles);
                auto dist = qhe::flywheel::step_distribution(pr);
                csv += "," + fmt12(dist.p_zero) + "," + fmt12(dist.p_plus) + "," +
                       fmt12(dist.p_minus) + "," + fmt12(dist.p_plus - dist.p_minus);
                csv += "," + fmt12(qhe::flywheel::tur_ratio_flywheel(pr));
                csv += "," + fmt12(qhe::flywheel::tur_ratio_fock(pr));
                csv += "," + fmt12(qhe::flywheel::tur_ratio_ct(chi));
                csv += ",ok\n";
            } catch (const std::exception& e) {
                any_fail = true;
                for (int j = 0; j < 7; ++j) csv += ",nan";
                csv += "," + csv_quote(std::string("FAILED: ") + e.what()) + "\n";
            }
        }
        write_file(out, csv);
        std::cout << "wrote " << out << " (" << ax.values.size() << " points)\n";
        if (any_fail) std::cerr << "sweep: some points failed; see status column\n";
        return any_fail ? kExitValidation : kExitOk;
    }

    // -- engine sweep: simulation vs closed-form oracle per model -------------
    std::vector<qhe::models::ModelKind> kinds;
    {
        std::istringstream in(model_value);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                kinds.push_back(qhe::models::model_from_name(tok));
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (kinds.empty()) throw ConfigError("model list is empty");

    const qhe::models::EngineParams base = engine_from_config(cfg);
    const qhe::evolve::IntegrationConfig ic = integration_from_config(cfg);
    // window keys pin the load band; otherwise size it per point so the work
    // walk stays clear of the band edges over the run's horizon
    const bool auto_window = !cfg.count("window_min") && !cfg.count("window_max");
    const int wmin = int(get_long(cfg, "window_min", -40));
    const int wmax = int(get_long(cfg, "window_max", 40));

    bool any_reject = false, any_abort = false;
    std::string first_problem;

    for (qhe::models::ModelKind kind : kinds) {
        std::vector<SweepRow> rows(ax.values.size());
        parallel_for(ax.values.size(), jobs, [&](std::size_t i) {
            SweepRow& row = rows[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                qhe::models::EngineParams pr = base;
                apply_engine_param(pr, ax.param, ax.values[i]);
                row.oracle = qhe::closedform::ness_for(kind, pr);
                int lo = wmin, hi = wmax;
                if (auto_window) {
                    const auto probe = qhe::models::build_model(kind, pr, -10, 10);
                    const double gamma_t =
                        ic.t_end > 0.0 ? probe.char_rate * ic.t_end : 20.0;
                    const int w = qhe::models::suggested_load_window(gamma_t);
                    lo = -w;
                    hi = w;
                }
                auto bundle = qhe::models::build_model(kind, pr, lo, hi);
                row.sim = qhe::evolve::simulate_ness(bundle, ic);
                row.ok = row.sim.accepted;
                if (!row.ok) row.status = "FAILED: " + row.sim.message;
            } catch (const qhe::evolve::NumericalAbort& e) {
                row.aborted = true;
                row.status = std::string("ABORTED: ") + e.what();
            } catch (const std::exception& e) {
                row.status = std::string("FAILED: ") + e.what();
            }
            row.wall_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
        });

        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].ok) continue;
            if (rows[i].aborted) any_abort = true;
            else any_reject = true;
            if (first_problem.empty())
                first_problem = std::string(qhe::models::model_name(kind)) + " at " +
                                ax.param + "=" + qhe::fmt12(ax.values[i]) + ": " +
                                rows[i].status;
        }

        const std::string path =
            kinds.size() == 1 ? out : tagged_path(out, qhe::models::model_name(kind));
        write_file(path, engine_sweep_csv(kind, ax, rows));
        std::cout << "wrote " << path << " (" << rows.size() << " points)\n";
    }

    if (any_abort || any_reject) {
        std::cerr << "sweep: " << first_problem << "\n";
        return any_abort ? kExitAbort : kExitValidation;
    }
    return kExitOk;
}

// ---- validate ----------------------------------------------------------------

int cmd_validate(const Config& cfg, const std::string& out, const std::string& level,
                 std::uint64_t seed, int jobs) {
    if (level != "quick" && level != "full")
        throw ConfigError("--level must be quick or full");

    using qhe::fmt12;
    std::string csv = "id,name,status,seconds,detail\n";
    bool all_ok = true;

    // invariant zero: the configured parameter set must construct
    {
        const std::string model_value = get_string(cfg, "model", "2qe-reset");
        try {
            qhe::models::EngineParams pr = engine_from_config(cfg);
            const auto kind = model_value == "flywheel"
                                  ? qhe::models::ModelKind::Reset2QE
                                  : qhe::models::model_from_name(model_value);
            pr.validate(kind);
            for (const auto& w : pr.warnings(kind)) std::cout << "note: " << w << "\n";
        } catch (const std::exception& e) {
            std::cout << "[FAIL] 0 parameter-validation — " << e.what() << "\n";
            csv += "0,parameter-validation,fail,0," + csv_quote(e.what()) + "\n";
            write_file(out, csv);
            return kExitValidation;
        }
    }

    qhe::suite::SuiteOptions opt;
    opt.quick = level == "quick";
    opt.seed = seed;
    opt.jobs = jobs;

    std::string first_fail;
    for (int id : qhe::suite::criterion_ids()) {
        qhe::suite::CriterionResult r;
        try {
            r = qhe::suite::run_criterion(id, opt);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = qhe::suite::criterion_title(id);
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
        std::printf("[%s] %d %s (%.1f s) — %s\n", tag, r.id, r.name.c_str(), r.seconds,
                    r.detail.c_str());
        for (const auto& c : r.checks)
            std::printf("       %s %s: %s\n", c.passed ? "[ok]  " : "[FAIL]",
                        c.name.c_str(), c.detail.c_str());
        std::fflush(stdout);
        if (!r.passed) {
            all_ok = false;
            if (first_fail.empty()) first_fail = std::to_string(r.id) + " " + r.name;
        }
        csv += std::to_string(r.id) + "," + r.name + "," +
               (r.skipped ? "skip" : (r.passed ? "pass" : "fail")) + "," +
               fmt12(r.seconds) + "," + csv_quote(r.detail) + "\n";
    }

    write_file(out, csv);
    std::cout << "wrote " << out << "\n";
    if (!all_ok) {
        std::cerr << "validate: first failing criterion: " << first_fail << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

// ---- flywheel-mc ---------------------------------------------------------------

int cmd_flywheel_mc(const Config& cfg, const std::string& out, std::uint64_t seed,
                    int jobs) {
    qhe::flywheel::FlywheelParams pr;
    try {
        pr = qhe::flywheel::params_from_bias(
            get_double(cfg, "chi", 2.0), get_double(cfg, "p0", 0.6),
            get_double(cfg, "omega_z", 20.0), get_double(cfg, "omega0", 1.0),
            get_double(cfg, "d", 0.1), get_long(cfg, "N", 1000));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("flywheel parameters: ") + e.what());
    }
    qhe::flywheel::McConfig mcfg;
    mcfg.trials = get_long(cfg, "trials", 100000);
    mcfg.seed = seed;
    mcfg.jobs = jobs;
    if (mcfg.trials <= 0) throw ConfigError("trials must be positive");

    const auto mc = qhe::flywheel::monte_carlo_walk(pr, mcfg);

    using qhe::fmt12;
    std::string csv = "N,trials,seed";
    const struct {
        const char* name;
        const qhe::flywheel::McMoment& m;
    } cols[] = {{"mean_alpha", mc.mean_alpha},
                {"var_alpha", mc.var_alpha},
                {"mean_n", mc.mean_n},
                {"e_alpha4", mc.e_alpha4},
                {"mean_n2", mc.mean_n2}};
    for (const auto& c : cols) {
        csv += std::string(",") + c.name + "," + c.name + "_se," + c.name + "_ana," +
               c.name + "_z";
    }
    csv += ",max_abs_z\n";
    csv += std::to_string(mc.cycles) + "," + std::to_string(mc.trials) + "," +
           std::to_string(mc.seed);
    for (const auto& c : cols)
        csv += "," + fmt12(c.m.value) + "," + fmt12(c.m.se) + "," + fmt12(c.m.analytic) +
               "," + fmt12(c.m.z);
    csv += "," + fmt12(mc.max_abs_z) + "\n";

    write_file(out, csv);
    std::cout << "wrote " << out << " (trials=" << mc.trials << ", N=" << mc.cycles
              << ", max |z| = " << fmt12(mc.max_abs_z) << ")\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum heat engine simulator with analytic oracles"};
    app.require_subcommand(1);

    std::string config_path, preset, out, level = "full";
    std::vector<std::string> sets;
    std::uint64_t seed = 1;
    int jobs = int(std::max(1u, std::thread::hardware_concurrency()));

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file");
        sub->add_option("--set", sets, "override: key=value (repeatable)");
        sub->add_option("--preset", preset, "named parameter set: fig2 or fig5");
        sub->add_option("--out", out, "output CSV path");
        sub->add_option("--seed", seed, "Monte Carlo seed");
        sub->add_option("--jobs", jobs, "worker threads (default: available cores)");
        sub->add_option("--level", level, "validation level: quick or full");
    };

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep vs closed forms -> CSV");
    CLI::App* validate = app.add_subcommand("validate", "run the validation suite");
    CLI::App* flymc =
        app.add_subcommand("flywheel-mc", "flywheel Monte Carlo moments -> CSV");
    add_common(sweep);
    add_common(validate);
    add_common(flymc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        Config cfg;
        if (!preset.empty()) merge_preset(cfg, preset);
        if (!config_path.empty()) merge_config_file(cfg, config_path);
        merge_set_overrides(cfg, sets);
        check_config_types(cfg);
        // flag values win over config-file values for their keys
        if (cfg.count("seed") && !sweep->count("--seed") && !validate->count("--seed") &&
            !flymc->count("--seed"))
            seed = std::uint64_t(get_long(cfg, "seed", 1));
        if (cfg.count("jobs") && !sweep->count("--jobs") && !validate->count("--jobs") &&
            !flymc->count("--jobs"))
            jobs = int(get_long(cfg, "jobs", jobs));
        if (out.empty()) out = get_string(cfg, "out", "");
        if (jobs < 1) throw ConfigError("--jobs must be >= 1");

        if (sweep->parsed()) {
            if (out.empty()) out = "sweep.csv";
            return cmd_sweep(cfg, out, jobs);
        }
        if (validate->parsed()) {
            if (out.empty()) out = "validate_summary.csv";
            return cmd_validate(cfg, out, level, seed, jobs);
        }
        if (out.empty()) out = "flywheel_mc.csv";
        return cmd_flywheel_mc(cfg, out, seed, jobs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qhe::evolve::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
