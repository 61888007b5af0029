#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

const std::string& cli_bin() {
    static const std::string bin = [] {
#ifdef QHE_CLI_BIN
        return std::string(QHE_CLI_BIN);
#else
        const char* env = std::getenv("QHE_CLI_BIN");
        REQUIRE_MESSAGE(env != nullptr, "QHE_CLI_BIN must point at the qhe binary");
        return std::string(env);
#endif
    }();
    return bin;
}

const std::string& work_dir() {
    static const std::string dir = [] {
        char tmpl[] = "/tmp/qhe_cli_test_XXXXXX";
        char* p = mkdtemp(tmpl);
        REQUIRE_MESSAGE(p != nullptr, "mkdtemp failed");
        return std::string(p);
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
    REQUIRE(bool(out));
}

RunResult run(const std::string& args) {
    static int serial = 0;
    const std::string base = work_dir() + "/run" + std::to_string(serial++);
    const std::string cmd =
        "'" + cli_bin() + "' " + args + " > " + base + ".out 2> " + base + ".err";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(base + ".out");
    r.err = slurp(base + ".err");
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string f;
    while (std::getline(in, f, ',')) fields.push_back(f);
    return fields;
}

const char* kEngineHeader =
    "model,sweep_param,sweep_value,"
    "sim_W_dot,sim_DeltaW_dot,sim_Sigma_dot,sim_tur_ratio,sim_eta,"
    "ana_W_dot,ana_DeltaW_dot,ana_Sigma_dot,ana_tur_ratio,ana_eta,"
    "rel_dev_W_dot,rel_dev_DeltaW_dot,rel_dev_Sigma_dot,rel_dev_tur_ratio,rel_dev_eta,"
    "fit_r2,wall_s,status";

} // namespace

TEST_CASE("help prints and bad invocations exit with the config code") {
    auto help = run("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("sweep") != std::string::npos);
    CHECK(help.out.find("validate") != std::string::npos);
    CHECK(help.out.find("flywheel-mc") != std::string::npos);

    CHECK(run("sweep --bogus-flag").code == 2);
    CHECK(run("sweep --preset nosuch --out " + work_dir() + "/x.csv").code == 2);
    CHECK(run("sweep --out " + work_dir() + "/x.csv").code == 2); // no axis configured
    CHECK(run("nonsense-subcommand").code == 2);
}

TEST_CASE("config files: comments, whitespace, and strict key checking") {
    const std::string dir = work_dir();

    spit(dir + "/bad_key.cfg", "model = 2qe-reset\nbogus_key = 3\n");
    auto bad_key = run("sweep --config " + dir + "/bad_key.cfg --out " + dir + "/o.csv");
    CHECK(bad_key.code == 2);
    CHECK(bad_key.err.find("bogus_key") != std::string::npos);
    CHECK(bad_key.err.find(":2") != std::string::npos); // names the offending line

    spit(dir + "/bad_num.cfg", "p = not-a-number\n");
    auto bad_num = run("sweep --config " + dir + "/bad_num.cfg --out " + dir + "/o.csv");
    CHECK(bad_num.code == 2);
    CHECK(bad_num.err.find("cannot parse") != std::string::npos);

    spit(dir + "/no_eq.cfg", "just some words\n");
    CHECK(run("sweep --config " + dir + "/no_eq.cfg --out " + dir + "/o.csv").code == 2);

    CHECK(run("sweep --config " + dir + "/does_not_exist.cfg --out " + dir + "/o.csv")
              .code == 2);

    // comments and blank lines are fine; --set uses the same parser
    CHECK(run("validate --set \"p==\" --out " + dir + "/v.csv").code == 2);
}

TEST_CASE("validate rejects an unbuildable parameter set with exit 1") {
    const std::string out = work_dir() + "/invalid_param.csv";
    auto r = run("validate --set p=-1 --level quick --out " + out);
    CHECK(r.code == 1);
    CHECK(r.out.find("[FAIL] 0 parameter-validation") != std::string::npos);
    auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "id,name,status,seconds,detail");
    CHECK(lines[1].find("0,parameter-validation,fail") == 0);
}

TEST_CASE("single-point engine sweep emits the full schema") {
    const std::string dir = work_dir();
    spit(dir + "/point.cfg",
         "# one reset-model point at g = p\n"
         "model = 2qe-reset\n"
         "sweep_param = g_over_p\n"
         "sweep_start = 1\n"
         "sweep_count = 1\n");
    const std::string out = dir + "/point.csv";
    auto r = run("sweep --config " + dir + "/point.cfg --out " + out);
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote " + out) != std::string::npos);

    auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == kEngineHeader);
    auto f = fields_of(lines[1]);
    REQUIRE(f.size() == 21);
    CHECK(f[0] == "2qe-reset");
    CHECK(f[1] == "g_over_p");
    CHECK(std::stod(f[2]) == 1.0);
    CHECK(f[20] == "ok");
    // simulation within the oracle-agreement tolerance at the reference point
    CHECK(std::stod(f[13]) < 5e-3);                      // rel_dev_W_dot
    CHECK(std::stod(f[16]) < 5e-3);                      // rel_dev_tur_ratio
    CHECK(std::stod(f[11]) == doctest::Approx(2.33071650674).epsilon(1e-9)); // ana tur
    CHECK(std::stod(f[18]) >= 0.999);                    // fit_r2
    CHECK(std::stod(f[19]) > 0.0);                       // wall_s
}

TEST_CASE("flywheel preset: full run, determinism, and override precedence") {
    const std::string dir = work_dir();

    const std::string full1 = dir + "/fly_full_a.csv";
    const std::string full2 = dir + "/fly_full_b.csv";
    CHECK(run("sweep --preset fig5 --out " + full1).code == 0);
    CHECK(run("sweep --preset fig5 --out " + full2).code == 0);
    const std::string a = slurp(full1), b = slurp(full2);
    CHECK(a == b); // byte-identical reruns
    auto lines = lines_of(a);
    REQUIRE(lines.size() == 101); // header + 100 points
    CHECK(lines[0] ==
          "sweep_param,sweep_value,p_zero,p_plus,p_minus,q,"
          "tur_coherent,tur_fock,tur_ct,status");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = fields_of(lines[i]);
        REQUIRE(f.size() == 10);
        CHECK(f[9] == "ok");
        // exact factor-three relation survives the 12-digit round trip
        CHECK(std::stod(f[6]) == doctest::Approx(3.0 * std::stod(f[7])).epsilon(1e-10));
        CHECK(std::stod(f[7]) <= std::stod(f[8]) * (1.0 + 1e-12));
    }

    // --set wins over the preset
    const std::string small = dir + "/fly_small.csv";
    CHECK(run("sweep --preset fig5 --set sweep_count=7 --out " + small).code == 0);
    CHECK(lines_of(slurp(small)).size() == 8);

    // a point with no positive-temperature split is a row failure, exit 1
    spit(dir + "/fly_bad.cfg",
         "model = flywheel\np0 = 0.3\nsweep_param = chi\nsweep_start = 0\n"
         "sweep_count = 1\n");
    auto bad = run("sweep --config " + dir + "/fly_bad.cfg --out " + dir + "/fly_bad.csv");
    CHECK(bad.code == 1);
    auto bad_lines = lines_of(slurp(dir + "/fly_bad.csv"));
    REQUIRE(bad_lines.size() == 2);
    CHECK(bad_lines[1].find("FAILED") != std::string::npos);
}

TEST_CASE("multi-model sweeps write one tagged file per model") {
    const std::string dir = work_dir();
    const std::string out = dir + "/engines.csv";
    auto r = run("sweep --preset fig2 --set sweep_count=1 --set sweep_start=1 --out " +
                 out);
    CHECK(r.code == 0);
    for (const std::string tag : {"2qe-reset", "2qe-local", "3qe-effective"}) {
        const std::string path = dir + "/engines_" + tag + ".csv";
        CAPTURE(path);
        auto lines = lines_of(slurp(path));
        REQUIRE(lines.size() == 2);
        CHECK(lines[0] == kEngineHeader);
        auto f = fields_of(lines[1]);
        REQUIRE(f.size() == 21);
        CHECK(f[0] == tag);
        CHECK(f[20] == "ok");
        CHECK(std::stod(f[16]) < 5e-3); // rel_dev_tur_ratio
    }
}

TEST_CASE("numerical aborts surface as exit 3 with an ABORTED row") {
    const std::string dir = work_dir();
    spit(dir + "/leaky.cfg",
         "model = 2qe-reset\nsweep_param = g_over_p\nsweep_start = 1\n"
         "sweep_count = 1\nwindow_min = -5\nwindow_max = 5\n");
    const std::string out = dir + "/leaky.csv";
    auto r = run("sweep --config " + dir + "/leaky.cfg --out " + out);
    CHECK(r.code == 3);
    CHECK(r.err.find("ABORTED") != std::string::npos);
    auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 2);
    CHECK(lines[1].find("ABORTED") != std::string::npos);
    CHECK(lines[1].find("nan") != std::string::npos); // sim columns are hollow
}

TEST_CASE("flywheel monte carlo: schema, seeding, and job independence") {
    const std::string dir = work_dir();
    const std::string common = "flywheel-mc --set trials=10 --set N=20 --seed 5 --out ";

    auto r1 = run(common + dir + "/mc1.csv");
    CHECK(r1.code == 0);
    auto r2 = run(common + dir + "/mc2.csv");
    CHECK(r2.code == 0);
    auto r3 = run(common + dir + "/mc3.csv --jobs 3");
    CHECK(r3.code == 0);
    const std::string c1 = slurp(dir + "/mc1.csv");
    CHECK(c1 == slurp(dir + "/mc2.csv"));
    CHECK(c1 == slurp(dir + "/mc3.csv"));

    auto lines = lines_of(c1);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].find("N,trials,seed,mean_alpha,mean_alpha_se,mean_alpha_ana,"
                        "mean_alpha_z") == 0);
    CHECK(lines[0].find(",max_abs_z") != std::string::npos);
    CHECK(lines[1].find("20,10,5,") == 0);

    // seed through the config channel, flag absent
    auto r4 = run("flywheel-mc --set trials=10 --set N=20 --set seed=5 --out " + dir +
                  "/mc4.csv");
    CHECK(r4.code == 0);
    CHECK(c1 == slurp(dir + "/mc4.csv"));

    // a different seed changes the draw
    auto r5 = run("flywheel-mc --set trials=10 --set N=20 --seed 6 --out " + dir +
                  "/mc5.csv");
    CHECK(r5.code == 0);
    CHECK(c1 != slurp(dir + "/mc5.csv"));

    CHECK(run("flywheel-mc --set trials=0 --out " + dir + "/mc6.csv").code == 2);
}
