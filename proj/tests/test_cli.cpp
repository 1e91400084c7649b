#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "warmstart/config.hpp"
#include "warmstart/csv.hpp"
#include "warmstart/experiments.hpp"

using namespace warmstart;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("warmstart_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string &s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int run(const std::string &name, const std::string &cfg_text, const fs::path &out, std::string *log_out = nullptr) {
    RunOptions o;
    o.outdir = out.string();
    std::ostringstream log;
    const int rc = run_subcommand(name, Config::parse(cfg_text, "test.cfg"), o, log);
    if (log_out) *log_out = log.str();
    return rc;
}

const char *kSmallSweep = R"(
[run]
seed = 5
[system]
qubits = 2, 3
[ansatz]
layers = 1
[sampling]
samples = 200
directions = 20
r_points = 8
)";

} // namespace

TEST(Config, ParsesSectionsAndTypes) {
    const auto c = Config::parse("top = 1\n[a]\n x = 2.5 \n; note\n# note\nname = hea\nangle = -pi\n"
                                 "list = 1, 2 3\nflag = true\nbig = 18446744073709551615\n");
    EXPECT_EQ(c.get_int("", "top", 0), 1);
    EXPECT_DOUBLE_EQ(c.get_double("a", "x", 0.0), 2.5);
    EXPECT_EQ(c.get_string("a", "name", ""), "hea");
    EXPECT_DOUBLE_EQ(c.get_double("a", "angle", 0.0), -3.141592653589793);
    EXPECT_EQ(c.get_ints("a", "list", {}), (std::vector<int>{1, 2, 3}));
    EXPECT_TRUE(c.get_bool("a", "flag", false));
    EXPECT_EQ(c.get_u64("a", "big", 0), 18446744073709551615ull);
    EXPECT_EQ(c.get_int("a", "missing", 7), 7);
    EXPECT_NO_THROW(c.check_unused());
}

TEST(Config, DiagnosticsNameLineSectionAndKey) {
    try {
        Config::parse("[a]\nx = 1\nnot a pair\n", "exp.cfg");
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("exp.cfg:3"), std::string::npos);
    }
    try {
        Config::parse("[a]\nx = 1\n\nx = 2\n", "exp.cfg");
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("exp.cfg:4"), std::string::npos);
    }
    const auto c = Config::parse("[sampling]\nsamples = many\nr = inf\n", "exp.cfg");
    try {
        c.get_int("sampling", "samples", 1);
        FAIL();
    } catch (const ValidationError &e) {
        const std::string w = e.what();
        EXPECT_NE(w.find("exp.cfg:2"), std::string::npos);
        EXPECT_NE(w.find("[sampling] samples"), std::string::npos);
    }
    EXPECT_THROW(c.get_double("sampling", "r", 0.0), ValidationError);
    EXPECT_THROW(Config::parse("[broken\n"), ValidationError);
}

TEST(Config, UnknownKeysRejected) {
    const auto c = Config::parse("[a]\nx = 1\ntypo = 2\n", "exp.cfg");
    c.get_int("a", "x", 0);
    try {
        c.check_unused();
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("typo"), std::string::npos);
    }
}

TEST(Config, LoadMissingFile) { EXPECT_THROW(Config::load("/nonexistent/x.cfg"), ValidationError); }

TEST(Csv, NumbersAndShape) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(-2.0), "-2");
    EXPECT_THROW(format_number(std::nan("")), NumericError);
    CsvTable t({"a", "b"});
    t.add_numbers({1.0, 0.25});
    EXPECT_THROW(t.add_numbers({1.0}), ValidationError);
    std::ostringstream os;
    t.write(os, "seed=1");
    EXPECT_EQ(os.str(), "# seed=1\na,b\n1,0.25\n");
}

TEST(Cli, UnknownSubcommand) {
    EXPECT_EQ(run("no-such-thing", "", scratch("unknown")), kExitValidation);
}

TEST(Cli, BoundsWritesCsvAndJson) {
    const auto dir = scratch("bounds");
    std::string log;
    ASSERT_EQ(run("bounds", "[bounds]\nwhich = thm5, convexity\nr = 0.1\nr0 = 0.5\nm = 8\ndt = 0\n", dir, &log),
              kExitOk);
    EXPECT_NE(log.find("variance_lower_bound"), std::string::npos);
    const auto csv = lines(slurp(dir / "bounds.csv"));
    ASSERT_GE(csv.size(), 3u);
    EXPECT_EQ(csv[0].rfind("# seed=", 0), 0u);
    EXPECT_EQ(csv[1], "bound,value,valid,condition,satisfied,margin");
    const auto j = nlohmann::json::parse(slurp(dir / "bounds.json"));
    EXPECT_FALSE(j.empty());
    const auto meta = nlohmann::json::parse(slurp(dir / "bounds.meta.json"));
    EXPECT_EQ(meta["subcommand"], "bounds");
    EXPECT_EQ(meta["seed"], 1);
    EXPECT_TRUE(meta.contains("duration_seconds"));
    EXPECT_EQ(meta["config"]["bounds"]["r"], "0.1");
}

TEST(Cli, VarianceSweepSchemaAndDeterminism) {
    const auto a = scratch("sweep_a"), b = scratch("sweep_b");
    ASSERT_EQ(run("variance-sweep", kSmallSweep, a), kExitOk);
    ASSERT_EQ(run("variance-sweep", kSmallSweep, b), kExitOk);
    for (const char *f : {"variance-sweep.csv", "variance-sweep_peaks.csv"}) {
        auto la = lines(slurp(a / f)), lb = lines(slurp(b / f));
        ASSERT_GT(la.size(), 2u);
        EXPECT_EQ(la[0].rfind("# seed=5, git=", 0), 0u);
        la.erase(la.begin());
        lb.erase(lb.begin());
        EXPECT_EQ(la, lb) << f;
    }
    const auto body = lines(slurp(a / "variance-sweep.csv"));
    EXPECT_EQ(body[1], "n,M,r,mean_loss,variance,var_stderr");
    EXPECT_EQ(body.size(), 2u + 2 * 8);
    for (const auto &l : body) {
        EXPECT_EQ(l.find("nan"), std::string::npos);
        EXPECT_EQ(l.find("inf"), std::string::npos);
    }
}

TEST(Cli, SeedOverrideChangesOutput) {
    const auto a = scratch("seed_a"), b = scratch("seed_b");
    RunOptions o;
    o.outdir = b.string();
    o.seed = 99;
    std::ostringstream log;
    ASSERT_EQ(run("variance-sweep", kSmallSweep, a), kExitOk);
    ASSERT_EQ(run_subcommand("variance-sweep", Config::parse(kSmallSweep), o, log), kExitOk);
    auto la = lines(slurp(a / "variance-sweep.csv")), lb = lines(slurp(b / "variance-sweep.csv"));
    EXPECT_EQ(lb[0].rfind("# seed=99", 0), 0u);
    la.erase(la.begin());
    lb.erase(lb.begin());
    EXPECT_NE(la, lb);
}

TEST(Cli, ValidationErrorsExitTwo) {
    const auto dir = scratch("invalid");
    std::string log;
    EXPECT_EQ(run("variance-sweep", "[system]\nqubits = 0\n", dir, &log), kExitValidation);
    EXPECT_EQ(run("variance-sweep", "[sampling]\nsampels = 10\n", dir, &log), kExitValidation);
    EXPECT_NE(log.find("sampels"), std::string::npos);
    EXPECT_EQ(run("bounds", "[bounds]\nr0 = 1.5\n", dir, &log), kExitValidation);
    EXPECT_EQ(run("compress", "[ansatz]\nfamily = file\nfile = /nonexistent.circ\n", dir, &log), kExitValidation);
    EXPECT_FALSE(fs::exists(dir / "bounds.csv"));
}

TEST(Cli, NumericFailureExitsThree) {
    const auto dir = scratch("numeric");
    std::string log;
    const char *cfg = R"(
[system]
qubits = 2
[compress]
t_total = 0.5
dt_init = 0.1
dt_min = 0.02
loss_threshold = 1e-30
)";
    EXPECT_EQ(run("compress", cfg, dir, &log), kExitNumeric);
}

TEST(Cli, SelftestPasses) {
    const auto dir = scratch("selftest");
    ASSERT_EQ(run("selftest", "", dir), kExitOk);
    const auto body = lines(slurp(dir / "selftest.csv"));
    EXPECT_GT(body.size(), 5u);
    for (const auto &c : run_selftest()) EXPECT_TRUE(c.passed) << c.name << " " << c.detail;
}

TEST(Cli, SubcommandList) {
    const std::vector<std::string> want = {"variance-sweep", "variance-vs-dt", "bounds", "adiabatic-track",
                                           "minima-cut",     "landscape-2d",   "grad-path", "compress",
                                           "ite-suite",      "unitary-suite",  "selftest"};
    auto have = subcommand_names();
    auto sorted_want = want;
    std::sort(have.begin(), have.end());
    std::sort(sorted_want.begin(), sorted_want.end());
    EXPECT_EQ(have, sorted_want);
}

#ifdef WARMSTART_BIN
TEST(Cli, ExecutableExitCodes) {
    auto code = [](const std::string &args) {
        const int st = std::system((std::string(WARMSTART_BIN) + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    };
    const auto dir = scratch("exe");
    EXPECT_EQ(code("--help"), 0);
    EXPECT_EQ(code(""), 2);
    EXPECT_EQ(code("frobnicate"), 2);
    EXPECT_EQ(code("--config /nonexistent.cfg bounds"), 2);
    std::ofstream(dir / "bad.cfg") << "[bounds]\nr = 0.1\nr = 0.2\n";
    EXPECT_EQ(code("--config " + (dir / "bad.cfg").string() + " bounds"), 2);
    EXPECT_EQ(code("--outdir " + dir.string() + " --seed 3 bounds"), 0);
    EXPECT_TRUE(fs::exists(dir / "bounds.csv"));
    EXPECT_EQ(code("--outdir " + dir.string() + " selftest"), 0);
}
#endif
