#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = TRIVINE_CLI_PATH;
const std::string kData = TRIVINE_TEST_DATA_DIR;

struct CliRun {
    int code;
    std::string err;
};

CliRun run(const std::string& args) {
    const fs::path err = fs::temp_directory_path() / ("trivine_cli_err_" + std::to_string(::getpid()));
    const std::string cmd = kCli + " " + args + " > /dev/null 2> " + err.string();
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    fs::remove(err);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("trivine_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
                std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, MalformedCsvExitsTwoWithLocation) {
    for (const char* f : {"empty.csv", "negative_count.csv", "non_integer.csv", "duplicate_id.csv",
                          "missing_column.csv", "ragged_row.csv", "text_count.csv", "header_only.csv",
                          "no_header_id.csv"}) {
        const CliRun r = run("fit --data " + kData + "/" + f);
        EXPECT_EQ(r.code, 2) << f << ": " << r.err;
    }
    const CliRun neg = run("fit --data " + kData + "/negative_count.csv");
    EXPECT_NE(neg.err.find(":3:3:"), std::string::npos) << neg.err;
}

TEST_F(Cli, ClaytonStartRangeViolationExitsTwo) {
    const CliRun r = run("fit --data " + kData + "/valid_small.csv --config " + kData + "/clayton90_bad_start.cfg");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("(-1, 0]"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("fit").code, 2);
    EXPECT_EQ(run("simulate --config " + kData + "/fit_normal_cln.cfg --seed 1").code, 2);  // no truth
    EXPECT_EQ(run("fit --data " + kData + "/missing_file.csv").code, 2);
}

TEST_F(Cli, SimulateRequiresSeedAndIsDeterministic) {
    std::ofstream(path("noseed.cfg")) << "truth.preset = normal\n";
    EXPECT_EQ(run("simulate --config " + path("noseed.cfg") + " --out " + path("x.csv")).code, 2);
    ASSERT_EQ(run("simulate --config " + kData + "/sim_normal.cfg --out " + path("a.csv")).code, 0);
    ASSERT_EQ(run("simulate --config " + kData + "/sim_normal.cfg --out " + path("b.csv")).code, 0);
    ASSERT_EQ(run("simulate --config " + kData + "/sim_normal.cfg --seed 18 --out " + path("c.csv")).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, FitJsonRoundTripsIntoSroc) {
    ASSERT_EQ(run("simulate --config " + kData + "/sim_normal.cfg --out " + path("d.csv")).code, 0);
    const CliRun f = run("fit --data " + path("d.csv") + " --config " + kData + "/fit_normal_cln.cfg --out " +
                      path("fit.json"));
    ASSERT_TRUE(f.code == 0 || f.code == 3) << f.err;
    const std::string js = slurp(path("fit.json"));
    EXPECT_NE(js.find("\"schema\": \"trivine.fit/1\""), std::string::npos);
    EXPECT_NE(js.find("\"log_lik\""), std::string::npos);
    ASSERT_EQ(run("sroc --data " + path("d.csv") + " --fit " + path("fit.json") + " --out " + path("s")).code, 0);
    const std::string svg = slurp(path("s.svg"));
    std::size_t circles = 0;
    for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) {
        ++circles;
    }
    EXPECT_EQ(circles, 30u);
    EXPECT_TRUE(fs::exists(path("s_curves.csv")));
    EXPECT_TRUE(fs::exists(path("s_grid.csv")));
    // sroc also accepts a model configuration and fits it
    ASSERT_EQ(run("sroc --data " + path("d.csv") + " --fit " + kData + "/fit_normal_cln.cfg --out " + path("t")).code,
              0);
    EXPECT_EQ(slurp(path("t.svg")), svg);
}

TEST_F(Cli, NonConvergenceExitsThreeWithJson) {
    ASSERT_EQ(run("simulate --config " + kData + "/sim_normal.cfg --out " + path("d.csv")).code, 0);
    std::ofstream(path("short.cfg")) << "model.edge_a = cln90\nmodel.edge_b = cln0\nmodel.edge_cond = cln90\n"
                                        "fit.max_iters = 1\nfit.restarts = 0\nfit.nq = 5\n";
    const CliRun r = run("fit --data " + path("d.csv") + " --config " + path("short.cfg") + " --out " + path("f.json"));
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_NE(slurp(path("f.json")).find("\"converged\": false"), std::string::npos);
}

TEST_F(Cli, ScanWritesRankedJsonAndCsv) {
    ASSERT_EQ(run("simulate --config " + kData + "/sim_normal.cfg --out " + path("d.csv")).code, 0);
    ASSERT_EQ(run("scan --data " + path("d.csv") + " --config " + kData + "/scan_three.cfg --out " +
                  path("scan.json"))
                  .code,
              0);
    const std::string js = slurp(path("scan.json"));
    EXPECT_NE(js.find("\"schema\": \"trivine.scan/1\""), std::string::npos);
    EXPECT_NE(js.find("\"best\": true"), std::string::npos);
    const std::string csv = slurp(path("scan.csv"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(Cli, SimstudyIsDeterministic) {
    const std::string base = "simstudy --config " + kData + "/sim_normal.cfg --replicates 2 --threads 1 --out ";
    ASSERT_EQ(run(base + path("a.csv")).code, 0);
    ASSERT_EQ(run(base + path("b.csv")).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a.csv")).substr(0, 12), "statistic,ma");
}
