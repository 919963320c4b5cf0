#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tlaw/cli.hpp"

using namespace tlaw;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tlaw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    std::string write_panel(const std::string& name, const Panel& p,
                            Layout layout = Layout::wide) const {
        return write(name, write_csv(p, layout));
    }

    static std::string slurp(const std::string& p) { return read_file(p); }

    fs::path dir_;
};

Panel poisson_panel(std::size_t n, std::size_t T, std::uint64_t seed) {
    return generate_panel(DgpSpec{}, n, T, seed);
}

} // namespace

TEST_F(Cli, FitJsonOnExactData) {
    DgpSpec s;
    s.kind = DgpKind::exact_tl;
    s.profile = LambdaProfile::three_plus_cos;
    const auto in = write_panel("exact.csv", generate_panel(s, 10, 12, 1));
    const auto r = run({"fit", "--input", in});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_NEAR(doc["fit"]["theta1"].get<double>(), 0.0, 1e-10);
    EXPECT_NEAR(doc["fit"]["beta"].get<double>(), 2.0, 1e-10);
    EXPECT_TRUE(doc["conventional"]["degenerate"].get<bool>());
    bool warned = false;
    for (const auto& w : doc["warnings"]) warned |= w.get<std::string>().find("zero width") != std::string::npos;
    EXPECT_TRUE(warned);
    EXPECT_EQ(doc["provenance"]["input_fnv1a64"], fnv1a64_hex(read_file(in)));
}

TEST_F(Cli, TemporalAxisEqualsTranspose) {
    const Panel p = poisson_panel(30, 40, 2);
    const auto a = write_panel("a.csv", p);
    const auto b = write_panel("b.csv", transpose_axis(p));
    const auto ra = run({"fit", "--input", a, "--axis", "temporal", "--format", "csv"});
    const auto rb = run({"fit", "--input", b, "--format", "csv"});
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    const auto body = [](const std::string& s) { return s.substr(s.find("parameter,")); };
    EXPECT_EQ(body(ra.out), body(rb.out));
}

TEST_F(Cli, RescaleKeepsSlope) {
    const auto in = write_panel("p.csv", scale_panel(poisson_panel(50, 30, 3), 7.0));
    const auto a = nlohmann::json::parse(run({"fit", "--input", in}).out);
    const auto b = nlohmann::json::parse(run({"fit", "--input", in, "--rescale", "grand_mean"}).out);
    EXPECT_NEAR(a["fit"]["beta"].get<double>(), b["fit"]["beta"].get<double>(), 1e-9);
    EXPECT_GT(std::fabs(a["fit"]["theta1"].get<double>() - b["fit"]["theta1"].get<double>()), 1e-3);
}

TEST_F(Cli, LongLayoutMatchesWide) {
    const Panel p = poisson_panel(20, 15, 4);
    const auto w = write_panel("w.csv", p);
    const auto l = write_panel("l.csv", p, Layout::long_format);
    const auto rw = nlohmann::json::parse(run({"fit", "--input", w}).out);
    const auto rl = nlohmann::json::parse(run({"fit", "--input", l, "--layout", "long"}).out);
    EXPECT_EQ(rw["fit"], rl["fit"]);
    EXPECT_EQ(rw["asymptotic"], rl["asymptotic"]);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run({}).code, cli::exit_usage);
    EXPECT_EQ(run({"fit"}).code, cli::exit_usage);
    EXPECT_EQ(run({"fit", "--input", path("missing.csv")}).code, cli::exit_input);
    EXPECT_EQ(run({"fit", "--input", write("neg.csv", "site,a,b\ns,1,-2\nr,1,1\n")}).code,
              cli::exit_input);
    EXPECT_EQ(run({"fit", "--input", write("deg.csv", "site,a,b,c\ns,2,2,2\nr,2,2,2\n")}).code,
              cli::exit_degenerate_design);
    // Only the first time has positive variance, so Gamma_hat is a rank-one term.
    EXPECT_EQ(run({"fit", "--input", write("sing.csv", "site,a,b,c\ns,0,3,4\nr,1,3,4\n")}).code,
              cli::exit_singular_gamma);
    EXPECT_EQ(run({"diagnose", "--input", write("const.csv", "site,a,b,c\ns,1,2,3\nr,1,2,3\n")}).code,
              cli::exit_invalid_residuals);
    EXPECT_EQ(run({"fit", "--input", path("x"), "--alpha", "2"}).code, cli::exit_usage);
    EXPECT_EQ(run({"simulate", "--grid", "10by3"}).code, cli::exit_usage);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, SimulateExactProfileZeroRmse) {
    const auto r = run({"simulate", "--dgp", "exact_tl", "--grid", "4x5,6x8", "--reps", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
        ++rows;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) f.push_back(c);
        ASSERT_EQ(f.size(), 6u);
        EXPECT_LT(std::stod(f[3]), 1e-10);
        EXPECT_LT(std::stod(f[4]), 1e-10);
    }
    EXPECT_EQ(rows, 2);
}

TEST_F(Cli, QqRowCount) {
    const auto r = run({"qq", "--n", "20", "--t", "15", "--reps", "7", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("rep,stat1_nc,stat2_nc,stat1_c,stat2_c"), std::string::npos);
    int rows = 0;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) rows += !line.empty() && std::isdigit(line[0]);
    EXPECT_EQ(rows, 7);
}

TEST_F(Cli, DiagnoseLagRows) {
    const auto in = write_panel("p.csv", poisson_panel(30, 20, 6));
    const auto r = run({"diagnose", "--input", in, "--lags", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    int temporal = 0, spatial = 0;
    std::istringstream s(r.out);
    for (std::string line; std::getline(s, line);) {
        temporal += line.rfind("temporal,", 0) == 0;
        spatial += line.rfind("spatial,", 0) == 0;
    }
    EXPECT_EQ(temporal, 3);
    EXPECT_EQ(spatial, 1);
}

TEST_F(Cli, OutputFilesAreDeterministic) {
    const auto in = write_panel("p.csv", poisson_panel(25, 20, 8));
    const std::vector<std::vector<std::string>> commands = {
        {"fit", "--input", in},
        {"fit", "--input", in, "--format", "csv"},
        {"simulate", "--grid", "10x10,20x10", "--reps", "5", "--seed", "3"},
        {"qq", "--n", "15", "--t", "10", "--reps", "5", "--seed", "3"},
        {"diagnose", "--input", in, "--max-pairs", "50", "--seed", "2"}};
    for (const auto& cmd : commands) {
        auto a = cmd, b = cmd;
        a.insert(a.end(), {"--out", path("a.out")});
        b.insert(b.end(), {"--out", path("b.out")});
        ASSERT_EQ(run(a).code, 0) << cmd[0];
        ASSERT_EQ(run(b).code, 0) << cmd[0];
        auto ta = slurp(path("a.out")), tb = slurp(path("b.out"));
        // --out is not part of the recorded flags, so the files must match.
        EXPECT_EQ(ta, tb) << cmd[0];
        EXPECT_FALSE(fs::exists(path("a.out.tmp")));
    }
}
