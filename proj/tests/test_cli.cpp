#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "tvart/csv.hpp"
#include "tvart/error.hpp"
#include "tvart/solver.hpp"

using namespace tvart;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("tvart_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int tool(std::vector<std::string> args) {
    args.insert(args.begin(), "tvart");
    return cli::run(args);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string summary_value(const fs::path& summary, const std::string& key) {
    std::ifstream in(summary);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ": ", 0) == 0)
            return line.substr(key.size() + 2);
    return {};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    std::istringstream in("# comment\n\n rank = 3 \nwindow=5\nrank=4\n");
    const auto kv = cli::parse_config(in, "test");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0] == std::pair<std::string, std::string>{"rank", "4"});
    CHECK(kv[1] == std::pair<std::string, std::string>{"window", "5"});
    std::istringstream bad("rank 3\n");
    CHECK_THROWS_AS(cli::parse_config(bad, "test"), Error);
    CHECK(cli::manifest_line("fit", {{"rank", "2"}, {"window", "5"}}) == "tvart 0.1.0 fit rank=2 window=5");
    CHECK(cli::parse_integer_list("10,100", "N") == std::vector<long long>{10, 100});
    CHECK_THROWS_AS(cli::parse_integer_list("10,x", "N"), Error);
}

TEST_CASE("usage errors exit with 2") {
    TempDir dir("usage");
    CHECK(tool({}) == cli::kExitUsage);
    CHECK(tool({"fit", "--out", dir.path.string()}) == cli::kExitUsage);
    CHECK(tool({"fit", "--benchmark", "bogus"}) == cli::kExitUsage);
    CHECK(tool({"compare", "--methods", "magic", "--out", dir.path.string()}) == cli::kExitUsage);
    CHECK(tool({"fit", "--input", (dir.path / "missing.csv").string(), "--out", dir.path.string()}) ==
          cli::kExitRunFailed);
}

TEST_CASE("generate writes series, truth and manifest") {
    TempDir dir("generate");
    REQUIRE(tool({"generate", "--N", "6", "--tau", "40", "--seed", "2", "--out", dir.path.string()}) ==
            cli::kExitOk);
    const auto series = csv::read_series(dir.path / "series.csv");
    CHECK(series.channels() == 6);
    CHECK(series.samples() == 41);
    CHECK(fs::exists(dir.path / "truth_index.csv"));
    CHECK(fs::exists(dir.path / "truth_basis_1.csv"));
    const auto manifest = slurp(dir.path / "manifest.txt");
    CHECK(manifest.find("benchmark=switching") != std::string::npos);
    CHECK(manifest.find("tau=40") != std::string::npos);
}

TEST_CASE("pass-through fit matches the library") {
    TempDir dir("passthrough");
    REQUIRE(tool({"generate", "--N", "5", "--tau", "60", "--seed", "3", "--out", dir.path.string()}) == 0);
    const auto out = dir.path / "fit";
    REQUIRE(tool({"fit", "--input", (dir.path / "series.csv").string(), "--rank", "2", "--window", "6", "--eta",
                  "0.5", "--reg", "none", "--beta", "0", "--max-iters", "15", "--seed", "4", "--out",
                  out.string()}) == 0);

    const auto series = csv::read_series(dir.path / "series.csv");
    Hyperparams p;
    p.rank = 2;
    p.eta = 0.5;
    p.max_outer_iters = 15;
    p.seed = 4;
    const auto data = build_snapshots(series, 6);
    const auto [model, report] = fit(data, p);
    const auto n = normalize(model);
    CHECK(csv::read(out / "U1.csv").values == n.factors.U1);
    CHECK(csv::read(out / "U3.csv").values == n.factors.U3);
    CHECK(csv::read(out / "lambda.csv").values.col(0) == n.lambda);
    CHECK(csv::read(out / "trace.csv").values.rows() == report.iterations);
    CHECK(summary_value(out / "summary.txt", "regularizer") == "none");
    CHECK(summary_value(out / "summary.txt", "mean_operator_norm_error").empty());
}

TEST_CASE("config file values are overridden by flags and manifests replay") {
    TempDir dir("config");
    const auto config = dir.path / "run.cfg";
    std::ofstream(config) << "# fit settings\nbenchmark = switching\nN = 6\ntau = 40\nrank = 2\nwindow = 4\n"
                             "max-iters = 5\n";
    const auto a = dir.path / "a";
    REQUIRE(tool({"fit", "--config", config.string(), "--rank", "3", "--out", a.string()}) == 0);
    CHECK(summary_value(a / "summary.txt", "rank") == "3");
    CHECK(summary_value(a / "summary.txt", "window") == "4");
    CHECK(summary_value(a / "summary.txt", "preset") == "switching");
    CHECK(!summary_value(a / "summary.txt", "mean_operator_norm_error").empty());

    const auto b = dir.path / "b";
    REQUIRE(tool({"fit", "--config", (a / "manifest.txt").string(), "--out", b.string()}) == 0);
    CHECK(slurp(a / "U1.csv") == slurp(b / "U1.csv"));
    CHECK(slurp(a / "U3.csv") == slurp(b / "U3.csv"));

    std::ofstream(dir.path / "bad.cfg") << "colour = blue\n";
    CHECK(tool({"fit", "--config", (dir.path / "bad.cfg").string(), "--benchmark", "switching"}) ==
          cli::kExitUsage);
}

TEST_CASE("fit with clusters writes one label per window") {
    TempDir dir("clusters");
    REQUIRE(tool({"fit", "--benchmark", "switching", "--N", "6", "--clusters", "2", "--restarts", "5",
                  "--max-iters", "20", "--out", dir.path.string()}) == 0);
    const auto labels = csv::read(dir.path / "clusters.csv");
    CHECK(labels.header == std::vector<std::string>{"window", "label"});
    CHECK(labels.values.rows() == 10);
    CHECK(labels.values(0, 1) == 0.0);
}

TEST_CASE("compare table") {
    TempDir dir("compare");
    REQUIRE(tool({"compare", "--benchmark", "switching", "--N", "6", "--seeds", "0,1", "--tau", "40",
                  "--max-iters", "5", "--methods", "tvart-r2,indep-full", "--no-timing", "--out",
                  dir.path.string()}) == 0);
    const auto text = slurp(dir.path / "comparison.csv");
    CHECK(text.find("method,N,seed,mean_operator_norm_error,rmse,wall_seconds,status") != std::string::npos);
    std::istringstream lines(text);
    std::string line;
    int ok_rows = 0;
    while (std::getline(lines, line))
        if (line.size() > 3 && line.substr(line.size() - 3) == ",ok")
            ++ok_rows;
    CHECK(ok_rows == 4);
}

TEST_CASE("compare without truth leaves the error column empty") {
    TempDir dir("compare_input");
    REQUIRE(tool({"generate", "--N", "5", "--tau", "40", "--out", dir.path.string()}) == 0);
    const auto out = dir.path / "cmp";
    REQUIRE(tool({"compare", "--input", (dir.path / "series.csv").string(), "--window", "4", "--methods",
                  "indep-full", "--no-timing", "--out", out.string()}) == 0);
    const auto text = slurp(out / "comparison.csv");
    CHECK(text.find("indep-full,5,0,,") != std::string::npos);

    const auto with_truth = dir.path / "cmp_truth";
    REQUIRE(tool({"compare", "--input", (dir.path / "series.csv").string(), "--truth", dir.path.string(),
                  "--window", "4", "--methods", "indep-full", "--no-timing", "--out", with_truth.string()}) == 0);
    CHECK(slurp(with_truth / "comparison.csv").find("indep-full,5,0,,") == std::string::npos);
}

TEST_CASE("failed compare runs are reported, not hidden") {
    TempDir dir("compare_fail");
    CHECK(tool({"compare", "--benchmark", "switching", "--N", "6", "--tau", "41", "--methods", "indep-full",
                "--no-timing", "--out", dir.path.string()}) == cli::kExitRunFailed);
    CHECK(slurp(dir.path / "comparison.csv").find("failed: ") != std::string::npos);
}

TEST_CASE("cluster command") {
    TempDir dir("cluster");
    Eigen::MatrixXd pts(4, 2);
    pts << 0, 0, 9, 9, 0, 0.1, 9, 9.1;
    csv::write(dir.path / "points.csv", pts, {"a", "b"});
    REQUIRE(tool({"cluster", "--input", (dir.path / "points.csv").string(), "--k", "2", "--out",
                  dir.path.string()}) == 0);
    const auto labels = csv::read(dir.path / "clusters.csv").values;
    CHECK(labels.col(1) == Eigen::Vector4d(0, 1, 0, 1));
}

} // TEST_SUITE
