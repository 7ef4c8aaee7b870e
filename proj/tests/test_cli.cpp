#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "multicoap/cli.hpp"
#include "multicoap/config.hpp"
#include "multicoap/csv.hpp"

using namespace multicoap;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "multicoap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "multicoap_cli" / name;
  fs::remove_all(dir);
  return dir;
}

fs::path write_json(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small Example-1-like dataset shared by the tests below.
const fs::path& small_dataset() {
  static const fs::path dir = [] {
    const fs::path d = fresh_dir("small_data");
    const fs::path cfg = write_json(fresh_dir("small_cfg") / "sim.json",
                                    R"({"n": [40, 50], "p": 30, "d": 3, "r0": 2, "seed": 4, "structure_seed": 2})");
    const auto r = run_cli({"simulate", "--config", cfg.string(), "--out-dir", d.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return d;
  }();
  return dir;
}

fs::path fit_config() {
  return write_json(fresh_dir("fit_cfg") / "fit.json", R"({"q": 3, "qs": 2, "rank": 2})");
}

}  // namespace

TEST(Cli, SimulateWritesTheFileContract) {
  const fs::path dir = fresh_dir("sim_default") / "nested" / "out";
  const auto r = run_cli({"simulate", "--out-dir", dir.string(), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int s = 1; s <= 2; ++s) {
    for (const char* stem : {"X_", "Z_", "a_"}) {
      EXPECT_TRUE(fs::exists(dir / (stem + std::to_string(s) + ".csv")));
    }
    EXPECT_TRUE(fs::exists(dir / "truth" / ("B_" + std::to_string(s) + "0.csv")));
  }
  EXPECT_TRUE(fs::exists(dir / "truth" / "A0.csv"));
  EXPECT_TRUE(fs::exists(dir / "truth" / "beta0.csv"));
  const auto manifest = config::Json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["config"]["seed"], 3);
  EXPECT_EQ(manifest["config"]["p"], 100);
}

TEST(Cli, SimulateRejectsUnwritableTarget) {
  const fs::path blocker = fresh_dir("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "not a directory";
  const fs::path target = blocker / "out";
  const auto r = run_cli({"simulate", "--out-dir", target.string()});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find(blocker.string()), std::string::npos) << r.err;
}

TEST(Cli, FitConvergesAndWritesSummary) {
  const fs::path out = fresh_dir("fit_out");
  const auto r = run_cli({"fit", "--data-dir", small_dataset().string(), "--config", fit_config().string(),
                          "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = config::Json::parse(slurp(out / "fit_summary.json"));
  EXPECT_TRUE(summary["converged"].get<bool>());
  EXPECT_LE(summary["iterations"].get<int>(), 200);
  EXPECT_EQ(summary["max_relative_elbo_drop"].get<double>(), 0.0);
  EXPECT_TRUE(summary.contains("scores"));
  for (const char* f : {"beta.csv", "A.csv", "B_1.csv", "lambda.csv", "Sf_2.csv", "elbo_trace.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
}

TEST(Cli, FitManifestReproducesTheFit) {
  const fs::path first = fresh_dir("fit_first");
  ASSERT_EQ(run_cli({"fit", "--data-dir", small_dataset().string(), "--config", fit_config().string(), "--out-dir",
                     first.string()})
                .code,
            0);
  const fs::path second = fresh_dir("fit_second");
  ASSERT_EQ(run_cli({"fit", "--data-dir", small_dataset().string(), "--config", (first / "manifest.json").string(),
                     "--out-dir", second.string()})
                .code,
            0);
  EXPECT_EQ(slurp(first / "A.csv"), slurp(second / "A.csv"));
  EXPECT_EQ(slurp(first / "elbo_trace.csv"), slurp(second / "elbo_trace.csv"));
}

TEST(Cli, FitReportsDimensionBound) {
  const fs::path cfg = write_json(fresh_dir("bad_cfg") / "fit.json", R"({"q": 20, "qs": 9})");
  const auto r = run_cli(
      {"fit", "--data-dir", small_dataset().string(), "--config", cfg.string(), "--out-dir", fresh_dir("x").string()});
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("p-1 > q+q_s"), std::string::npos) << r.err;
}

TEST(Cli, AbsentNormalizersMatchExplicitOnes) {
  const fs::path without = fresh_dir("no_a");
  fs::create_directories(without);
  for (const auto& entry : fs::directory_iterator(small_dataset())) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("a_", 0) != 0) fs::copy_file(entry.path(), without / name);
  }
  const fs::path out1 = fresh_dir("with_a_fit");
  const fs::path out2 = fresh_dir("without_a_fit");
  ASSERT_EQ(run_cli({"fit", "--data-dir", small_dataset().string(), "--config", fit_config().string(), "--out-dir",
                     out1.string()})
                .code,
            0);
  ASSERT_EQ(
      run_cli({"fit", "--data-dir", without.string(), "--config", fit_config().string(), "--out-dir", out2.string()})
          .code,
      0);
  EXPECT_EQ(slurp(out1 / "A.csv"), slurp(out2 / "A.csv"));
  EXPECT_EQ(slurp(out1 / "beta.csv"), slurp(out2 / "beta.csv"));
}

TEST(Cli, SelectWritesAllThreeChoices) {
  const fs::path data = fresh_dir("cite_like");
  const fs::path sim =
      write_json(fresh_dir("cite_cfg") / "sim.json",
                 R"({"n": [60, 70], "p": 50, "d": 10, "r0": 3, "q": 6, "qs": [3, 3], "seed": 8, "rho_a": 1.0, "rho_b": 1.0})");
  ASSERT_EQ(run_cli({"simulate", "--config", sim.string(), "--out-dir", data.string()}).code, 0);
  const fs::path base = write_json(fresh_dir("cite_base") / "fit.json", R"({"max_iter": 40})");
  const fs::path out = fresh_dir("cite_select");
  const auto r = run_cli({"select", "--data-dir", data.string(), "--config", base.string(), "--out-dir", out.string(),
                          "--q-max", "20", "--qs-max", "10", "--r-max", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sel = config::Json::parse(slurp(out / "selection.json"));
  EXPECT_GE(sel["q_hat"].get<int>(), 1);
  EXPECT_LE(sel["q_hat"].get<int>(), 20);
  EXPECT_EQ(sel["qs_hat"].size(), 2u);
  EXPECT_GE(sel["r_hat"].get<int>(), 1);
  EXPECT_LE(sel["r_hat"].get<int>(), 10);
  EXPECT_EQ(sel["nu_f"].size(), 20u);
}

TEST(Cli, BenchmarkWithOneReplicateLeavesSdEmpty) {
  const fs::path out = fresh_dir("bench1");
  const auto r = run_cli({"benchmark", "example1-p", "--replicates", "1", "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = slurp(out / "summary.csv");
  std::istringstream lines(table);
  std::string header, a_tr;
  std::getline(lines, header);
  std::getline(lines, a_tr);
  EXPECT_NE(header.find("p=100 mean"), std::string::npos);
  EXPECT_EQ(a_tr.rfind("A_tr,", 0), 0u);
  // metric, then (mean, sd) per cell with every sd blank.
  std::vector<std::string> cells;
  std::stringstream row(a_tr);
  for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
  while (cells.size() < 7) cells.emplace_back();
  EXPECT_FALSE(cells[1].empty());
  EXPECT_TRUE(cells[2].empty());
  EXPECT_TRUE(cells[4].empty());
  EXPECT_TRUE(cells[6].empty());
  EXPECT_TRUE(fs::exists(out / "results.csv"));
  const auto manifest = config::Json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["failed_replicates"], 0);
}

TEST(Cli, ErrorsMapToExitCodes) {
  EXPECT_EQ(run_cli({"benchmark", "example9", "--out-dir", fresh_dir("b9").string()}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"fit", "--data-dir", fresh_dir("nothing").string(), "--config", fit_config().string(),
                     "--out-dir", fresh_dir("y").string()})
                .code,
            cli::kDataError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kSuccess);
}
