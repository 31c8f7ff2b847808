#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memcurse/cli/cli.hpp"

namespace fs = std::filesystem;
using memcurse::cli::run;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("memcurse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  static std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cells.push_back(c);
      rows.push_back(cells);
    }
    return rows;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, AnalyticGridHasOneRowPerCellAndMonotoneColumns) {
  ASSERT_EQ(run({"analytic", "--lambda", "0:0.99:100", "--rho", "0,0.5,0.9", "--out", out("a")}), 0);
  const auto rows = read_csv(dir_ / "a" / "analytic.csv");
  ASSERT_EQ(rows.size(), 301u);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i][2] != rows[i - 1][2]) continue;
    for (std::size_t col : {3u, 4u}) EXPECT_GT(std::stod(rows[i][col]), std::stod(rows[i - 1][col]));
  }
}

TEST_F(CliTest, AnalyticConstantInputRow) {
  ASSERT_EQ(run({"analytic", "--rho", "1", "--lambda", "0.5", "--out", out("a")}), 0);
  const auto rows = read_csv(dir_ / "a" / "analytic.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][3], "4");
  EXPECT_EQ(rows[1][4], "16");
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({"analytic", "--lambda", "0:0.99:0", "--out", out("a")}), memcurse::cli::kExitUsage);
  EXPECT_EQ(run({"analytic", "--lambda", "", "--out", out("a")}), memcurse::cli::kExitUsage);
  EXPECT_EQ(run({"analytic", "--lambda", "1.5", "--out", out("a")}), memcurse::cli::kExitUsage);
  EXPECT_EQ(run({"train", "--steps", "0", "--out", out("t")}), memcurse::cli::kExitUsage);
  EXPECT_EQ(run({"train", "--no-such-flag", "1"}), memcurse::cli::kExitUsage);
  EXPECT_EQ(run({}), memcurse::cli::kExitUsage);
  EXPECT_FALSE(fs::exists(dir_ / "a" / "analytic.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "t"));
}

TEST_F(CliTest, ValidateRefusesInsufficientBudget) {
  EXPECT_EQ(run({"validate", "--tol", "0.0001", "--samples", "100", "--out", out("v")}),
            memcurse::cli::kExitUsage);
  EXPECT_FALSE(fs::exists(dir_ / "v" / "validate.csv"));
}

TEST_F(CliTest, ValidateSingleCellPasses) {
  ASSERT_EQ(run({"validate", "--cells", "0:0", "--out", out("v")}), 0);
  const auto rows = read_csv(dir_ / "v" / "validate.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].back(), "1");
}

TEST_F(CliTest, HessianScalarEntry) {
  ASSERT_EQ(run({"hessian", "--lambda", "0.9", "--out", out("h")}), 0);
  const auto rows = read_csv(dir_ / "h" / "hessian_matrix.csv");
  ASSERT_EQ(rows[1][2], "lambda.re[0]");
  ASSERT_EQ(rows[1][3], "lambda.re[0]");
  EXPECT_NEAR(std::stod(rows[1][4]) / 263.887, 1.0, 0.03);
}

TEST_F(CliTest, SigpropTableShape) {
  ASSERT_EQ(run({"sigprop", "--nu", "0.32,0.9,0.99", "--recurrent", "lru", "--sequences", "4", "--length", "16",
                 "--batch-size", "4", "--out", out("s")}),
            0);
  const auto rows = read_csv(dir_ / "s" / "sigprop.csv");
  std::set<std::string> nus, layers, quantities;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    nus.insert(rows[i][1]);
    if (rows[i][2] != "0") layers.insert(rows[i][2]);
    quantities.insert(rows[i][3]);
  }
  EXPECT_EQ(nus.size(), 3u);
  EXPECT_EQ(layers.size(), 4u);
  EXPECT_TRUE(quantities.count("grad:omega_theta"));
  EXPECT_TRUE(quantities.count("hidden"));
}

TEST_F(CliTest, ManifestReplayIsByteIdenticalAcrossJobs) {
  ASSERT_EQ(run({"train", "--steps", "20", "--seq-len", "30", "--batch-size", "4", "--arms", "dense,lru",
                 "--out", out("r1"), "--jobs", "1"}),
            0);
  const std::string manifest = (dir_ / "r1" / "manifest.json").string();
  ASSERT_EQ(run({"--manifest", manifest, "--out", out("r8"), "--jobs", "8"}), 0);
  for (const char* f : {"train_cells.csv", "train_loss.csv", "train_best.csv", "train_effective_lr.csv"})
    EXPECT_EQ(slurp(dir_ / "r1" / f), slurp(dir_ / "r8" / f)) << f;
  EXPECT_EQ(run({"--manifest", manifest, "--steps", "3", "--out", out("r9")}), memcurse::cli::kExitUsage);
}

TEST_F(CliTest, ReplayDetectsTamperedOutputs) {
  ASSERT_EQ(run({"landscape", "--resolution", "11", "--out", out("l")}), 0);
  auto m = nlohmann::json::parse(slurp(dir_ / "l" / "manifest.json"));
  m["outputs"]["landscape.csv"] = "fnv1a64:0000000000000000";
  std::ofstream(dir_ / "tampered.json") << m.dump();
  EXPECT_EQ(run({"--manifest", (dir_ / "tampered.json").string(), "--out", out("l2")}),
            memcurse::cli::kExitValidation);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  std::ofstream(dir_ / "cfg.json") << R"({"lambda": [0.1, 0.2], "rho": "0"})";
  ASSERT_EQ(run({"analytic", "--config", (dir_ / "cfg.json").string(), "--rho", "0.5", "--out", out("c")}), 0);
  const auto rows = read_csv(dir_ / "c" / "analytic.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "0.1");
  EXPECT_EQ(rows[1][2], "0.5");
  std::ofstream(dir_ / "bad.json") << R"({"lambda": true})";
  EXPECT_EQ(run({"analytic", "--config", (dir_ / "bad.json").string(), "--out", out("d")}),
            memcurse::cli::kExitUsage);
}

TEST_F(CliTest, DivergentAngleRunExitCode) {
  EXPECT_EQ(run({"train", "--task", "angle1d", "--steps", "50", "--lr", "1e6", "--params", "polar", "--n-seeds",
                 "1", "--out", out("g")}),
            memcurse::cli::kExitDivergence);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "angle1d_summary.csv"));
}
