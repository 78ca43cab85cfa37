#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gue_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) const {
    const fs::path capture = dir_ / "stdout.txt";
    const std::string cmd =
        std::string(GUE_CLI_PATH) + " " + args + " > " + capture.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(capture);
    return r;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path write_config(const std::string& name, const nlohmann::json& j) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump();
    return p;
  }

  fs::path dir_;
};

nlohmann::json tiny_config(const std::string& out_dir) {
  return {{"n", 50}, {"num_matrices", 20}, {"master_seed", 4}, {"out_dir", out_dir},
          {"gt_n", 10}, {"gt_matrices", 5}};
}

}  // namespace

TEST_F(CliTest, VerifyWritesArtifacts) {
  const auto out = dir_ / "res";
  const auto cfg = write_config("c.json", tiny_config(out.string()));
  const CliRun r = run("verify --config " + cfg.string());
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* f : {"report.json", "bounds.csv", "gaps.csv", "gt.csv", "timing.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(rep.at("config").at("n"), 50);
  EXPECT_NE(r.out.find("upper_tail"), std::string::npos);
}

TEST_F(CliTest, VerifyRejectsBadDelta) {
  auto j = tiny_config((dir_ / "res").string());
  j["delta"] = 0.6;
  EXPECT_EQ(run("verify " + write_config("c.json", j).string()).code, 1);
}

TEST_F(CliTest, VerifyRejectsUnwritableOutput) {
  const auto cfg = write_config("c.json", tiny_config("/dev/null/x"));
  EXPECT_EQ(run("verify --config " + cfg.string()).code, 1);
}

TEST_F(CliTest, VerifyMissingConfig) {
  EXPECT_EQ(run("verify --config " + (dir_ / "absent.json").string()).code, 1);
}

TEST_F(CliTest, ThreadsDoNotChangeBytes) {
  const auto out = dir_ / "res";
  const auto cfg = write_config("c.json", tiny_config(out.string()));
  const std::vector<std::string> files{"report.json", "bounds.csv", "gaps.csv", "gt.csv"};
  ASSERT_EQ(run("verify " + cfg.string() + " --threads 1").code, 0);
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(slurp(out / f));
  fs::remove_all(out);
  ASSERT_EQ(run("verify " + cfg.string() + " --threads 3").code, 0);
  for (std::size_t k = 0; k < files.size(); ++k) EXPECT_EQ(first[k], slurp(out / files[k])) << files[k];
}

TEST_F(CliTest, SeedOverrideChangesGaps) {
  const auto cfg = write_config("c.json", tiny_config((dir_ / "unused").string()));
  ASSERT_EQ(run("verify " + cfg.string() + " --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run("verify " + cfg.string() + " --seed 5 --out " + (dir_ / "b").string()).code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "gaps.csv"), slurp(dir_ / "b" / "gaps.csv"));
}

TEST_F(CliTest, GmAtZero) {
  const CliRun r = run("gm --s-max 0");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "s,E,F,p\n0,1,0,0\n");
}

TEST_F(CliTest, GmTableAndNonConvergence) {
  const CliRun r = run("gm --s-max 3 --points 4");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
  EXPECT_EQ(run("gm --s-max 6 --nodes 5").code, 2);
}

TEST_F(CliTest, SampleAndGaps) {
  const CliRun s = run("sample --n 5 --seed 3");
  EXPECT_EQ(s.code, 0);
  EXPECT_EQ(s.out.rfind("i,lambda\n", 0), 0u);
  EXPECT_EQ(std::count(s.out.begin(), s.out.end(), '\n'), 6);
  EXPECT_EQ(run("sample --n 5 --seed 3").out, s.out);
  const CliRun m = run("sample --n 3 --matrix");
  EXPECT_EQ(std::count(m.out.begin(), m.out.end(), '\n'), 10);

  const CliRun g = run("gaps --n 20 --matrices 3 --seed 1");
  EXPECT_EQ(g.code, 0);
  EXPECT_EQ(g.out.rfind("matrix_index,i,g\n", 0), 0u);
  EXPECT_EQ(run("gaps --n 20 --matrices 3 --delta 0.7").code, 1);
}

TEST_F(CliTest, GtRun) {
  const CliRun r = run("gt --n 12 --matrices 4 --seed 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(CliTest, ReportSummaryAndSvg) {
  const auto out = dir_ / "res";
  ASSERT_EQ(run("verify " + write_config("c.json", tiny_config(out.string())).string()).code, 0);
  const CliRun r = run("report " + (out / "report.json").string() + " --svg " + (dir_ / "svg").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.out.empty());
  const std::string svg = slurp(dir_ / "svg" / "gap_histogram.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(run("report " + (dir_ / "missing.json").string()).code, 1);
}

TEST_F(CliTest, HelpAndBadFlags) {
  EXPECT_EQ(run("--help").code, 0);
  for (const char* sub : {"sample", "gaps", "verify", "gm", "gt", "report"})
    EXPECT_EQ(run(std::string(sub) + " --help").code, 0) << sub;
  EXPECT_EQ(run("gm --bogus").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("nosuch").code, 1);
}
