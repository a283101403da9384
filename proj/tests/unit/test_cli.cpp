#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dmm_cli/cli.hpp"
#include "test_support.hpp"

namespace dmm {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dmm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kSpec = "agents = 4\ndim_x = 2\ndim_y = 2\nsamples_per_agent = 30\nrounds = 20\nb0 = 10\n";

TEST(Cli, RunWritesOutputsAndSucceeds) {
  testing::TempDir dir("dmm_cli_run");
  testing::write_text(dir.path() / "a.spec", kSpec);
  const Outcome o = invoke({"run", (dir.path() / "a.spec").string(), "--out", (dir.path() / "out").string()});
  EXPECT_EQ(o.code, cli::kOk) << o.err;
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "STORM_ED_ring_rep0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "summary.csv"));
}

TEST(Cli, SeedFlagChangesTheRun) {
  testing::TempDir dir("dmm_cli_seed");
  testing::write_text(dir.path() / "a.spec", kSpec);
  const std::string spec = (dir.path() / "a.spec").string();
  ASSERT_EQ(invoke({"run", spec, "--out", (dir.path() / "a").string()}).code, 0);
  ASSERT_EQ(invoke({"run", spec, "--out", (dir.path() / "b").string(), "--seed", "1"}).code, 0);
  ASSERT_EQ(invoke({"run", spec, "--out", (dir.path() / "c").string(), "--seed", "2"}).code, 0);
  const auto file = "STORM_ED_ring_rep0.csv";
  EXPECT_EQ(testing::read_file(dir.path() / "a" / file), testing::read_file(dir.path() / "b" / file));
  EXPECT_NE(testing::read_file(dir.path() / "a" / file), testing::read_file(dir.path() / "c" / file));
}

TEST(Cli, SpecErrorsExitWithTwo) {
  testing::TempDir dir("dmm_cli_bad");
  testing::write_text(dir.path() / "bad.spec", "agents = 4\nrounds = many\n");
  const Outcome o = invoke({"run", (dir.path() / "bad.spec").string(), "--out", dir.path().string()});
  EXPECT_EQ(o.code, cli::kSpecError);
  EXPECT_NE(o.err.find("bad.spec:2:"), std::string::npos) << o.err;
  EXPECT_EQ(invoke({"run", (dir.path() / "bad.spec").string(), "--scale", "huge"}).code, cli::kSpecError);
  EXPECT_EQ(invoke({"explode"}).code, cli::kSpecError);
}

TEST(Cli, VerifyWritesAReport) {
  testing::TempDir dir("dmm_cli_verify");
  testing::write_text(dir.path() / "a.spec", kSpec);
  const Outcome o = invoke({"verify", (dir.path() / "a.spec").string(), "--out", dir.path().string()});
  EXPECT_EQ(o.code, cli::kOk) << o.out;
  const std::string report = testing::read_file(dir.path() / "verify_report.txt");
  EXPECT_NE(report.find("RESULT PASS"), std::string::npos);
}

TEST(Cli, VerifyFailureExitsWithOne) {
  testing::TempDir dir("dmm_cli_corrupt");
  testing::write_text(dir.path() / "a.spec", std::string(kSpec) + "corrupt_mixing = true\n");
  const Outcome o = invoke({"verify", (dir.path() / "a.spec").string(), "--out", dir.path().string()});
  EXPECT_EQ(o.code, cli::kVerificationFailed);
  EXPECT_NE(o.out.find("FAIL mixing[ring]"), std::string::npos);
}

TEST(Cli, AllCellsDivergingExitsWithThree) {
  testing::TempDir dir("dmm_cli_div");
  testing::write_text(dir.path() / "a.spec", std::string(kSpec) + "mu_x = 50\nmu_y = 50\ndivergence_threshold = 1e6\n");
  const Outcome o = invoke({"run", (dir.path() / "a.spec").string(), "--out", dir.path().string()});
  EXPECT_EQ(o.code, cli::kAllDiverged) << o.err;
}

}  // namespace
}  // namespace dmm
