#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(FEDSEL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("fedsel_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
};

const char* kOracle = R"({"N": 6, "K": 2, "T": 30, "reward_mode": "oracle",
    "oracle": {"client_quality": [0.9, 0.85, 0.7, 0.55, 0.45, 0.3]},
    "topology": {"placement": "fixed", "link_radius_km": 0.15,
                 "positions": [[0.1,0.1],[0.2,0.1],[0.3,0.1],[0.4,0.1],[0.5,0.1],[0.6,0.1]]},
    "data": {"iid_clients": [0, 1]}})";

TEST_F(CliTest, SimulateWritesOutputs) {
  const std::string cfg = write("s.json", kOracle);
  const fs::path out = dir_ / "run";
  ASSERT_EQ(run("simulate --config " + cfg + " --algo bp_ucb --trials 2 --out " + out.string()), 0);
  for (const char* f : {"trace_0.csv", "trace_1.csv", "gossip_0.csv", "report.csv", "bounds.csv",
                        "bp_diagnostics.csv", "selection.csv", "tta.csv", "config.json", "report.svg"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST_F(CliTest, ExportCsvOnly) {
  const std::string cfg = write("s.json", kOracle);
  const fs::path out = dir_ / "run";
  ASSERT_EQ(run("simulate --config " + cfg + " --export csv --quiet --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "report.csv"));
  EXPECT_FALSE(fs::exists(out / "report.svg"));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("simulate --config " + write("bad.json", R"({"N": 6, "bogus": 1})")), 2);
  EXPECT_EQ(run("simulate --config " + write("broken.json", "{")), 2);
  EXPECT_EQ(run("simulate --config /nonexistent/x.json"), 2);
  EXPECT_EQ(run("simulate"), 2);
  EXPECT_EQ(run("simulate --config " + write("s.json", kOracle) + " --algo thompson"), 2);
  EXPECT_EQ(run("simulate --config " + write("s.json", kOracle) + " --trials 0"), 2);
  EXPECT_EQ(run("simulate --config " + write("s.json", kOracle) + " --export pdf"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST_F(CliTest, RuntimeErrorsExitThree) {
  // 15 arms exceed the cap, so the conventional baseline cannot enumerate them
  std::string text = kOracle;
  text.insert(1, R"("arm_cap": 10, )");
  EXPECT_EQ(run("simulate --config " + write("capped.json", text) + " --algo conventional_ucb --quiet --out " +
                (dir_ / "o").string()),
            3);
  EXPECT_EQ(run("simulate --config " + write("s.json", kOracle) + " --quiet --out /proc/fedsel_cannot_write"), 3);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

}  // namespace
