// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("collapse_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the CLI with `args`; returns the exit status, captures stdout/stderr.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + COLLAPSE_CLI_PATH + " " + args + " >" +
                            (dir_ / "stdout").string() + " 2>" + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    out_ = slurp(dir_ / "stdout");
    err_ = slurp(dir_ / "stderr");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string sim_args(const std::string& out) const {
    return "simulate --model hybrid --seed 9 --lambda 1 --mu 16 --n_points 64 --x_min -8 "
           "--x_max 8 --t_max 0.5 --sample_times 0.25,0.5 --n_trajectories 24 --sigma 0.5 "
           "--output_dir " + (dir_ / out).string();
  }

  fs::path dir_;
  std::string out_, err_;
};

TEST_F(Cli, SimulateIsByteIdenticalAcrossRunsAndWorkerCounts) {
  ASSERT_EQ(run(sim_args("a"), "COLLAPSE_WORKERS=1"), 0) << err_;
  ASSERT_EQ(run(sim_args("b"), "COLLAPSE_WORKERS=1"), 0) << err_;
  ASSERT_EQ(run(sim_args("c"), "COLLAPSE_WORKERS=3"), 0) << err_;
  for (const char* f : {"trajectories.cldn", "summary.csv", "density.csv"}) {
    const std::string a = slurp(dir_ / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "b" / f)) << f;
    EXPECT_EQ(a, slurp(dir_ / "c" / f)) << f;
  }
}

TEST_F(Cli, ConfigFileAndFlagOverride) {
  {
    std::ofstream cfg(dir_ / "run.cfg");
    cfg << "model = grw\nseed = 4\nlambda = 1\nmu = 4\nn_trajectories = 3\nn_points = 64\n"
           "x_min = -8\nx_max = 8\n";
  }
  ASSERT_EQ(run("simulate --config " + (dir_ / "run.cfg").string() + " --n_trajectories 5 " +
                "--output_dir " + (dir_ / "o").string()),
            0)
      << err_;
  const std::string summary = slurp(dir_ / "o" / "summary.csv");
  EXPECT_NE(summary.find("\r\n1,5,"), std::string::npos) << summary;
}

TEST_F(Cli, ConfigViolationIsOneJsonLineAndLeavesNoFiles) {
  const int code = run("simulate --model grw --seed 1 --lambda 1 --mu 4 --alpha 0.3 --output_dir " +
                       (dir_ / "bad").string());
  EXPECT_NE(code, 0);
  ASSERT_FALSE(err_.empty());
  EXPECT_EQ(err_.find('\n'), err_.size() - 1);
  const auto j = nlohmann::json::parse(err_);
  EXPECT_EQ(j["error"], "config-violation");
  EXPECT_FALSE(fs::exists(dir_ / "bad") && !fs::is_empty(dir_ / "bad"));
}

TEST_F(Cli, MissingSeedIsRejected) {
  EXPECT_NE(run("simulate --model diosi --lambda 1"), 0);
  EXPECT_EQ(nlohmann::json::parse(err_)["error"], "config-violation");
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  EXPECT_NE(run("simulate --colour red"), 0);
  EXPECT_EQ(nlohmann::json::parse(err_)["error"], "usage");
}

TEST_F(Cli, ExportToStdoutMatchesFile) {
  ASSERT_EQ(run(sim_args("a")), 0) << err_;
  const std::string archive = (dir_ / "a" / "trajectories.cldn").string();
  ASSERT_EQ(run("export --archive " + archive + " --time 0.5 --stride 2"), 0) << err_;
  const std::string piped = out_;
  ASSERT_EQ(run("export --archive " + archive + " --time 0.5 --stride 2 --output " +
                (dir_ / "d.csv").string()),
            0)
      << err_;
  EXPECT_EQ(piped, slurp(dir_ / "d.csv"));
  EXPECT_EQ(piped.substr(0, 14), "x,density,se\r\n");
}

TEST_F(Cli, ExportUnsampledTimeFails) {
  ASSERT_EQ(run(sim_args("a")), 0) << err_;
  EXPECT_NE(run("export --archive " + (dir_ / "a" / "trajectories.cldn").string() + " --time 0.3"),
            0);
  EXPECT_EQ(nlohmann::json::parse(err_)["error"], "schedule-mismatch");
}

TEST_F(Cli, CorruptArchiveFailsClosed) {
  ASSERT_EQ(run(sim_args("a")), 0) << err_;
  const fs::path p = dir_ / "a" / "trajectories.cldn";
  std::string bytes = slurp(p);
  bytes[30] = static_cast<char>(bytes[30] ^ 1);
  std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_NE(run("export --archive " + p.string() + " --time 0.5"), 0);
  EXPECT_EQ(nlohmann::json::parse(err_)["error"], "archive-corrupt");
}

TEST_F(Cli, VerifyWritesReport) {
  ASSERT_EQ(run("verify --config " COLLAPSE_CONFIG_DIR "/default.cfg --criteria 5,7 --scale 0.1 "
                "--output_dir " + (dir_ / "v").string()),
            0)
      << err_ << out_;
  const auto j = nlohmann::json::parse(slurp(dir_ / "v" / "report.json"));
  EXPECT_EQ(j["all_pass"], true);
  EXPECT_EQ(j["criteria"].size(), 2u);
  EXPECT_NE(out_.find("criterion 7: PASS"), std::string::npos);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

}  // namespace
