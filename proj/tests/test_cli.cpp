#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("nicis-cli-" + std::to_string(::getpid()) + "-" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Exit status of `nicis <args>`; stdout and stderr land in log_.
  int run(const std::string& args, const std::string& env = "") {
    log_path_ = root_ / "cli.log";
    const std::string cmd = env + " \"" NICIS_CLI_PATH "\" " + args + " > \"" + log_path_.string() + "\" 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }
  std::string out_flag() const { return "--out \"" + root_.string() + "\""; }
  std::string log() const { return slurp(log_path_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path root_, log_path_;
};

}  // namespace

TEST_F(Cli, ContinuedFractionOfGoldenIsAllOnes) {
  ASSERT_EQ(run(out_flag() + " --run-name g cf --alpha golden --depth 8"), 0) << log();
  const std::string csv = slurp(root_ / "g" / "convergents.csv");
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "k,a_k,p_k,q_k\r");
  int rows = 0;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    EXPECT_EQ(line.substr(c1 + 1, c2 - c1 - 1), "1") << line;
    ++rows;
  }
  EXPECT_EQ(rows, 8);
  const auto j = Json::parse(slurp(root_ / "g" / "run.json"));
  EXPECT_EQ(j["command"], "cf");
  EXPECT_TRUE(j["checks_ok"].get<bool>());
}

TEST_F(Cli, LiouvilleWitness) {
  ASSERT_EQ(run(out_flag() + " --run-name w cf --alpha series:factorial10 --liouville-tau 3"), 0) << log();
  const auto j = Json::parse(slurp(root_ / "w" / "run.json"));
  EXPECT_NE(j["results"].dump().find("1000000"), std::string::npos) << j.dump();
}

TEST_F(Cli, InvalidAlphaIsUsageError) {
  EXPECT_EQ(run(out_flag() + " cf --alpha bogus"), 2);
  EXPECT_EQ(run(out_flag() + " nosuchcommand"), 2);
  EXPECT_EQ(run(out_flag()), 2);
}

TEST_F(Cli, DenjoyKoksmaCsvDecreases) {
  ASSERT_EQ(run(out_flag() + " --run-name dk skew --alpha golden dk --terms 6 --grid 65536"), 0) << log();
  std::stringstream ss(slurp(root_ / "dk" / "dk.csv"));
  std::string line;
  std::getline(ss, line);
  std::vector<double> sup;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    sup.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  ASSERT_EQ(sup.size(), 6u);
  for (std::size_t i = 2; i < sup.size(); ++i) EXPECT_LT(sup[i], sup[i - 1]);
  EXPECT_TRUE(fs::exists(root_ / "dk" / "phi.json"));
}

TEST_F(Cli, ResidualsPass) { EXPECT_EQ(run(out_flag() + " skew --alpha golden residuals --samples 2000"), 0) << log(); }

TEST_F(Cli, SchemeWithZeroStages) {
  ASSERT_EQ(run(out_flag() + " --run-name s0 akc --alpha series:factorial10 --stages 0"), 0) << log();
  const auto j = Json::parse(slurp(root_ / "s0" / "scheme.json"));
  EXPECT_NEAR(j["f0_rotation"]["value"].get<double>(), 1.0 / 9, 1e-12);
}

TEST_F(Cli, GoldenSchemeIsInfeasible) {
  ASSERT_EQ(run(out_flag() + " --run-name gs akc --alpha golden --stages 3"), 0) << log();
  const auto j = Json::parse(slurp(root_ / "gs" / "scheme.json"));
  EXPECT_FALSE(j["feasible"].get<bool>());
  EXPECT_EQ(j["binding"], "(2.2)");
}

TEST_F(Cli, StageCapIsUsageError) { EXPECT_EQ(run(out_flag() + " akc --alpha golden --stages 5 --stage-cap 4"), 2) << log(); }

TEST_F(Cli, ReportMergesRuns) {
  ASSERT_EQ(run(out_flag() + " --run-name a cf --alpha golden"), 0);
  ASSERT_EQ(run(out_flag() + " --run-name b cf --alpha sqrt2-1"), 0);
  const fs::path manifest = root_ / "m.json";
  ASSERT_EQ(run(out_flag() + " report \"" + (root_ / "a").string() + "\" \"" + (root_ / "b").string() +
                "\" --manifest \"" + manifest.string() + "\""),
            0)
      << log();
  const auto j = Json::parse(slurp(manifest));
  ASSERT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["runs"][0]["command"], "cf");
  EXPECT_FALSE(j["runs"][1]["files"].empty());
}

TEST_F(Cli, ReportOfMissingDirectoryIsUsageError) {
  EXPECT_EQ(run(out_flag() + " report \"" + (root_ / "nope").string() + "\""), 2);
}

TEST_F(Cli, SameSeedGivesIdenticalFiles) {
  const std::string args = " coverage --n-values 3,6 --samples 20000";
  ASSERT_EQ(run(out_flag() + " --seed 5 --run-name c1 skew --alpha golden" + args), 0) << log();
  ASSERT_EQ(run(out_flag() + " --seed 5 --run-name c2 skew --alpha golden" + args), 0) << log();
  ASSERT_EQ(run(out_flag() + " --seed 6 --run-name c3 skew --alpha golden" + args), 0) << log();
  const std::string a = slurp(root_ / "c1" / "coverage.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(root_ / "c2" / "coverage.csv"));
  EXPECT_NE(a, slurp(root_ / "c3" / "coverage.csv"));
}

TEST_F(Cli, ConfigFileNeedsSeed) {
  const fs::path cfg = root_ / "bad.jsonc";
  std::ofstream(cfg) << "// no seed here\n{ \"alpha\": \"golden\" }\n";
  EXPECT_EQ(run(out_flag() + " --config \"" + cfg.string() + "\" cf"), 2) << log();
}

TEST_F(Cli, ConfigFileSuppliesSubcommandOptions) {
  const fs::path cfg = root_ / "orbit.jsonc";
  std::ofstream(cfg) << "{\n  \"seed\": 3, // mandatory\n  \"skew\": {\"alpha\": \"sqrt2-1\", \"orbit\": {\"steps\": 10}}\n}\n";
  ASSERT_EQ(run(out_flag() + " --config \"" + cfg.string() + "\" --run-name o skew orbit"), 0) << log();
  const auto j = Json::parse(slurp(root_ / "o" / "run.json"));
  EXPECT_EQ(j["config"]["alpha"], "sqrt2-1");
  EXPECT_EQ(j["config"]["steps"], "10");
  std::stringstream ss(slurp(root_ / "o" / "orbit.csv"));
  int lines = 0;
  for (std::string l; std::getline(ss, l);) lines += !l.empty();
  EXPECT_EQ(lines, 12);  // header, m = 0..10
}

TEST_F(Cli, OutputRootFromEnvironment) {
  ASSERT_EQ(run("--run-name e cf --alpha golden", "NICIS_OUTPUT_ROOT=\"" + root_.string() + "\""), 0) << log();
  EXPECT_TRUE(fs::exists(root_ / "e" / "run.json"));
}
