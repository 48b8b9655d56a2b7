#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qndepp_cli/commands.hpp"
#include "qndepp_cli/config.hpp"

namespace fs = std::filesystem;
using namespace qndepp::cli;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qndepp_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

int run(const std::string& cmd, RunConfig c, const fs::path& out) {
  c.out = out.string();
  std::ostringstream o, e;
  return run_command(cmd, c, o, e);
}

}  // namespace

TEST(Units, FrequenciesAndTimes) {
  EXPECT_NEAR(parse_frequency("300 MHz"), 2 * std::numbers::pi * 3e8, 1e-3);
  EXPECT_NEAR(parse_frequency("1e9 rad/s"), 1e9, 1e-6);
  EXPECT_NEAR(parse_time("10 ns"), 1e-8, 1e-22);
  EXPECT_NEAR(parse_time("20 us"), 2e-5, 1e-19);
  EXPECT_THROW(parse_frequency("300"), std::invalid_argument);
  EXPECT_THROW(parse_time("10 parsecs"), std::invalid_argument);
}

TEST(Config, ReferenceFileMatchesBuiltInDefaults) {
  const auto c = load_config(std::string(QNDEPP_TEST_DATA_DIR) + "/reference.yaml");
  const auto ref = qndepp::kerr::KerrSystemParams::reference();
  EXPECT_NEAR(c.circuit.g1, ref.g1, 1e-6);
  EXPECT_NEAR(c.circuit.kappa2, ref.kappa2, 1e-6);
  EXPECT_FALSE(c.alpha.has_value());
}

TEST(Config, EveryBadFieldIsReported) {
  try {
    load_config(std::string(QNDEPP_TEST_DATA_DIR) + "/bad_config.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    for (const char* field : {"kappa2_inv", "'f'", "rule_set", "unknown_key"}) {
      EXPECT_NE(what.find(field), std::string::npos) << field << " not named in: " << what;
    }
    EXPECT_GE(e.issues().size(), 4u);
  }
}

TEST(Config, ConflictingRateKeysAreRejected) {
  EXPECT_THROW(parse_config_text("kappa1: \"5e4 1/s\"\nkappa1_inv: \"20 us\"\n"), ConfigError);
  EXPECT_THROW(parse_config_text("g1: \"300 bananas\"\n"), ConfigError);
  EXPECT_THROW(parse_config_text("- a\n- b\n"), ConfigError);
}

TEST(Manifest, RoundTripsThroughTheParser) {
  RunConfig c;
  c.f = 0.73;
  c.alpha = 21.5;
  c.trials = 1234;
  c.seed = 99;
  c.rule_set = qndepp::protocol::RuleSet::weak_kerr;
  c.sweep_kappa2_inv = {3e-9, 7e-9};
  const auto text = to_manifest(c, "purify");
  const auto back = parse_config_text(text);
  EXPECT_EQ(to_manifest(back, "purify"), text);
  EXPECT_EQ(back.circuit.g1, c.circuit.g1);
  EXPECT_EQ(back.circuit.kappa1, c.circuit.kappa1);
  EXPECT_EQ(back.f, 0.73);
  EXPECT_EQ(*back.alpha, 21.5);
}

TEST(Commands, WrittenManifestReproducesTheRun) {
  RunConfig c;
  c.trials = 5000;
  c.alpha = 24.7;
  const auto first = scratch("manifest_a");
  ASSERT_EQ(run("purify", c, first), 0);
  auto again = load_config((first / "manifest.yaml").string());
  const auto second = scratch("manifest_b");
  ASSERT_EQ(run("purify", again, second), 0);
  EXPECT_EQ(slurp(first / "round_summary.csv"), slurp(second / "round_summary.csv"));
  EXPECT_EQ(slurp(first / "branch_ledger.csv"), slurp(second / "branch_ledger.csv"));
}

TEST(Commands, SameSeedGivesByteIdenticalOutputs) {
  RunConfig c;
  c.trials = 20000;
  c.seed = 4242;
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  ASSERT_EQ(run("homodyne-sim", c, a), 0);
  ASSERT_EQ(run("homodyne-sim", c, b), 0);
  EXPECT_EQ(slurp(a / "homodyne_trials.csv"), slurp(b / "homodyne_trials.csv"));
  EXPECT_EQ(slurp(a / "homodyne_confusion.csv"), slurp(b / "homodyne_confusion.csv"));

  c.alpha = 20.0;
  ASSERT_EQ(run("purify", c, a), 0);
  ASSERT_EQ(run("purify", c, b), 0);
  EXPECT_EQ(slurp(a / "round_summary.csv"), slurp(b / "round_summary.csv"));
}

TEST(Commands, EverySubcommandProducesItsFiles) {
  RunConfig c;
  c.sweep_kappa1_inv = {5e-6, 20e-6};
  c.sweep_kappa2_inv = {10e-9};
  c.trials = 1000;
  const std::map<std::string, std::vector<std::string>> files{
      {"phase-table", {"phase_table.csv", "polarization_table.csv", "level_table.csv"}},
      {"alpha-threshold", {"alpha_threshold.csv", "alpha_sweep.csv"}},
      {"purify", {"branch_ledger.csv", "round_summary.csv"}},
      {"pdc", {"pdc_branches.csv", "pdc_summary.csv"}},
      {"dissipation-sweep", {"fig4_kappa1_sweep.csv", "fig5_kappa2_sweep.csv"}},
      {"homodyne-sim", {"homodyne_trials.csv", "homodyne_confusion.csv"}},
  };
  ASSERT_EQ(command_names().size(), files.size());
  for (const auto& [cmd, expected] : files) {
    const auto dir = scratch("all_" + cmd);
    ASSERT_EQ(run(cmd, c, dir), 0) << cmd;
    for (const auto& f : expected) EXPECT_TRUE(fs::exists(dir / f)) << cmd << " " << f;
    EXPECT_TRUE(fs::exists(dir / "manifest.yaml")) << cmd;
  }
}

TEST(Commands, PdcSummaryReportsKeptWeights) {
  const auto dir = scratch("pdc");
  ASSERT_EQ(run("pdc", RunConfig{}, dir), 0);
  const auto s = slurp(dir / "pdc_summary.csv");
  EXPECT_NE(s.find("pairs=2,errors=1,0\n"), std::string::npos) << s;
  EXPECT_NE(s.find("pairs=2,errors=2,0.4\n"), std::string::npos) << s;
}
