#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "corrlab/cli.hpp"
#include "corrlab/json_io.hpp"

namespace corrlab::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("corrlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int invoke(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }
  std::string write_config(const std::string& name, const std::string& text) const {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }
  Json report(const std::string& experiment) const {
    std::ifstream in(dir_ / (experiment + ".json"));
    return Json::parse(in);
  }
  std::vector<std::string> csv_lines(const std::string& experiment) const {
    std::ifstream in(dir_ / (experiment + ".csv"));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, NormSweepPasses) {
  EXPECT_EQ(invoke({"lemma1", "--trials", "10000", "--seed", "7", "--out", dir_.string()}), kExitPass);
  const auto r = report("lemma1");
  EXPECT_TRUE(r["passed"].get<bool>());
  EXPECT_EQ(r["seed"], 7);
  EXPECT_EQ(r["config"]["trials"], 10000);
  EXPECT_EQ(csv_lines("lemma1").size(), 10001u);
}

TEST_F(CliTest, BoxScanWritesMarginTable) {
  EXPECT_EQ(invoke({"pitt2d", "--grid", "41", "--out", dir_.string()}), kExitPass);
  const auto lines = csv_lines("pitt2d");
  ASSERT_EQ(lines.size(), 42u);
  EXPECT_EQ(lines[0], "rho,P,P_indep,margin");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double margin = std::stod(lines[i].substr(lines[i].rfind(',') + 1));
    EXPECT_GE(margin, -1e-10) << lines[i];
  }
  EXPECT_EQ(report("pitt2d")["results"]["argmin_rho"], 0.0);
}

TEST_F(CliTest, MissingConfigIsUsageError) {
  EXPECT_EQ(invoke({"theorem1-exact", "--config", (dir_ / "missing.json").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("missing.json"), std::string::npos);
}

TEST_F(CliTest, SchemaViolationsNameTheField) {
  const auto unknown = write_config("unknown.json", R"({"seed": 1, "colour": "red"})");
  EXPECT_EQ(invoke({"hessian", "--config", unknown}), kExitUsage);
  EXPECT_NE(err_.str().find("/colour"), std::string::npos) << err_.str();

  const auto nested = write_config("nested.json", R"({"F": {"kind": "box", "half_widths": [1, "x"]}})");
  EXPECT_EQ(invoke({"hessian", "--config", nested}), kExitUsage);
  EXPECT_NE(err_.str().find("/F/half_widths/1"), std::string::npos) << err_.str();

  const auto wrong = write_config("wrong.json", R"({"experiment": "pitt2d"})");
  EXPECT_EQ(invoke({"hessian", "--config", wrong}), kExitUsage);

  const auto bad_json = write_config("bad.json", "{ not json");
  EXPECT_EQ(invoke({"hessian", "--config", bad_json}), kExitUsage);

  EXPECT_EQ(invoke({"hessian", "--no-such-flag"}), kExitUsage);
  EXPECT_EQ(invoke({}), kExitUsage);
  EXPECT_EQ(invoke({"--help"}), kExitPass);
}

TEST_F(CliTest, FlagsOverrideConfigAndConfigIsEchoed) {
  const auto cfg = write_config("cfg.json", R"({"seed": 3, "grid": 11, "half_width": 0.8})");
  EXPECT_EQ(invoke({"pitt2d", "--config", cfg, "--seed", "9", "--out", dir_.string()}), kExitPass);
  const auto r = report("pitt2d");
  EXPECT_EQ(r["config"]["seed"], 9);
  EXPECT_EQ(r["config"]["grid"], 11);
  EXPECT_EQ(r["config"]["half_width"], 0.8);
  EXPECT_EQ(r["config_hash"], hex(config_hash(r["config"])));
}

TEST_F(CliTest, ConfigHashIgnoresWorkersAndOut) {
  auto a = effective_config("marginal", Json::object());
  auto b = a;
  b["workers"] = 7;
  b["out"] = "/elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b["seed"] = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST_F(CliTest, FailedCheckReplaysBitExactly) {
  // A negative tolerance makes the lemma1 checks fail on purpose.
  EXPECT_EQ(invoke({"lemma1", "--trials", "300", "--tolerance", "-1", "--out", dir_.string()}), kExitCheckFailed);
  const auto r = report("lemma1");
  EXPECT_FALSE(r["passed"].get<bool>());
  ASSERT_TRUE(r.contains("failures"));
  EXPECT_EQ(r["failures"][0]["seed"], r["seed"]);
  EXPECT_EQ(r["failures"][0]["config_hash"], r["config_hash"]);
  const auto path = (dir_ / "lemma1.json").string();
  for (const char* workers : {"1", "3"}) {
    EXPECT_EQ(invoke({"replay", "--report", path, "--workers", workers}), kExitPass) << out_.str();
    EXPECT_NE(out_.str().find("bit-identical"), std::string::npos);
  }
}

TEST_F(CliTest, ReplayDetectsTampering) {
  EXPECT_EQ(invoke({"pitt2d", "--grid", "5", "--out", dir_.string()}), kExitPass);
  auto r = report("pitt2d");
  r["results"]["min_margin"] = 123.0;
  const auto edited = write_config("edited.json", r.dump());
  EXPECT_EQ(invoke({"replay", "--report", edited}), kExitCheckFailed);
  r["config"]["grid"] = 7;
  const auto rehashed = write_config("rehashed.json", r.dump());
  EXPECT_EQ(invoke({"replay", "--report", rehashed}), kExitUsage);
}

TEST_F(CliTest, ExactGapInlineFixture) {
  const auto cfg = write_config("t1.json", R"({
    "model": {"q": 1.0, "atoms": [{"w": 0.5, "v": [1, 0]}, {"w": 0.5, "v": [0.3, 1]}]},
    "functionals": {"xi": [[1, 0], [0.5, 0.5]]},
    "split": 1,
    "f": {"type": "cosine", "dim": 1, "terms": [{"mass": 1, "frequency": [0.7]}]},
    "g": {"type": "cosine", "dim": 1, "terms": [{"mass": 2, "frequency": [1.1]}]}})");
  EXPECT_EQ(invoke({"theorem1-exact", "--config", cfg, "--out", dir_.string()}), kExitPass) << err_.str();
  EXPECT_EQ(report("theorem1-exact")["results"]["fixtures"], 1);

  const auto bad = write_config("t1bad.json", R"({
    "model": {"q": 1.0, "atoms": [{"w": 1, "v": [1, 0]}]},
    "functionals": {"xi": [[1, 0], [0, 1]]}, "split": 1,
    "f": {"type": "product", "components": [{"kind": "triangle"}]},
    "g": {"type": "cosine", "dim": 1, "terms": [{"mass": 1, "frequency": [1]}]}})");
  EXPECT_EQ(invoke({"theorem1-exact", "--config", bad}), kExitUsage);
  EXPECT_NE(err_.str().find("/f"), std::string::npos);

  const auto partial = write_config("t1partial.json", R"({"split": 1})");
  EXPECT_EQ(invoke({"theorem1-exact", "--config", partial}), kExitUsage);
}

TEST_F(CliTest, SmallRunsOfEveryExperiment) {
  const std::vector<std::vector<std::string>> runs = {
      {"theorem1-exact", "--trials", "20"},
      {"theorem1-mc", "--samples", "5000"},
      {"hessian", "--samples", "50000"},
      {"fd-check", "--samples", "50000"},
      {"marginal", "--samples", "20000", "--grid", "9"},
      {"probe-min", "--samples", "5000", "--steps", "4", "--restarts", "2"},
  };
  for (auto args : runs) {
    args.push_back("--out");
    args.push_back(dir_.string());
    const int rc = invoke(args);
    EXPECT_TRUE(rc == kExitPass || rc == kExitCheckFailed) << args[0] << ": " << err_.str();
    const auto r = report(args[0]);
    EXPECT_EQ(r["experiment"], args[0]);
    EXPECT_EQ(r["passed"].get<bool>(), rc == kExitPass);
    EXPECT_FALSE(csv_lines(args[0]).empty());
  }
  // The limit check is taken at the largest lambda, so stopping at 0.5 must fail it.
  EXPECT_EQ(invoke({"lambda-limit", "--samples", "20000", "--lambdas", "0", "0.5", "--out", dir_.string()}),
            kExitCheckFailed);
  EXPECT_TRUE(report("lambda-limit")["results"]["factorization_ok"].get<bool>());
  EXPECT_EQ(csv_lines("lambda-limit")[0], "lambda,estimate,se");
  EXPECT_EQ(invoke({"lambda-limit", "--lambdas", "0", "1.0", "--out", dir_.string()}), kExitUsage);
}

TEST_F(CliTest, ExperimentList) {
  const auto names = experiments();
  EXPECT_EQ(names.size(), 9u);
  for (const auto& n : names) EXPECT_NO_THROW(effective_config(n, Json::object()));
  EXPECT_THROW(effective_config("nope", Json::object()), ConfigError);
}

}  // namespace
}  // namespace corrlab::cli
