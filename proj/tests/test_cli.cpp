#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "amen/experiment.hpp"
#include "json.hpp"

namespace amen {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("amen_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the tool; stdout and stderr land in files under the test directory.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(AMEN_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout").string() + " 2>" + (dir_ / "stderr").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string out() const { return slurp(dir_ / "stdout"); }
  std::string err() const { return slurp(dir_ / "stderr"); }

  fs::path config(const std::string& name, json cfg) {
    if (!cfg.contains("output")) cfg["output"] = (dir_ / (name + "_out")).string();
    const auto p = dir_ / (name + ".json");
    spit(p, cfg.dump(2));
    return p;
  }

  fs::path dir_;
};

json covering_config() {
  return {{"kind", "covering"},
          {"group", {{"family", "zd"}, {"dim", 2}}},
          {"covering", {{"instances", 100}, {"M", 1}, {"N", 4}, {"set_size", 20}, {"radius", 6}}}};
}

json ids_config() {
  return {{"kind", "ids"},
          {"group", {{"family", "zd"}, {"dim", 2}}},
          {"ids", {{"kernel", "anderson"}, {"ns", {4, 8, 12}}, {"seeds", {1, 2}}}}};
}

json tiling_config() {
  return {{"kind", "tiling"},
          {"tiling", {{"epsilon", 0.25}, {"beta", 0.01}, {"zeta", 0.01}, {"target", 3000}, {"basis", {2, 4, 8, 16, 32}}}}};
}

TEST_F(CliTest, CoveringReportsAllPasses) {
  const auto cfg = config("cov", covering_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto summary = json::parse(slurp(dir_ / "cov_out" / "summary.json"));
  EXPECT_EQ(summary["diagnostics"]["postcondition_passes"], "100/100");
  EXPECT_TRUE(summary["all_pass"].get<bool>());
  const auto table = parse_csv(slurp(dir_ / "cov_out" / "results.csv"));
  EXPECT_EQ(table.rows.size(), 100u);
}

TEST_F(CliTest, InvalidEpsilonNamesThePath) {
  auto c = tiling_config();
  c["tiling"]["epsilon"] = 1.5;
  EXPECT_EQ(run("run " + config("bad", c).string()), 2);
  EXPECT_NE(err().find("tiling.epsilon"), std::string::npos) << err();
}

TEST_F(CliTest, UnknownKeysAndTypesAreRejected) {
  auto c = covering_config();
  c["covering"]["instnaces"] = 3;
  EXPECT_EQ(run("run " + config("typo", c).string()), 2);
  EXPECT_NE(err().find("covering.instnaces"), std::string::npos) << err();

  auto d = covering_config();
  d["covering"]["instances"] = "many";
  EXPECT_EQ(run("run " + config("type", d).string()), 2);
  EXPECT_NE(err().find("covering.instances"), std::string::npos) << err();

  EXPECT_EQ(run("run " + config("nokind", json{{"covering", json::object()}}).string()), 2);
  EXPECT_NE(err().find("kind"), std::string::npos);
}

TEST_F(CliTest, ManifestRecordsDefaultsAndOutputs) {
  const auto cfg = config("ids", ids_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto out_dir = dir_ / "ids_out";
  const auto m = json::parse(slurp(out_dir / "manifest.json"));
  for (const auto& f : m["outputs"]) EXPECT_TRUE(fs::exists(out_dir / f.get<std::string>())) << f;
  const auto defaults = m["defaults"].get<std::vector<std::string>>();
  for (const char* p : {"cache", "ids.cap", "ids.lo", "ids.cross_norm", "ids.cross_norm.mode", "ids.limit.samples"})
    EXPECT_NE(std::find(defaults.begin(), defaults.end(), p), defaults.end()) << p;
  EXPECT_EQ(m["config"]["ids"]["cross_norm"]["mode"], "lp");
  EXPECT_EQ(m["config"]["ids"]["cap"], 3600);
  EXPECT_EQ(m["version"], kToolVersion);
}

TEST_F(CliTest, IdenticalRerunReusesTheCache) {
  const auto cfg = config("ids", ids_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto first = slurp(dir_ / "ids_out" / "results.csv");
  EXPECT_FALSE(json::parse(slurp(dir_ / "ids_out" / "manifest.json"))["cache"]["full_reuse"].get<bool>());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto m = json::parse(slurp(dir_ / "ids_out" / "manifest.json"));
  EXPECT_TRUE(m["cache"]["full_reuse"].get<bool>());
  EXPECT_EQ(m["cache"]["hits"], 1);
  EXPECT_EQ(slurp(dir_ / "ids_out" / "results.csv"), first);
}

TEST_F(CliTest, CorruptCacheIsRecomputed) {
  const auto cfg = config("cov", covering_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto first = slurp(dir_ / "cov_out" / "results.csv");
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "cov_out" / ".cache"))
    if (e.path().filename() == "results.csv") spit(e.path(), "tampered\n");
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  EXPECT_NE(err().find("corrupt"), std::string::npos) << err();
  EXPECT_FALSE(json::parse(slurp(dir_ / "cov_out" / "manifest.json"))["cache"]["full_reuse"].get<bool>());
  EXPECT_EQ(slurp(dir_ / "cov_out" / "results.csv"), first);
}

TEST_F(CliTest, WorkerCountDoesNotChangeOutputs) {
  auto c = covering_config();
  c["cache"] = false;
  c["output"] = (dir_ / "one").string();
  ASSERT_EQ(run("run " + config("w1", c).string(), "AMEN_WORKERS=1"), 0) << err();
  c["output"] = (dir_ / "four").string();
  ASSERT_EQ(run("run " + config("w4", c).string(), "AMEN_WORKERS=4"), 0) << err();
  EXPECT_EQ(slurp(dir_ / "one" / "results.csv"), slurp(dir_ / "four" / "results.csv"));
  EXPECT_EQ(slurp(dir_ / "one" / "summary.json"), slurp(dir_ / "four" / "summary.json"));
  EXPECT_EQ(run("run " + config("w0", c).string(), "AMEN_WORKERS=zero"), 2);
}

TEST_F(CliTest, PlotdataPivotsSeries) {
  const auto cfg = config("ids", ids_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto results = dir_ / "ids_out" / "results.csv";
  ASSERT_EQ(run("plotdata " + results.string() + " '{\"x\":\"n\",\"y\":\"dist_prev\",\"series\":\"seed\"}'"), 0)
      << err();
  std::istringstream tsv(out());
  std::string line;
  std::getline(tsv, line);
  EXPECT_EQ(line, "n\tseed=1\tseed=2");
  int rows = 0;
  while (std::getline(tsv, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, PlotdataForTilingStages) {
  const auto cfg = config("til", tiling_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto spec = dir_ / "spec.json";
  spit(spec, R"({"x": "stage", "y": ["density", "eta", "beta"]})");
  ASSERT_EQ(run("plotdata " + (dir_ / "til_out" / "results.csv").string() + " " + spec.string()), 0) << err();
  std::istringstream tsv(out());
  std::string line;
  std::getline(tsv, line);
  EXPECT_EQ(line, "stage\tdensity\teta\tbeta");
  int rows = 0;
  while (std::getline(tsv, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST_F(CliTest, PlotdataEdgeCases) {
  const auto empty = dir_ / "empty.csv";
  spit(empty, "n,seed,dist_prev\n");
  ASSERT_EQ(run("plotdata " + empty.string() + " '{\"x\":\"n\",\"y\":\"dist_prev\"}'"), 0) << err();
  EXPECT_EQ(out(), "n\tdist_prev\n");
  EXPECT_EQ(run("plotdata " + empty.string() + " '{\"x\":\"n\",\"y\":\"sup_distance\"}'"), 2);
  EXPECT_NE(err().find("sup_distance"), std::string::npos) << err();
  EXPECT_EQ(run("plotdata " + (dir_ / "missing.csv").string() + " '{\"x\":\"n\",\"y\":\"m\"}'"), 2);
}

TEST_F(CliTest, VerifyRechecksSavedTiling) {
  const auto cfg = config("til", tiling_config());
  ASSERT_EQ(run("run " + cfg.string()), 0) << err();
  const auto saved = dir_ / "til_out" / "tiling.json";
  EXPECT_EQ(run("verify " + saved.string()), 0) << out() << err();
  EXPECT_NE(out().find("PASS containment"), std::string::npos) << out();
  // Move one top-stage center far outside the target.
  auto j = json::parse(slurp(saved));
  j["centers"][4][0][0] = 1000000;
  const auto bad = dir_ / "bad.json";
  spit(bad, j.dump());
  EXPECT_EQ(run("verify " + bad.string()), 1) << out();
  EXPECT_NE(out().find("FAIL"), std::string::npos);
  spit(dir_ / "junk.json", "{not json");
  EXPECT_EQ(run("verify " + (dir_ / "junk.json").string()), 2);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("run"), 2);
  EXPECT_EQ(run("run " + (dir_ / "nope.json").string()), 2);
}

TEST(Csv, QuotingRoundTrips) {
  const std::vector<std::string> fields = {"plain", "a,b", "say \"hi\"", "two\nlines", ""};
  std::string text = "h1,h2,h3,h4,h5\n";
  for (size_t i = 0; i < fields.size(); ++i) text += (i ? "," : "") + csv_quote(fields[i]);
  text += "\n";
  const auto t = parse_csv(text);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], fields);
  EXPECT_THROW(parse_csv("a,b\n1\n"), std::runtime_error);
}

TEST(Csv, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) EXPECT_EQ(std::stod(format_number(x)), x);
  EXPECT_EQ(format_number(1.0), "1");
}

TEST(Config, DefaultsAreRecorded) {
  const auto cfg = parse_config(json{{"kind", "covering"}});
  EXPECT_EQ(cfg.resolved["covering"]["instances"], 100);
  EXPECT_EQ(cfg.resolved["group"]["family"], "zd");
  EXPECT_NE(std::find(cfg.defaulted.begin(), cfg.defaulted.end(), "covering.instances"), cfg.defaulted.end());
  EXPECT_THROW(parse_config(json{{"kind", "tiling"}, {"tiling", {{"basis", {1, 2}}}}}), ConfigError);
  try {
    parse_config(json{{"kind", "process"}, {"process", {{"samples", 10}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path, "process.samples");
  }
}

}  // namespace
}  // namespace amen
