#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "aesa/harness.hpp"

using namespace aesa;
namespace fs = std::filesystem;

namespace {

std::string error_text(const std::string& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aesa_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AESA_CHAIN_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ModeNames) {
  for (Mode m : {Mode::t1, Mode::t2, Mode::t3, Mode::t4}) EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_THROW(parse_mode("t5"), ConfigError);
}

TEST(Config, DefaultsValidateAndRoundTrip) {
  for (Mode m : {Mode::t1, Mode::t2, Mode::t3, Mode::t4}) {
    const ExperimentConfig c = default_config(m);
    EXPECT_NO_THROW(validate_config(c)) << mode_name(m);
    const ExperimentConfig back = parse_config(serialize_config(c));
    EXPECT_TRUE(back == c) << mode_name(m);
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
  EXPECT_NE(config_hash(default_config(Mode::t1)), config_hash(default_config(Mode::t2)));
  EXPECT_EQ(config_hash(default_config(Mode::t1)).size(), 16u);
}

TEST(Config, PartialDocumentKeepsModeDefaults) {
  const auto c = parse_config(R"({"mode": "t2", "seed": 9, "processing": {"loading_db": 13}})");
  ExperimentConfig want = default_config(Mode::t2);
  want.seed = 9;
  want.processing.loading_db = 13.0;
  EXPECT_TRUE(c == want);
  // The override replaces the document's mode.
  EXPECT_EQ(parse_config(R"({"mode": "t2"})", Mode::t3).mode, Mode::t3);
  EXPECT_EQ(parse_config("{}", Mode::t4).mode, Mode::t4);
}

TEST(Config, UnknownKeysAreListed) {
  const std::string msg = error_text(R"({"mode": "t1", "bogus": 1, "radar": {"prf": 2000, "pfr": 1},
                                         "processing": {"cfar": {"pfa2": 0.1}}})");
  EXPECT_NE(msg.find("unknown keys"), std::string::npos);
  EXPECT_NE(msg.find("bogus"), std::string::npos);
  EXPECT_NE(msg.find("radar.pfr"), std::string::npos);
  EXPECT_NE(msg.find("processing.cfar.pfa2"), std::string::npos);
}

TEST(Config, TypeAndValueErrorsNameTheKey) {
  EXPECT_NE(error_text(R"({"mode": "t1", "seed": "abc"})").find("seed"), std::string::npos);
  EXPECT_NE(error_text(R"({"mode": "t1", "seed": -1})").find("seed"), std::string::npos);
  EXPECT_NE(error_text(R"({"mode": "t1", "radar": {"prf": "fast"}})").find("radar.prf"), std::string::npos);
  EXPECT_NE(error_text(R"({"mode": "t1", "processing": {"window": "kaiser"}})").find("processing.window"),
            std::string::npos);
  EXPECT_NE(error_text(R"({"mode": "t1", "targets": [{"range_m": 20000}]})").find("targets[0].range_m"),
            std::string::npos);
  EXPECT_FALSE(error_text(R"({"seed": 1})").empty());  // mode missing
  EXPECT_FALSE(error_text("[1, 2]").empty());
  EXPECT_FALSE(error_text("{").empty());
}

TEST(Config, ModeScenarioMismatchesAreRejected) {
  auto t4 = default_config(Mode::t4);
  t4.jammer.active = true;
  EXPECT_THROW(validate_config(t4), ConfigError);
  auto t2 = default_config(Mode::t2);
  t2.jammer.active = false;
  EXPECT_THROW(validate_config(t2), ConfigError);
  auto t1 = default_config(Mode::t1);
  t1.steering_deg = {30.0};
  EXPECT_THROW(validate_config(t1), ConfigError);
  t1 = default_config(Mode::t1);
  t1.targets.clear();
  EXPECT_THROW(validate_config(t1), ConfigError);
  auto t4b = default_config(Mode::t4);
  t4b.isar.body.rotation_rate = 0.0;
  EXPECT_THROW(validate_config(t4b), ConfigError);
  EXPECT_THROW(parse_config(R"({"mode": "t4", "jammer": {"active": true}})"), ConfigError);
}

TEST(Config, LoadResolvesGroundTruthNextToTheFile) {
  const auto dir = scratch("load");
  {
    std::ofstream(dir / "scenario.json") << R"({"mode": "t1", "ground_truth": "tracks.csv"})";
  }
  const auto c = load_config((dir / "scenario.json").string());
  EXPECT_EQ(fs::path(c.ground_truth), dir / "tracks.csv");
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST(Config, ShippedScenariosLoad) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(AESA_SCENARIO_DIR)) {
    if (e.path().extension() != ".json") continue;
    ++n;
    const ExperimentConfig c = load_config(e.path().string());
    EXPECT_NO_THROW(validate_config(c)) << e.path();
    if (!c.ground_truth.empty()) {
      EXPECT_FALSE(read_tracks_csv(c.ground_truth).empty());
    }
  }
  EXPECT_EQ(n, 4u);
}

TEST(Building, MergeKeepsStrongestNeighbour) {
  std::vector<Detection> d(3);
  d[0].range_bin = 10, d[0].column = 5, d[0].peak_power_db = 10;
  d[1].range_bin = 11, d[1].column = 6, d[1].peak_power_db = 20;
  d[2].range_bin = 40, d[2].column = 6, d[2].peak_power_db = 5;
  const auto m = merge_detections(d, 3);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].range_bin, 11u);
  EXPECT_EQ(m[1].range_bin, 40u);
}

TEST(Experiment, T1ReportIsDeterministicAndComplete) {
  auto cfg = default_config(Mode::t1);
  cfg.seed = 42;
  const auto a = run_experiment(cfg, {true, true});
  const auto b = run_experiment(cfg, {true, true});
  ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    EXPECT_EQ(a.artifacts[i].name, b.artifacts[i].name);
    EXPECT_TRUE(a.artifacts[i].bytes == b.artifacts[i].bytes) << a.artifacts[i].name;
  }
  EXPECT_EQ(a.artifacts.front().name, "summary.txt");
  EXPECT_EQ(a.artifacts.back().name, "config.json");
  for (const char* name : {"detections.csv", "doa.csv", "music_spectrum.csv", "geometry.csv", "raw_ch0.aesg",
                           "raw_ch5.aesg"}) {
    EXPECT_NE(a.find(name), nullptr) << name;
  }
  const std::string& summary = a.find("summary.txt")->bytes;
  EXPECT_NE(summary.find("config_hash = " + config_hash(cfg)), std::string::npos);
  EXPECT_NE(summary.find("seed = 42"), std::string::npos);
  EXPECT_EQ(std::count(a.find("geometry.csv")->bytes.begin(), a.find("geometry.csv")->bytes.end(), '\n'), 49);

  cfg.seed = 43;
  EXPECT_NE(run_experiment(cfg).find("doa.csv")->bytes, a.find("doa.csv")->bytes);
}

TEST(Experiment, WriteReportCreatesFiles) {
  const auto dir = scratch("write");
  const auto rep = run_experiment(default_config(Mode::t3));
  write_report(rep, (dir / "out").string());
  for (const auto& art : rep.artifacts) EXPECT_EQ(slurp(dir / "out" / art.name), art.bytes) << art.name;
  EXPECT_EQ(parse_config(slurp(dir / "out" / "config.json")), default_config(Mode::t3));
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string out = " --out " + (dir / "o").string();
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("run --mode t1 --seed 3" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "summary.txt"));
  EXPECT_EQ(run_cli("run --mode t9" + out), 2);
  EXPECT_EQ(run_cli("run --mode t1 --steer 40" + out), 2);
  EXPECT_EQ(run_cli("run --mode t2 --adaptive maybe" + out), 2);
  {
    std::ofstream(dir / "bad.json") << R"({"mode": "t1", "nonsense": true})";
    std::ofstream(dir / "jam.json") << R"({"mode": "t4", "jammer": {"active": true}})";
    // The body drifts 40 m over the sequence while the history window is +-2 bins.
    std::ofstream(dir / "drift.json")
        << R"({"mode": "t4", "isar": {"half_width": 2, "body": {"translational_velocity": 20}}})";
  }
  EXPECT_EQ(run_cli("run --scenario " + (dir / "bad.json").string() + out), 2);
  EXPECT_EQ(run_cli("run --scenario " + (dir / "jam.json").string() + out), 2);
  EXPECT_EQ(run_cli("run --scenario " + (dir / "drift.json").string() + out), 3);
  EXPECT_EQ(run_cli("run --scenario " + (dir / "absent.json").string() + out), 2);
  fs::remove_all(dir);
}
