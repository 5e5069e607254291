#include <gtest/gtest.h>

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "percept/json_util.hpp"

using namespace percept;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("percept_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Outcome run_cli(const std::string& args, const std::string& env = {}) {
  const auto out = work_dir() / "stdout.txt";
  const auto err = work_dir() / "stderr.txt";
  const std::string cmd = "cd '" + work_dir().string() + "' && " + env + " '" + PERCEPT_CLI + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = read_text_file(out.string());
  o.err = read_text_file(err.string());
  return o;
}

std::string write_config(const std::string& name, const std::string& text) {
  const auto p = work_dir() / name;
  write_text_file(p.string(), text);
  return p.string();
}

}  // namespace

TEST(Cli, ScenarioList) {
  const auto o = run_cli("scenario list");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 6);
  EXPECT_NE(o.out.find("Sc-05  LC to the Right - In front of the Lead Car (Straight Road)"), std::string::npos);
}

TEST(Cli, ScenarioShowAndUnknown) {
  const auto o = run_cli("scenario show Sc-03");
  ASSERT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("\"lane_change_right\""), std::string::npos);
  const auto bad = run_cli("scenario show Sc-99");
  EXPECT_EQ(bad.code, 1);
  const auto err = nlohmann::json::parse(bad.err);
  EXPECT_EQ(err["error"]["type"], "invalid_argument");
  EXPECT_NE(err["error"]["message"].get<std::string>().find("Sc-01"), std::string::npos);
}

TEST(Cli, ScenarioExportRoundTrip) {
  const auto path = (work_dir() / "sc02.json").string();
  ASSERT_EQ(run_cli("scenario export Sc-02 '" + path + "'").code, 0);
  const auto cfg = write_config("run_custom.json", R"({"version":1,"scenario":)" + read_text_file(path) +
                                                       R"(,"prediction_times_s":[4.0],"test_id":"custom"})");
  const auto o = run_cli("run --config '" + cfg + "' --out-dir out_custom");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(work_dir() / "out_custom" / "runs" / "custom" / "result.json"));
}

TEST(Cli, ScenarioExportToUnwritablePathFails) {
  // A regular file as parent directory is unwritable even for root.
  write_text_file((work_dir() / "plain_file").string(), "x");
  const auto o = run_cli("scenario export Sc-01 '" + (work_dir() / "plain_file" / "x.json").string() + "'");
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(nlohmann::json::parse(o.err)["error"]["type"], "io_error");

  if (::geteuid() == 0) return;  // root ignores directory permissions
  const auto ro = work_dir() / "readonly";
  fs::create_directories(ro);
  ::chmod(ro.c_str(), 0555);
  const auto o2 = run_cli("scenario export Sc-01 '" + (ro / "x.json").string() + "'");
  ::chmod(ro.c_str(), 0755);
  EXPECT_EQ(o2.code, 1);
  EXPECT_EQ(nlohmann::json::parse(o2.err)["error"]["type"], "io_error");
}

TEST(Cli, ExportIntoMissingDirectoryFails) {
  const auto o = run_cli("scenario export Sc-01 '" + (work_dir() / "no" / "such" / "dir" / "x.json").string() + "'");
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(nlohmann::json::parse(o.err)["error"]["type"], "io_error");
}

TEST(Cli, RunWritesArtifactsUnderOutDir) {
  const auto o = run_cli("run --scenario Sc-01 --sensor radar --hfov-deg 30 --predictor cv --out-dir out_run");
  ASSERT_EQ(o.code, 0) << o.err;
  const auto dir = work_dir() / "out_run" / "runs" / "LC01_RelV5_30";
  for (const char* f : {"result.json", "scenario.json", "ground_truth.csv", "detections.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_NE(o.out.find("status:     ok"), std::string::npos);
}

TEST(Cli, OutDirPrecedence) {
  const auto cfg = write_config("run_out.json", R"({"version":1,"prediction_times_s":[4.0],"out_dir":"from_config"})");
  ASSERT_EQ(run_cli("run --config '" + cfg + "'", "PERCEPT_SWEEP_OUT=from_env").code, 0);
  EXPECT_TRUE(fs::exists(work_dir() / "from_config" / "runs" / "LC01_RelV5_30"));
  const auto plain = write_config("run_plain.json", R"({"version":1,"prediction_times_s":[4.0]})");
  ASSERT_EQ(run_cli("run --config '" + plain + "'", "PERCEPT_SWEEP_OUT=from_env").code, 0);
  EXPECT_TRUE(fs::exists(work_dir() / "from_env" / "runs" / "LC01_RelV5_30"));
  ASSERT_EQ(run_cli("run --config '" + plain + "'", "PERCEPT_SWEEP_OUT=").code, 0);
  EXPECT_TRUE(fs::exists(work_dir() / "percept_out" / "runs" / "LC01_RelV5_30"));
}

TEST(Cli, FlagOverridingConfigWarns) {
  const auto cfg = write_config("run_warn.json",
                                R"({"version":1,"predictor":"ca","sensor":{"hfov_deg":60},"prediction_times_s":[4.0]})");
  const auto o = run_cli("run --config '" + cfg + "' --predictor cv --hfov-deg 45 --out-dir out_warn");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.err.find("--predictor overrides the config file value"), std::string::npos);
  EXPECT_NE(o.err.find("--hfov-deg overrides the config file value"), std::string::npos);
  const auto r = read_json_file((work_dir() / "out_warn" / "runs" / "LC01_RelV5_45" / "result.json").string());
  EXPECT_EQ(r["predictor"], "cv");
}

TEST(Cli, ConfigErrorsNameTheKeyOrPosition) {
  const auto unknown = write_config("bad_key.json", R"({"version":1,"sensor":{"hfov_deg":30,"zoom":3}})");
  const auto o1 = run_cli("run --config '" + unknown + "'");
  EXPECT_EQ(o1.code, 1);
  const auto e1 = nlohmann::json::parse(o1.err);
  EXPECT_EQ(e1["error"]["type"], "config_error");
  EXPECT_NE(e1["error"]["message"].get<std::string>().find("config.sensor.zoom"), std::string::npos);

  const auto broken = write_config("broken.json", "{\n  \"version\": 1,\n  \"predictor\": cv\n}\n");
  const auto o2 = run_cli("run --config '" + broken + "'");
  EXPECT_EQ(o2.code, 1);
  EXPECT_NE(nlohmann::json::parse(o2.err)["error"]["message"].get<std::string>().find("line 3"), std::string::npos);

  const auto version = write_config("version.json", R"({"version":2})");
  EXPECT_EQ(run_cli("run --config '" + version + "'").code, 1);

  const auto missing = run_cli("run --config '" + (work_dir() / "nope.json").string() + "'");
  EXPECT_EQ(missing.code, 1);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("run --sensor lidar").code, 2);
  EXPECT_EQ(run_cli("report").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST(Cli, SweepThenReport) {
  const auto cfg = write_config("sweep.json", R"({"version":1,"name":"mini","base":{"prediction_times_s":[4.0,8.0]},
    "scenarios":["Sc-05"],"modalities":["radar","camera"],"values":[30,120],"replications":1,"parallel":2})");
  const auto o = run_cli("sweep --config '" + cfg + "' --out-dir out_sweep");
  ASSERT_EQ(o.code, 0) << o.err;
  const auto dir = work_dir() / "out_sweep" / "sweep" / "mini";
  EXPECT_NE(o.out.find("selection:"), std::string::npos);
  const auto csv = read_text_file((dir / "metrics.csv").string());
  fs::remove(dir / "metrics.csv");
  ASSERT_EQ(run_cli("report --sweep '" + dir.string() + "' --format csv").code, 0);
  EXPECT_EQ(read_text_file((dir / "metrics.csv").string()), csv);
  ASSERT_EQ(run_cli("report --sweep '" + dir.string() + "' --format json").code, 0);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Cli, ReportOnMissingDirectory) {
  const auto o = run_cli("report --sweep '" + (work_dir() / "missing").string() + "'");
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(nlohmann::json::parse(o.err)["error"]["type"], "not_found");
}
