#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "percept/evaluation.hpp"
#include "percept/json_util.hpp"

using namespace percept;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("percept_eval_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunSpec base_run(const std::string& scenario, Modality m) {
  RunSpec spec;
  spec.scenario = preset_scenario(scenario);
  spec.sensor = SensorConfig::defaults(m);
  spec.test_id = make_test_id(spec.scenario, spec.sensor.hfov_deg);
  return spec;
}

SweepSpec small_sweep() {
  SweepSpec s;
  s.name = "small";
  s.base = base_run("Sc-05", Modality::radar);
  s.scenarios = {"Sc-05", "Sc-06"};
  s.modalities = {Modality::radar, Modality::camera};
  s.values = {30.0, 90.0};
  s.replications = 2;
  return s;
}

}  // namespace

TEST(RmseDivergence, FrozenExample) {
  const std::vector<Vec2> a = {{0, 0}, {0, 0}};
  const std::vector<Vec2> b = {{3, 4}, {0, 0}};
  EXPECT_NEAR(rmse_divergence(a, b), std::sqrt(12.5), 1e-12);
  EXPECT_THROW(rmse_divergence(a, std::vector<Vec2>{{1, 1}}), std::invalid_argument);
}

TEST(RmseDivergence, MetricProperties) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  auto random_traj = [&] {
    std::vector<Vec2> v;
    for (int k = 0; k < 25; ++k) v.push_back({u(rng), u(rng)});
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_traj();
    const auto b = random_traj();
    const auto c = random_traj();
    ASSERT_EQ(rmse_divergence(a, a), 0.0);
    ASSERT_DOUBLE_EQ(rmse_divergence(a, b), rmse_divergence(b, a));
    ASSERT_LE(rmse_divergence(a, c), rmse_divergence(a, b) + rmse_divergence(b, c) + 1e-9);
    ASSERT_GT(rmse_divergence(a, b), 0.0);
  }
}

TEST(RmseVsActual, PerStepDistance) {
  GaussianTrajectory tr;
  tr.steps = {{1.0, 1.0, 1, 1, 0}, {4.0, 0.0, 1, 1, 0}};
  const auto e = rmse_vs_actual(tr, {{1.0, 1.0}, {0.0, 3.0}});
  EXPECT_DOUBLE_EQ(e[0], 0.0);
  EXPECT_DOUBLE_EQ(e[1], 5.0);
}

TEST(TestId, Format) {
  const auto s = preset_scenario("Sc-01");
  EXPECT_EQ(make_test_id(s, 30.0), "LC01_RelV5_30");
  EXPECT_EQ(make_test_id(preset_scenario("Sc-06"), 22.5), "LC06_RelV5_22.5");
}

TEST(PredictionTimes, DefaultsAndValidation) {
  const auto times = default_prediction_times(preset_scenario("Sc-01"));
  ASSERT_EQ(times.size(), 12u);
  EXPECT_DOUBLE_EQ(times.front(), 4.0);
  EXPECT_DOUBLE_EQ(times.back(), 15.0);
  auto spec = base_run("Sc-01", Modality::radar);
  spec.prediction_times = {2.5};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.prediction_times = {15.5};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.prediction_times = {3.0, 15.0};
  EXPECT_NO_THROW(spec.validate());
}

TEST(ExecuteRun, IdealSensorReproducesGroundTruth) {
  for (const char* pred : {"cv", "social"}) {
    auto spec = base_run("Sc-02", Modality::radar);
    spec.sensor = SensorConfig::ideal();
    spec.predictor = PredictorId::parse(pred);
    const auto r = execute_run(spec);
    ASSERT_EQ(r.status, "ok");
    ASSERT_EQ(r.times.size(), 12u);
    for (const auto& t : r.times) {
      ASSERT_EQ(t.status, "ok");
      EXPECT_LE(t.divergence, 1e-9);
    }
    EXPECT_LE(*r.divergence_rmse, 1e-9);
    EXPECT_LE(*r.gap, 1e-9);
  }
}

TEST(ExecuteRun, ArtifactsAndDeterminism) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto spec = base_run("Sc-04", Modality::camera);
  spec.predictor = PredictorId::parse("social");
  const auto r = execute_run(spec, a.string());
  execute_run(spec, b.string());
  for (const char* f : {"result.json", "scenario.json", "ground_truth.csv", "detections.csv", "predictions_gt.json",
                        "predictions_sensor.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(read_text_file((a / f).string()), read_text_file((b / f).string())) << f;
  }
  EXPECT_TRUE(fs::exists(a / "model_inputs" / "t_04.00_gt.json"));
  const auto back = run_result_from_json(read_json_file((a / "result.json").string()));
  EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
}

TEST(ExecuteRun, OutOfRangeSensorGivesNoDetection) {
  auto spec = base_run("Sc-01", Modality::radar);
  spec.sensor.range_max = 1.0;
  const auto r = execute_run(spec);
  EXPECT_EQ(r.status, "no_detection");
  EXPECT_FALSE(r.divergence_rmse.has_value());
  EXPECT_EQ(r.curves.rmse_gt.size(), 25u);
  for (const auto& t : r.times) EXPECT_NE(t.status, "ok");
}

TEST(ExecuteRun, PredictorFailureIsRecorded) {
  auto spec = base_run("Sc-01", Modality::radar);
  spec.predictor = PredictorId::parse(std::string("external:") + STUB_PREDICTOR + " short");
  spec.prediction_times = {4.0, 5.0};
  const auto r = execute_run(spec);
  EXPECT_EQ(r.status, "failed");
  EXPECT_EQ(r.error, "wrong step count: got 24, expected 25");
  for (const auto& t : r.times) EXPECT_EQ(t.status, "predictor_error");
}

TEST(ExecuteRun, ExternalStubMatchesItsOwnModel) {
  auto spec = base_run("Sc-03", Modality::radar);
  spec.sensor = SensorConfig::ideal();
  spec.predictor = PredictorId::parse(std::string("external:") + STUB_PREDICTOR + " valid");
  spec.prediction_times = {5.0};
  const auto r = execute_run(spec);
  ASSERT_EQ(r.status, "ok");
  EXPECT_LE(*r.divergence_rmse, 1e-9);
}

TEST(SelectArgmin, TiesGoToSmallerValue) {
  EXPECT_EQ(select_argmin({30, 60, 90}, {2.0, 1.0, 1.0}), 60.0);
  EXPECT_EQ(select_argmin({90, 60, 30}, {1.0, 1.0, 1.0}), 30.0);
  EXPECT_EQ(select_argmin({30, 60}, {std::nullopt, 5.0}), 60.0);
  EXPECT_FALSE(select_argmin({30, 60}, {std::nullopt, std::nullopt}).has_value());
}

TEST(SelectArgmin, InvariantUnderMonotoneRescaling) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> values = {30, 60, 90, 120, 150, 180};
    std::vector<std::optional<double>> agg;
    for (std::size_t k = 0; k < values.size(); ++k)
      agg.push_back(pick(rng) == 0 ? std::nullopt : std::optional<double>(std::round(u(rng))));
    std::vector<std::optional<double>> scaled;
    for (const auto& a : agg) scaled.push_back(a ? std::optional<double>(3.0 * *a + 7.0) : std::nullopt);
    ASSERT_EQ(select_argmin(values, agg), select_argmin(values, scaled));
    auto rv = values;
    auto ra = agg;
    std::reverse(rv.begin(), rv.end());
    std::reverse(ra.begin(), ra.end());
    ASSERT_EQ(select_argmin(values, agg), select_argmin(rv, ra));
  }
}

TEST(Aggregate, PooledOverAvailableTimes) {
  RunResult a;
  a.times = {TimeResult{}, TimeResult{}};
  a.times[0].divergence = 1.0;
  a.times[1].divergence = 3.0;
  RunResult b;
  b.times = {TimeResult{}, TimeResult{}};
  b.times[0].divergence = 8.0;
  b.times[1].status = "target_absent";
  b.times[1].divergence = 100.0;
  RunResult c;
  c.status = "failed";
  c.times = {TimeResult{}};
  c.times[0].divergence = 50.0;
  EXPECT_DOUBLE_EQ(*aggregate_divergence({&a, &b, &c}), 4.0);
  EXPECT_FALSE(aggregate_divergence({&c}).has_value());
}

TEST(ExpandSweep, GridOrderIdsAndSeeds) {
  const auto runs = expand_sweep(small_sweep());
  ASSERT_EQ(runs.size(), 2u * 2u * 2u * 2u);
  EXPECT_EQ(runs[0].spec.test_id, "LC05_RelV5_30_radar_r0");
  EXPECT_EQ(runs[1].spec.test_id, "LC05_RelV5_30_radar_r1");
  EXPECT_EQ(runs[1].spec.sensor.seed, runs[0].spec.sensor.seed + 1);
  EXPECT_EQ(runs[2].spec.sensor.hfov_deg, 90.0);
  EXPECT_EQ(runs[4].modality, "camera");
  EXPECT_EQ(runs[4].spec.sensor.modality, Modality::camera);
  EXPECT_EQ(runs[8].scenario_id, "Sc-06");

  SweepSpec single;
  single.base = base_run("Sc-01", Modality::radar);
  single.values = {30.0};
  EXPECT_EQ(expand_sweep(single)[0].spec.test_id, "LC01_RelV5_30");
}

TEST(ExpandSweep, RejectsBadGrids) {
  auto s = small_sweep();
  s.values = {30.0, 30.0};
  EXPECT_THROW(expand_sweep(s), std::invalid_argument);
  s = small_sweep();
  s.values = {400.0};
  EXPECT_THROW(expand_sweep(s), std::invalid_argument);
  s = small_sweep();
  s.parameter = "zoom";
  EXPECT_THROW(expand_sweep(s), std::invalid_argument);
  s = small_sweep();
  s.name = "../escape";
  EXPECT_THROW(expand_sweep(s), std::invalid_argument);
}

TEST(RunSweep, PersistsEveryRunAndReport) {
  const auto dir = scratch("sweep");
  const auto sweep = small_sweep();
  const auto outcome = run_sweep(sweep, dir.string());
  ASSERT_EQ(outcome.results.size(), 16u);
  for (const auto& r : outcome.results) {
    EXPECT_TRUE(fs::exists(dir / "runs" / r.test_id / "result.json")) << r.test_id;
    EXPECT_TRUE(fs::exists(dir / "curves" / (r.test_id + ".csv")));
  }
  ASSERT_EQ(outcome.groups.size(), 4u);
  for (const auto& g : outcome.groups) EXPECT_EQ(g.values.size(), 2u);

  const auto csv = read_text_file((dir / "metrics.csv").string());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "test_id,scenario_id,modality,parameter,value,replication,seed,status,divergence_rmse,gap,"
            "target_frames_detected,frames_total,selected");
}

TEST(RunSweep, ReportReemissionIsByteIdentical) {
  const auto dir = scratch("reemit");
  run_sweep(small_sweep(), dir.string());
  const auto csv = read_text_file((dir / "metrics.csv").string());
  const auto summary = read_text_file((dir / "summary.json").string());
  const auto curve = read_text_file((dir / "curves" / "LC06_RelV5_90_camera_r1.csv").string());
  fs::remove(dir / "metrics.csv");
  fs::remove(dir / "summary.json");
  SweepSpec loaded;
  const auto outcome = load_sweep(dir.string(), loaded);
  emit_report(loaded, outcome, dir.string(), ReportFormat::both);
  EXPECT_EQ(read_text_file((dir / "metrics.csv").string()), csv);
  EXPECT_EQ(read_text_file((dir / "summary.json").string()), summary);
  EXPECT_EQ(read_text_file((dir / "curves" / "LC06_RelV5_90_camera_r1.csv").string()), curve);
}

TEST(RunSweep, SummaryIndependentOfParallelism) {
  auto sweep = small_sweep();
  const auto d1 = scratch("par1");
  const auto d3 = scratch("par3");
  sweep.parallel = 1;
  run_sweep(sweep, d1.string());
  sweep.parallel = 3;
  run_sweep(sweep, d3.string());
  EXPECT_EQ(read_text_file((d1 / "summary.json").string()), read_text_file((d3 / "summary.json").string()));
  EXPECT_EQ(read_text_file((d1 / "metrics.csv").string()), read_text_file((d3 / "metrics.csv").string()));
}

TEST(RunSweep, AllFailingSweepThrows) {
  auto s = small_sweep();
  s.scenarios = {"Sc-01"};
  s.modalities = {Modality::radar};
  s.replications = 1;
  s.base.predictor = PredictorId::parse(std::string("external:") + STUB_PREDICTOR + " error");
  s.base.prediction_times = {4.0};
  EXPECT_THROW(run_sweep(s), std::runtime_error);
}
