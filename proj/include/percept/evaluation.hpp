#pragma once
// Metrics, single runs, parameter sweeps and report emission.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/predictor.hpp"
#include "percept/scenario.hpp"
#include "percept/sensor.hpp"
#include "percept/track.hpp"

namespace percept {

/// Root-mean-square 2D distance between the means of two trajectories.
/// Throws std::invalid_argument on a length mismatch.
double rmse_divergence(const GaussianTrajectory& a, const GaussianTrajectory& b);
double rmse_divergence(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

/// Per-step Euclidean error of the predicted means against actual positions.
std::vector<double> rmse_vs_actual(const GaussianTrajectory& prediction, const std::vector<Vec2>& actual);

enum class Imputation { none, linear };
std::string to_string(Imputation i);
Imputation imputation_from_string(const std::string& s);

struct RunSpec {
  std::string test_id;
  ScenarioSpec scenario;
  SensorConfig sensor;
  DetectionParams detection;
  PredictorId predictor;
  std::vector<double> prediction_times;  // empty: default_prediction_times
  Imputation imputation = Imputation::none;
  int history_frames = kHistoryFrames;
  double history_rate = kHistoryRate;
  int horizon = kHorizonFrames;

  /// Throws std::invalid_argument when a prediction time leaves no room for
  /// the history window or the horizon.
  void validate() const;
  std::vector<double> effective_prediction_times() const;
};

/// Every 1 s from (history window + 1 s) up to (duration - horizon).
std::vector<double> default_prediction_times(const ScenarioSpec& scenario, int history_frames = kHistoryFrames,
                                             double rate = kHistoryRate, int horizon = kHorizonFrames);

/// "LC01_RelV5_30" style identifier.
std::string make_test_id(const ScenarioSpec& scenario, double value);

struct TimeResult {
  double t = 0.0;
  std::string status = "ok";  // ok | target_absent | target_never_detected | insufficient_history | predictor_error
  std::string message;
  double divergence = 0.0;    // only meaningful when status == ok
  std::vector<double> divergence_x;
  std::vector<double> divergence_y;
  std::vector<double> divergence_2d;
  std::vector<double> error_gt;        // per-step 2D error vs actual
  std::vector<double> error_gt_x;
  std::vector<double> error_gt_y;
  std::vector<double> error_sensor;
  std::vector<double> error_sensor_x;
  std::vector<double> error_sensor_y;

  bool available() const { return status == "ok"; }
};

struct DetectionStats {
  std::size_t frames_total = 0;
  std::map<std::string, std::size_t> frames_detected;  // per non-ego vehicle
};

struct RunCurves {
  std::vector<double> rmse_gt;
  std::vector<double> rmse_gt_x;
  std::vector<double> rmse_gt_y;
  std::vector<double> rmse_sensor;
  std::vector<double> rmse_sensor_x;
  std::vector<double> rmse_sensor_y;
  std::vector<double> rmse_div_2d;
  std::vector<double> rmse_div_x;
  std::vector<double> rmse_div_y;
};

struct RunResult {
  std::string test_id;
  std::string scenario_id;
  std::string target_id;
  std::string modality;
  std::string predictor;
  std::string imputation;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | no_detection | failed
  std::string error;
  std::optional<double> divergence_rmse;  // mean over available prediction times
  std::optional<double> gap;              // mean |rmse_sensor - rmse_gt| over steps
  int horizon = kHorizonFrames;
  double history_rate = kHistoryRate;
  RunCurves curves;
  DetectionStats detection;
  std::vector<TimeResult> times;
};

struct RunArtifacts {
  GroundTruthLog log;
  DetectionSet detections;
  std::vector<ModelInput> inputs_gt;
  std::vector<ModelInput> inputs_sensor;
  std::vector<GaussianTrajectory> predictions_gt;
  std::vector<GaussianTrajectory> predictions_sensor;
};

/// Runs scenario, sensor, history assembly, both predictions and metrics.
/// Predictor failures inside a run are recorded per time, never thrown.
/// With a non-empty run_dir every artifact is written there.
RunResult execute_run(const RunSpec& spec, const std::string& run_dir = {}, RunArtifacts* artifacts = nullptr);

nlohmann::ordered_json to_json(const RunResult& result);
RunResult run_result_from_json(const nlohmann::json& doc);

struct SweepSpec {
  std::string name = "sweep";
  RunSpec base;
  std::vector<std::string> scenarios;  // empty: base.scenario only
  std::vector<Modality> modalities;    // empty: base.sensor.modality only
  nlohmann::json sensor_overrides = nlohmann::json::object();  // applied per modality
  std::string parameter = "hfov_deg";  // hfov_deg | vfov_deg | range_m
  std::vector<double> values;
  int replications = 1;
  int parallel = 1;

  void validate() const;
};

struct SweepRun {
  std::string scenario_id;
  std::string modality;
  double value = 0.0;
  int replication = 0;
  RunSpec spec;
};

/// Expands the grid in a fixed order: scenario, modality, value, replication.
std::vector<SweepRun> expand_sweep(const SweepSpec& sweep);

struct GroupSelection {
  std::string scenario_id;
  std::string modality;
  std::vector<double> values;
  std::vector<std::optional<double>> aggregate;  // nothing when no run of that value succeeded
  std::vector<int> successful_runs;
  std::vector<int> failed_runs;
  std::vector<int> no_detection_runs;
  std::optional<double> selected;
};

/// Argmin over (value, aggregate) pairs; ties go to the smaller value.
std::optional<double> select_argmin(const std::vector<double>& values, const std::vector<std::optional<double>>& aggregate);

/// Pooled mean of per-time divergences over successful runs.
std::optional<double> aggregate_divergence(const std::vector<const RunResult*>& runs);

struct SweepOutcome {
  std::vector<SweepRun> runs;
  std::vector<RunResult> results;  // parallel to runs
  std::vector<GroupSelection> groups;
};

std::vector<GroupSelection> compute_selections(const std::vector<SweepRun>& runs, const std::vector<RunResult>& results);

/// Executes every run (on `sweep.parallel` threads) and selects per
/// (scenario, modality) group. With a non-empty sweep_dir, each run is
/// persisted under sweep_dir/runs/<test_id>/ and the report is emitted.
/// Throws std::runtime_error when no run succeeds.
SweepOutcome run_sweep(const SweepSpec& sweep, const std::string& sweep_dir = {});

enum class ReportFormat { csv, json, both };

/// Writes metrics.csv and curves/<test_id>.csv (csv) and summary.json (json).
void emit_report(const SweepSpec& sweep, const SweepOutcome& outcome, const std::string& dir, ReportFormat format);

/// Re-reads a persisted sweep directory and re-emits its report.
SweepOutcome load_sweep(const std::string& sweep_dir, SweepSpec& sweep);

nlohmann::ordered_json to_json(const SweepSpec& sweep);

}  // namespace percept
