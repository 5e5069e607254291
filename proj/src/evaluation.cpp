#include "percept/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "percept/json_util.hpp"

namespace fs = std::filesystem;

namespace percept {

namespace {

std::string fmt_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_number(*v) : std::string{}; }

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t_%05.2f", t);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Per-step RMS over a set of per-time vectors.
std::vector<double> rms_curve(const std::vector<const std::vector<double>*>& rows, std::size_t length) {
  if (rows.empty()) return {};
  std::vector<double> out(length, 0.0);
  for (const auto* r : rows)
    for (std::size_t k = 0; k < length; ++k) out[k] += (*r)[k] * (*r)[k];
  for (auto& v : out) v = std::sqrt(v / static_cast<double>(rows.size()));
  return out;
}

std::vector<Vec2> global_means(const GaussianTrajectory& tr, const Pose2& anchor) {
  std::vector<Vec2> out;
  out.reserve(tr.steps.size());
  for (const auto& s : tr.steps)
    out.push_back(from_target_frame({s.mu_x, s.mu_y}, {anchor.x, anchor.y}, anchor.heading));
  return out;
}

// Splits global differences into the along-road and lateral axes of `anchor`.
void decompose(const std::vector<Vec2>& a, const std::vector<Vec2>& b, const Pose2& anchor, std::vector<double>& d2,
               std::vector<double>& dx, std::vector<double>& dy) {
  const double c = std::cos(anchor.heading);
  const double s = std::sin(anchor.heading);
  d2.clear();
  dx.clear();
  dy.clear();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ex = a[k].x - b[k].x;
    const double ey = a[k].y - b[k].y;
    d2.push_back(std::hypot(ex, ey));
    dx.push_back(std::abs(c * ex + s * ey));
    dy.push_back(std::abs(-s * ex + c * ey));
  }
}

nlohmann::ordered_json vec_json(const std::vector<double>& v) {
  auto a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::vector<double> vec_from(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return {};
  return doc[key].get<std::vector<double>>();
}

std::optional<double> opt_from(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<double>();
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string scenario_number(const std::string& id) {
  const std::string prefix = "Sc-";
  if (id.rfind(prefix, 0) == 0) return id.substr(prefix.size());
  std::string out;
  for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

void apply_parameter(SensorConfig& sensor, const std::string& parameter, double value) {
  if (parameter == "hfov_deg") {
    sensor.hfov_deg = value;
  } else if (parameter == "vfov_deg") {
    sensor.vfov_deg = value;
  } else if (parameter == "range_m") {
    sensor.range_max = value;
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + parameter + "' (valid: hfov_deg, vfov_deg, range_m)");
  }
}

void write_run_artifacts(const RunSpec& spec, const RunResult& result, const RunArtifacts& art, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "model_inputs");
  write_text_file((fs::path(dir) / "scenario.json").string(), to_json(spec.scenario).dump(2) + "\n");
  {
    std::ofstream out(fs::path(dir) / "ground_truth.csv");
    write_ground_truth_csv(art.log, out);
  }
  {
    std::ofstream out(fs::path(dir) / "detections.csv");
    write_detections_csv(art.detections, out);
  }
  auto preds_gt = nlohmann::ordered_json::array();
  auto preds_sensor = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < art.inputs_gt.size(); ++i) {
    const auto& in = art.inputs_gt[i];
    write_text_file((fs::path(dir) / "model_inputs" / (time_tag(in.t) + "_gt.json")).string(), to_json(in).dump(2) + "\n");
    preds_gt.push_back({{"t", in.t}, {"prediction", to_json(art.predictions_gt[i])}});
  }
  for (std::size_t i = 0; i < art.inputs_sensor.size(); ++i) {
    const auto& in = art.inputs_sensor[i];
    write_text_file((fs::path(dir) / "model_inputs" / (time_tag(in.t) + "_sensor.json")).string(),
                    to_json(in).dump(2) + "\n");
    preds_sensor.push_back({{"t", in.t}, {"prediction", to_json(art.predictions_sensor[i])}});
  }
  write_text_file((fs::path(dir) / "predictions_gt.json").string(), preds_gt.dump(2) + "\n");
  write_text_file((fs::path(dir) / "predictions_sensor.json").string(), preds_sensor.dump(2) + "\n");
  write_text_file((fs::path(dir) / "result.json").string(), to_json(result).dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

double rmse_divergence(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("rmse_divergence: length mismatch");
  if (a.empty()) throw std::invalid_argument("rmse_divergence: empty trajectories");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dx = a[k].x - b[k].x;
    const double dy = a[k].y - b[k].y;
    s += dx * dx + dy * dy;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

double rmse_divergence(const GaussianTrajectory& a, const GaussianTrajectory& b) {
  std::vector<Vec2> ma;
  std::vector<Vec2> mb;
  for (const auto& s : a.steps) ma.push_back({s.mu_x, s.mu_y});
  for (const auto& s : b.steps) mb.push_back({s.mu_x, s.mu_y});
  return rmse_divergence(ma, mb);
}

std::vector<double> rmse_vs_actual(const GaussianTrajectory& prediction, const std::vector<Vec2>& actual) {
  if (prediction.steps.size() != actual.size()) throw std::invalid_argument("rmse_vs_actual: length mismatch");
  std::vector<double> out;
  for (std::size_t k = 0; k < actual.size(); ++k)
    out.push_back(std::hypot(prediction.steps[k].mu_x - actual[k].x, prediction.steps[k].mu_y - actual[k].y));
  return out;
}

std::string to_string(Imputation i) { return i == Imputation::linear ? "linear" : "none"; }

Imputation imputation_from_string(const std::string& s) {
  if (s == "none") return Imputation::none;
  if (s == "linear") return Imputation::linear;
  throw std::invalid_argument("unknown imputation '" + s + "' (valid: none, linear)");
}

// ---------------------------------------------------------------------------
// Runs

std::vector<double> default_prediction_times(const ScenarioSpec& scenario, int history_frames, double rate,
                                             int horizon) {
  const double first = std::ceil((history_frames - 1) / rate) + 1.0;
  const double last = scenario.duration - horizon / rate;
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double t = first + i;
    if (t > last + 1e-9) break;
    out.push_back(t);
  }
  return out;
}

std::string make_test_id(const ScenarioSpec& scenario, double value) {
  return "LC" + scenario_number(scenario.id) + "_RelV" + fmt_number(scenario.relative_velocity_kph) + "_" +
         fmt_number(value);
}

std::vector<double> RunSpec::effective_prediction_times() const {
  return prediction_times.empty() ? default_prediction_times(scenario, history_frames, history_rate, horizon)
                                  : prediction_times;
}

void RunSpec::validate() const {
  scenario.validate((history_frames - 1) / history_rate + horizon / history_rate);
  sensor.validate();
  if (test_id.empty()) throw std::invalid_argument("run: test_id must not be empty");
  if (!(detection.confidence_threshold >= 0.0 && detection.confidence_threshold <= 1.0))
    throw std::invalid_argument("run: confidence_threshold must be in [0, 1]");
  if (history_frames < 2 || !(history_rate > 0.0) || horizon <= 0)
    throw std::invalid_argument("run: invalid history or horizon");
  const auto times = effective_prediction_times();
  if (times.empty()) throw std::invalid_argument("run: no prediction times");
  for (double t : times) {
    if (t - (history_frames - 1) / history_rate < -1e-9)
      throw std::invalid_argument("run: prediction time " + fmt_number(t) + " s leaves no room for the history window");
    if (t + horizon / history_rate > scenario.duration + 1e-9)
      throw std::invalid_argument("run: prediction time " + fmt_number(t) + " s leaves no room for the horizon");
  }
}

RunResult execute_run(const RunSpec& spec, const std::string& run_dir, RunArtifacts* artifacts) {
  spec.validate();
  RunArtifacts local;
  RunArtifacts& art = artifacts ? *artifacts : local;

  RunResult result;
  result.test_id = spec.test_id;
  result.scenario_id = spec.scenario.id;
  result.target_id = spec.scenario.target().id;
  result.modality = to_string(spec.sensor.modality);
  result.predictor = spec.predictor.to_string();
  result.imputation = to_string(spec.imputation);
  result.seed = spec.sensor.seed;
  result.horizon = spec.horizon;
  result.history_rate = spec.history_rate;

  art.log = run_scenario(spec.scenario);
  art.detections = simulate_sensor(spec.sensor, spec.detection, art.log);
  const auto& log = art.log;

  result.detection.frames_total = art.detections.frames.size();
  for (std::size_t i = 0; i < log.vehicles.size(); ++i)
    if (log.vehicles[i].role != VehicleRole::ego) result.detection.frames_detected[log.vehicle_ids[i]] = 0;
  for (const auto& f : art.detections.frames)
    for (const auto& d : f.detections) ++result.detection.frames_detected[d.vehicle_id];

  const std::string target_id = spec.scenario.target().id;
  const auto gt_source = TrackSource::ground_truth(log);
  const auto det_source = TrackSource::detections(log, art.detections);

  std::unique_ptr<Predictor> predictor;
  try {
    predictor = make_predictor(spec.predictor);
  } catch (const std::exception& e) {
    result.status = "failed";
    result.error = e.what();
    if (!run_dir.empty()) write_run_artifacts(spec, result, art, run_dir);
    return result;
  }

  bool any_predictor_error = false;
  for (double t : spec.effective_prediction_times()) {
    TimeResult tr;
    tr.t = t;

    const ModelInput gt_input = assemble_history(gt_source, target_id, t, spec.history_frames, spec.history_rate,
                                                 spec.horizon);
    GaussianTrajectory gt_pred;
    try {
      gt_pred = predictor->predict(gt_input);
    } catch (const std::exception& e) {
      tr.status = "predictor_error";
      tr.message = e.what();
      any_predictor_error = true;
      result.times.push_back(tr);
      continue;
    }
    art.inputs_gt.push_back(gt_input);
    art.predictions_gt.push_back(gt_pred);

    std::vector<Vec2> actual;
    for (int k = 1; k <= spec.horizon; ++k) {
      const auto& st = log.state(log.frame_at(t + k / spec.history_rate), target_id);
      actual.push_back({st.x, st.y});
    }
    const auto gt_means = global_means(gt_pred, gt_input.anchor);
    decompose(gt_means, actual, gt_input.anchor, tr.error_gt, tr.error_gt_x, tr.error_gt_y);

    std::optional<ModelInput> sensor_input;
    try {
      sensor_input = assemble_history(det_source, target_id, t, spec.history_frames, spec.history_rate, spec.horizon);
    } catch (const TargetAbsent& e) {
      tr.status = "target_absent";
      tr.message = e.what();
    } catch (const TargetNeverDetected& e) {
      tr.status = "target_never_detected";
      tr.message = e.what();
    }
    if (sensor_input && sensor_input->grid.target.present_count() < 2) {
      tr.status = "insufficient_history";
      tr.message = "fewer than 2 present target frames";
      sensor_input.reset();
    }
    if (sensor_input && spec.imputation == Imputation::linear) sensor_input = impute_model_input(*sensor_input);
    if (!sensor_input) {
      result.times.push_back(tr);
      continue;
    }

    GaussianTrajectory sensor_pred;
    try {
      sensor_pred = predictor->predict(*sensor_input);
    } catch (const std::exception& e) {
      tr.status = "predictor_error";
      tr.message = e.what();
      any_predictor_error = true;
      result.times.push_back(tr);
      continue;
    }
    art.inputs_sensor.push_back(*sensor_input);
    art.predictions_sensor.push_back(sensor_pred);

    const auto sensor_means = global_means(sensor_pred, sensor_input->anchor);
    decompose(sensor_means, actual, gt_input.anchor, tr.error_sensor, tr.error_sensor_x, tr.error_sensor_y);
    decompose(sensor_means, gt_means, gt_input.anchor, tr.divergence_2d, tr.divergence_x, tr.divergence_y);
    tr.divergence = rmse_divergence(gt_means, sensor_means);
    result.times.push_back(tr);
  }

  std::vector<const TimeResult*> ok;
  for (const auto& tr : result.times)
    if (tr.available()) ok.push_back(&tr);
  const auto f = static_cast<std::size_t>(spec.horizon);
  auto collect = [&](const std::vector<const TimeResult*>& set, std::vector<double> TimeResult::*field) {
    std::vector<const std::vector<double>*> rows;
    for (const auto* tr : set)
      if ((tr->*field).size() == f) rows.push_back(&(tr->*field));
    return rms_curve(rows, f);
  };

  auto& c = result.curves;
  if (!ok.empty()) {
    std::vector<double> divs;
    for (const auto* tr : ok) divs.push_back(tr->divergence);
    result.divergence_rmse = mean(divs);
    c.rmse_gt = collect(ok, &TimeResult::error_gt);
    c.rmse_gt_x = collect(ok, &TimeResult::error_gt_x);
    c.rmse_gt_y = collect(ok, &TimeResult::error_gt_y);
    c.rmse_sensor = collect(ok, &TimeResult::error_sensor);
    c.rmse_sensor_x = collect(ok, &TimeResult::error_sensor_x);
    c.rmse_sensor_y = collect(ok, &TimeResult::error_sensor_y);
    c.rmse_div_2d = collect(ok, &TimeResult::divergence_2d);
    c.rmse_div_x = collect(ok, &TimeResult::divergence_x);
    c.rmse_div_y = collect(ok, &TimeResult::divergence_y);
    double g = 0.0;
    for (std::size_t k = 0; k < f; ++k) g += std::abs(c.rmse_sensor[k] - c.rmse_gt[k]);
    result.gap = g / static_cast<double>(f);
  } else {
    std::vector<const TimeResult*> all;
    for (const auto& tr : result.times) all.push_back(&tr);
    c.rmse_gt = collect(all, &TimeResult::error_gt);
    c.rmse_gt_x = collect(all, &TimeResult::error_gt_x);
    c.rmse_gt_y = collect(all, &TimeResult::error_gt_y);
    if (any_predictor_error) {
      result.status = "failed";
      for (const auto& tr : result.times)
        if (tr.status == "predictor_error") {
          result.error = tr.message;
          break;
        }
    } else {
      result.status = "no_detection";
    }
  }

  if (!run_dir.empty()) write_run_artifacts(spec, result, art, run_dir);
  return result;
}

nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json doc;
  doc["test_id"] = r.test_id;
  doc["scenario_id"] = r.scenario_id;
  doc["target_id"] = r.target_id;
  doc["modality"] = r.modality;
  doc["predictor"] = r.predictor;
  doc["imputation"] = r.imputation;
  doc["seed"] = r.seed;
  doc["status"] = r.status;
  doc["error"] = r.error;
  doc["divergence_rmse"] = opt_json(r.divergence_rmse);
  doc["gap"] = opt_json(r.gap);
  doc["horizon"] = r.horizon;
  doc["history_rate_hz"] = r.history_rate;
  doc["curves"] = {{"rmse_gt", vec_json(r.curves.rmse_gt)},
                   {"rmse_gt_x", vec_json(r.curves.rmse_gt_x)},
                   {"rmse_gt_y", vec_json(r.curves.rmse_gt_y)},
                   {"rmse_sensor", vec_json(r.curves.rmse_sensor)},
                   {"rmse_sensor_x", vec_json(r.curves.rmse_sensor_x)},
                   {"rmse_sensor_y", vec_json(r.curves.rmse_sensor_y)},
                   {"rmse_div_2d", vec_json(r.curves.rmse_div_2d)},
                   {"rmse_div_x", vec_json(r.curves.rmse_div_x)},
                   {"rmse_div_y", vec_json(r.curves.rmse_div_y)}};
  nlohmann::ordered_json detected = nlohmann::ordered_json::object();
  for (const auto& [id, n] : r.detection.frames_detected) detected[id] = n;
  doc["detection"] = {{"frames_total", r.detection.frames_total}, {"frames_detected", detected}};
  auto times = nlohmann::ordered_json::array();
  for (const auto& tr : r.times) {
    nlohmann::ordered_json t;
    t["t"] = tr.t;
    t["status"] = tr.status;
    if (!tr.message.empty()) t["message"] = tr.message;
    t["divergence"] = tr.available() ? nlohmann::ordered_json(tr.divergence) : nlohmann::ordered_json(nullptr);
    t["divergence_2d"] = vec_json(tr.divergence_2d);
    t["divergence_x"] = vec_json(tr.divergence_x);
    t["divergence_y"] = vec_json(tr.divergence_y);
    t["error_gt"] = vec_json(tr.error_gt);
    t["error_gt_x"] = vec_json(tr.error_gt_x);
    t["error_gt_y"] = vec_json(tr.error_gt_y);
    t["error_sensor"] = vec_json(tr.error_sensor);
    t["error_sensor_x"] = vec_json(tr.error_sensor_x);
    t["error_sensor_y"] = vec_json(tr.error_sensor_y);
    times.push_back(t);
  }
  doc["times"] = times;
  return doc;
}

RunResult run_result_from_json(const nlohmann::json& doc) {
  RunResult r;
  r.test_id = doc.at("test_id").get<std::string>();
  r.scenario_id = doc.at("scenario_id").get<std::string>();
  r.target_id = doc.at("target_id").get<std::string>();
  r.modality = doc.at("modality").get<std::string>();
  r.predictor = doc.at("predictor").get<std::string>();
  r.imputation = doc.at("imputation").get<std::string>();
  r.seed = doc.at("seed").get<std::uint64_t>();
  r.status = doc.at("status").get<std::string>();
  r.error = doc.at("error").get<std::string>();
  r.divergence_rmse = opt_from(doc, "divergence_rmse");
  r.gap = opt_from(doc, "gap");
  r.horizon = doc.at("horizon").get<int>();
  r.history_rate = doc.at("history_rate_hz").get<double>();
  const auto& c = doc.at("curves");
  r.curves.rmse_gt = vec_from(c, "rmse_gt");
  r.curves.rmse_gt_x = vec_from(c, "rmse_gt_x");
  r.curves.rmse_gt_y = vec_from(c, "rmse_gt_y");
  r.curves.rmse_sensor = vec_from(c, "rmse_sensor");
  r.curves.rmse_sensor_x = vec_from(c, "rmse_sensor_x");
  r.curves.rmse_sensor_y = vec_from(c, "rmse_sensor_y");
  r.curves.rmse_div_2d = vec_from(c, "rmse_div_2d");
  r.curves.rmse_div_x = vec_from(c, "rmse_div_x");
  r.curves.rmse_div_y = vec_from(c, "rmse_div_y");
  const auto& det = doc.at("detection");
  r.detection.frames_total = det.at("frames_total").get<std::size_t>();
  for (const auto& [id, n] : det.at("frames_detected").items()) r.detection.frames_detected[id] = n.get<std::size_t>();
  for (const auto& t : doc.at("times")) {
    TimeResult tr;
    tr.t = t.at("t").get<double>();
    tr.status = t.at("status").get<std::string>();
    tr.message = t.value("message", std::string{});
    tr.divergence = t.at("divergence").is_null() ? 0.0 : t.at("divergence").get<double>();
    tr.divergence_2d = vec_from(t, "divergence_2d");
    tr.divergence_x = vec_from(t, "divergence_x");
    tr.divergence_y = vec_from(t, "divergence_y");
    tr.error_gt = vec_from(t, "error_gt");
    tr.error_gt_x = vec_from(t, "error_gt_x");
    tr.error_gt_y = vec_from(t, "error_gt_y");
    tr.error_sensor = vec_from(t, "error_sensor");
    tr.error_sensor_x = vec_from(t, "error_sensor_x");
    tr.error_sensor_y = vec_from(t, "error_sensor_y");
    r.times.push_back(tr);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepSpec::validate() const {
  if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..")
    throw std::invalid_argument("sweep: name must be a plain directory name");
  if (values.empty()) throw std::invalid_argument("sweep: values must not be empty");
  if (replications < 1) throw std::invalid_argument("sweep: replications must be >= 1");
  if (parallel < 1) throw std::invalid_argument("sweep: parallel must be >= 1");
  std::set<double> seen_values(values.begin(), values.end());
  if (seen_values.size() != values.size()) throw std::invalid_argument("sweep: duplicate values");
  std::set<std::string> seen_scenarios(scenarios.begin(), scenarios.end());
  if (seen_scenarios.size() != scenarios.size()) throw std::invalid_argument("sweep: duplicate scenarios");
  std::set<Modality> seen_modalities(modalities.begin(), modalities.end());
  if (seen_modalities.size() != modalities.size()) throw std::invalid_argument("sweep: duplicate modalities");
  SensorConfig probe = base.sensor;
  for (double v : values) {
    apply_parameter(probe, parameter, v);
    try {
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sweep: value " + fmt_number(v) + " for " + parameter + " is not admissible: " +
                                  e.what());
    }
  }
}

std::vector<SweepRun> expand_sweep(const SweepSpec& sweep) {
  sweep.validate();
  std::vector<ScenarioSpec> scenarios;
  if (sweep.scenarios.empty()) {
    scenarios.push_back(sweep.base.scenario);
  } else {
    for (const auto& id : sweep.scenarios) scenarios.push_back(preset_scenario(id));
  }
  std::vector<SensorConfig> sensors;
  if (sweep.modalities.empty()) {
    sensors.push_back(sweep.base.sensor);
  } else {
    for (Modality m : sweep.modalities) {
      SensorConfig s = sensor_from_json(sweep.sensor_overrides, SensorConfig::defaults(m), "sweep.base.sensor");
      s.modality = m;
      s.seed = sweep.base.sensor.seed;
      s.noise_enabled = sweep.base.sensor.noise_enabled;
      sensors.push_back(s);
    }
  }

  std::vector<SweepRun> runs;
  std::set<std::string> ids;
  for (const auto& scenario : scenarios) {
    for (const auto& sensor : sensors) {
      for (double value : sweep.values) {
        for (int rep = 0; rep < sweep.replications; ++rep) {
          SweepRun run;
          run.scenario_id = scenario.id;
          run.modality = to_string(sensor.modality);
          run.value = value;
          run.replication = rep;
          run.spec = sweep.base;
          run.spec.scenario = scenario;
          run.spec.sensor = sensor;
          apply_parameter(run.spec.sensor, sweep.parameter, value);
          run.spec.sensor.seed = sensor.seed + static_cast<std::uint64_t>(rep);
          std::string id = make_test_id(scenario, value);
          if (sensors.size() > 1) id += "_" + run.modality;
          if (sweep.replications > 1) id += "_r" + std::to_string(rep);
          if (!ids.insert(id).second) throw std::invalid_argument("sweep: duplicate test id '" + id + "'");
          run.spec.test_id = id;
          runs.push_back(std::move(run));
        }
      }
    }
  }
  return runs;
}

std::optional<double> select_argmin(const std::vector<double>& values,
                                    const std::vector<std::optional<double>>& aggregate) {
  std::optional<double> best_value;
  double best = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!aggregate[i]) continue;
    const double a = *aggregate[i];
    if (!best_value || a < best || (a == best && values[i] < *best_value)) {
      best_value = values[i];
      best = a;
    }
  }
  return best_value;
}

std::optional<double> aggregate_divergence(const std::vector<const RunResult*>& runs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* r : runs) {
    if (r->status != "ok") continue;
    for (const auto& t : r->times) {
      if (!t.available()) continue;
      sum += t.divergence;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<GroupSelection> compute_selections(const std::vector<SweepRun>& runs,
                                               const std::vector<RunResult>& results) {
  std::vector<GroupSelection> groups;
  auto group_of = [&](const SweepRun& r) -> GroupSelection& {
    for (auto& g : groups)
      if (g.scenario_id == r.scenario_id && g.modality == r.modality) return g;
    groups.push_back({r.scenario_id, r.modality, {}, {}, {}, {}, {}, std::nullopt});
    return groups.back();
  };
  std::vector<std::vector<std::vector<const RunResult*>>> members;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto& g = group_of(runs[i]);
    const auto gi = static_cast<std::size_t>(&g - groups.data());
    if (members.size() <= gi) members.resize(gi + 1);
    auto it = std::find(g.values.begin(), g.values.end(), runs[i].value);
    std::size_t vi = static_cast<std::size_t>(it - g.values.begin());
    if (it == g.values.end()) {
      g.values.push_back(runs[i].value);
      g.successful_runs.push_back(0);
      g.failed_runs.push_back(0);
      g.no_detection_runs.push_back(0);
      members[gi].emplace_back();
    }
    members[gi][vi].push_back(&results[i]);
    const auto& st = results[i].status;
    if (st == "ok") ++g.successful_runs[vi];
    else if (st == "no_detection") ++g.no_detection_runs[vi];
    else ++g.failed_runs[vi];
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    for (const auto& m : members[gi]) g.aggregate.push_back(aggregate_divergence(m));
    g.selected = select_argmin(g.values, g.aggregate);
  }
  return groups;
}

SweepOutcome run_sweep(const SweepSpec& sweep, const std::string& sweep_dir) {
  SweepOutcome outcome;
  outcome.runs = expand_sweep(sweep);
  outcome.results.resize(outcome.runs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= outcome.runs.size()) return;
      const auto& run = outcome.runs[i];
      const std::string dir = sweep_dir.empty() ? std::string{}
                                                : (fs::path(sweep_dir) / "runs" / run.spec.test_id).string();
      try {
        outcome.results[i] = execute_run(run.spec, dir);
      } catch (const std::exception& e) {
        RunResult failed;
        failed.test_id = run.spec.test_id;
        failed.scenario_id = run.scenario_id;
        failed.target_id = run.spec.scenario.target().id;
        failed.modality = run.modality;
        failed.predictor = run.spec.predictor.to_string();
        failed.imputation = to_string(run.spec.imputation);
        failed.seed = run.spec.sensor.seed;
        failed.horizon = run.spec.horizon;
        failed.history_rate = run.spec.history_rate;
        failed.status = "failed";
        failed.error = e.what();
        if (!dir.empty()) write_text_file((fs::path(dir) / "result.json").string(), to_json(failed).dump(2) + "\n");
        outcome.results[i] = std::move(failed);
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(sweep.parallel), outcome.runs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  outcome.groups = compute_selections(outcome.runs, outcome.results);

  if (!sweep_dir.empty()) {
    auto doc = to_json(sweep);
    auto runs = nlohmann::ordered_json::array();
    for (const auto& r : outcome.runs)
      runs.push_back({{"test_id", r.spec.test_id},
                      {"scenario_id", r.scenario_id},
                      {"modality", r.modality},
                      {"value", r.value},
                      {"replication", r.replication}});
    doc["runs"] = runs;
    write_text_file((fs::path(sweep_dir) / "sweep.json").string(), doc.dump(2) + "\n");
    emit_report(sweep, outcome, sweep_dir, ReportFormat::both);
  }

  const bool any_ok = std::any_of(outcome.results.begin(), outcome.results.end(),
                                  [](const RunResult& r) { return r.status == "ok"; });
  if (!any_ok) throw std::runtime_error("sweep '" + sweep.name + "': no run succeeded");
  return outcome;
}

// ---------------------------------------------------------------------------
// Reports

void emit_report(const SweepSpec& sweep, const SweepOutcome& outcome, const std::string& dir, ReportFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create report directory '" + dir + "': " + ec.message());

  auto selected_for = [&](const SweepRun& run) -> std::optional<double> {
    for (const auto& g : outcome.groups)
      if (g.scenario_id == run.scenario_id && g.modality == run.modality) return g.selected;
    return std::nullopt;
  };
  auto target_frames = [](const RunResult& r) -> std::string {
    auto it = r.detection.frames_detected.find(r.target_id);
    return it == r.detection.frames_detected.end() ? std::string{} : std::to_string(it->second);
  };

  if (format != ReportFormat::json) {
    std::ostringstream m;
    m << "test_id,scenario_id,modality,parameter,value,replication,seed,status,divergence_rmse,gap,"
         "target_frames_detected,frames_total,selected\n";
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
      const auto& run = outcome.runs[i];
      const auto& r = outcome.results[i];
      const auto sel = selected_for(run);
      m << r.test_id << ',' << run.scenario_id << ',' << run.modality << ',' << sweep.parameter << ','
        << fmt_number(run.value) << ',' << run.replication << ',' << r.seed << ',' << r.status << ','
        << fmt_optional(r.divergence_rmse) << ',' << fmt_optional(r.gap) << ',' << target_frames(r)
        << ',' << r.detection.frames_total << ',' << ((sel && *sel == run.value) ? 1 : 0) << '\n';
    }
    write_text_file((fs::path(dir) / "metrics.csv").string(), m.str());

    fs::create_directories(fs::path(dir) / "curves");
    for (const auto& r : outcome.results) {
      std::ostringstream c;
      c << "step,horizon_s,rmse_gt,rmse_sensor,rmse_gt_x,rmse_gt_y,rmse_sensor_x,rmse_sensor_y,rmse_2d,rmse_x,rmse_y\n";
      const auto& cv = r.curves;
      auto cell = [](const std::vector<double>& v, int k) {
        return static_cast<std::size_t>(k) < v.size() ? fmt_number(v[static_cast<std::size_t>(k)]) : std::string{};
      };
      for (int k = 0; k < r.horizon; ++k) {
        c << (k + 1) << ',' << fmt_number((k + 1) / r.history_rate) << ',' << cell(cv.rmse_gt, k) << ','
          << cell(cv.rmse_sensor, k) << ',' << cell(cv.rmse_gt_x, k) << ',' << cell(cv.rmse_gt_y, k) << ','
          << cell(cv.rmse_sensor_x, k) << ',' << cell(cv.rmse_sensor_y, k) << ',' << cell(cv.rmse_div_2d, k) << ','
          << cell(cv.rmse_div_x, k) << ',' << cell(cv.rmse_div_y, k) << '\n';
      }
      write_text_file((fs::path(dir) / "curves" / (r.test_id + ".csv")).string(), c.str());
    }
  }

  if (format != ReportFormat::csv) {
    nlohmann::ordered_json doc;
    doc["name"] = sweep.name;
    doc["parameter"] = sweep.parameter;
    doc["values"] = sweep.values;
    doc["replications"] = sweep.replications;
    auto groups = nlohmann::ordered_json::array();
    for (const auto& g : outcome.groups) {
      auto vals = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < g.values.size(); ++i)
        vals.push_back({{"value", g.values[i]},
                        {"aggregate_divergence", opt_json(g.aggregate[i])},
                        {"successful_runs", g.successful_runs[i]},
                        {"no_detection_runs", g.no_detection_runs[i]},
                        {"failed_runs", g.failed_runs[i]}});
      groups.push_back(
          {{"scenario_id", g.scenario_id}, {"modality", g.modality}, {"selected", opt_json(g.selected)}, {"values", vals}});
    }
    doc["groups"] = groups;
    auto runs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
      const auto& run = outcome.runs[i];
      const auto& r = outcome.results[i];
      nlohmann::ordered_json detected = nlohmann::ordered_json::object();
      for (const auto& [id, n] : r.detection.frames_detected) detected[id] = n;
      runs.push_back({{"test_id", r.test_id},
                      {"scenario_id", run.scenario_id},
                      {"modality", run.modality},
                      {"value", run.value},
                      {"replication", run.replication},
                      {"seed", r.seed},
                      {"status", r.status},
                      {"divergence_rmse", opt_json(r.divergence_rmse)},
                      {"gap", opt_json(r.gap)},
                      {"detection", {{"frames_total", r.detection.frames_total}, {"frames_detected", detected}}}});
    }
    doc["runs"] = runs;
    write_text_file((fs::path(dir) / "summary.json").string(), doc.dump(2) + "\n");
  }
}

nlohmann::ordered_json to_json(const SweepSpec& sweep) {
  nlohmann::ordered_json doc;
  doc["name"] = sweep.name;
  doc["parameter"] = sweep.parameter;
  doc["values"] = sweep.values;
  doc["replications"] = sweep.replications;
  auto scen = nlohmann::ordered_json::array();
  for (const auto& s : sweep.scenarios) scen.push_back(s);
  doc["scenarios"] = scen;
  auto mods = nlohmann::ordered_json::array();
  for (auto m : sweep.modalities) mods.push_back(to_string(m));
  doc["modalities"] = mods;
  doc["predictor"] = sweep.base.predictor.to_string();
  doc["impute"] = to_string(sweep.base.imputation);
  doc["base_sensor"] = to_json(sweep.base.sensor);
  return doc;
}

SweepOutcome load_sweep(const std::string& sweep_dir, SweepSpec& sweep) {
  const fs::path root(sweep_dir);
  if (!fs::is_directory(root)) throw std::runtime_error("sweep directory not found: '" + sweep_dir + "'");
  const auto doc = read_json_file((root / "sweep.json").string());
  sweep.name = doc.at("name").get<std::string>();
  sweep.parameter = doc.at("parameter").get<std::string>();
  sweep.values = doc.at("values").get<std::vector<double>>();
  sweep.replications = doc.at("replications").get<int>();
  sweep.scenarios = doc.at("scenarios").get<std::vector<std::string>>();
  sweep.modalities.clear();
  for (const auto& m : doc.at("modalities")) sweep.modalities.push_back(modality_from_string(m.get<std::string>()));

  SweepOutcome outcome;
  for (const auto& r : doc.at("runs")) {
    SweepRun run;
    run.spec.test_id = r.at("test_id").get<std::string>();
    run.scenario_id = r.at("scenario_id").get<std::string>();
    run.modality = r.at("modality").get<std::string>();
    run.value = r.at("value").get<double>();
    run.replication = r.at("replication").get<int>();
    outcome.results.push_back(run_result_from_json(read_json_file((root / "runs" / run.spec.test_id / "result.json").string())));
    outcome.runs.push_back(std::move(run));
  }
  outcome.groups = compute_selections(outcome.runs, outcome.results);
  return outcome;
}

}  // namespace percept
