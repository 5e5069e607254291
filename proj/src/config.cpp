#include "percept/config.hpp"

#include <cstdlib>

#include "percept/json_util.hpp"

namespace percept {

namespace {

void check_version(const nlohmann::json& doc, const std::string& path) {
  const int version = get_required<int>(doc, "version", path);
  if (version != kConfigVersion)
    throw ConfigError("unsupported config version " + std::to_string(version) + " at '" + path + ".version'");
}

ScenarioSpec scenario_entry(const nlohmann::json& node, const std::string& path) {
  if (node.is_string()) return preset_scenario(node.get<std::string>());
  if (node.is_object()) {
    try {
      return scenario_from_json(node);
    } catch (const ConfigError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("invalid scenario at '" + path + "': " + e.what());
    }
  }
  throw ConfigError("'" + path + "' must be a preset id or a scenario object");
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc, const std::string& path, bool top_level) {
  if (top_level) {
    reject_unknown_keys(doc,
                        {"version", "scenario", "sensor", "detection", "predictor", "impute", "prediction_times_s",
                         "test_id", "history_frames", "history_rate_hz", "horizon_frames", "out_dir"},
                        path);
    check_version(doc, path);
  } else {
    reject_unknown_keys(doc,
                        {"scenario", "sensor", "detection", "predictor", "impute", "prediction_times_s",
                         "history_frames", "history_rate_hz", "horizon_frames"},
                        path);
  }

  RunConfig cfg;
  auto& run = cfg.run;
  if (auto it = doc.find("scenario"); it != doc.end()) run.scenario = scenario_entry(*it, path + ".scenario");
  else run.scenario = preset_scenario("Sc-01");

  const nlohmann::json sensor = get_or<nlohmann::json>(doc, "sensor", nlohmann::json::object(), path);
  run.sensor = sensor_from_json(sensor, SensorConfig::default_radar(), path + ".sensor");

  if (auto it = doc.find("detection"); it != doc.end()) {
    reject_unknown_keys(*it, {"confidence_threshold"}, path + ".detection");
    run.detection.confidence_threshold =
        get_or<double>(*it, "confidence_threshold", run.detection.confidence_threshold, path + ".detection");
    if (!(run.detection.confidence_threshold >= 0.0 && run.detection.confidence_threshold <= 1.0))
      throw ConfigError("confidence_threshold must be in [0, 1] at '" + path + ".detection'");
  }
  try {
    run.predictor = PredictorId::parse(get_or<std::string>(doc, "predictor", "cv", path));
    run.imputation = imputation_from_string(get_or<std::string>(doc, "impute", "none", path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " at '" + path + "'");
  }
  run.prediction_times = get_or<std::vector<double>>(doc, "prediction_times_s", {}, path);
  run.history_frames = get_or<int>(doc, "history_frames", run.history_frames, path);
  run.history_rate = get_or<double>(doc, "history_rate_hz", run.history_rate, path);
  run.horizon = get_or<int>(doc, "horizon_frames", run.horizon, path);
  if (top_level) {
    run.test_id = get_or<std::string>(doc, "test_id", "", path);
    cfg.out_dir = get_or<std::string>(doc, "out_dir", "", path);
  }
  if (run.test_id.empty()) run.test_id = make_test_id(run.scenario, run.sensor.hfov_deg);
  return cfg;
}

SweepConfig parse_sweep_config(const nlohmann::json& doc) {
  const std::string path = "config";
  reject_unknown_keys(doc,
                      {"version", "name", "base", "scenarios", "modalities", "parameter", "values", "replications",
                       "parallel", "out_dir"},
                      path);
  check_version(doc, path);
  SweepConfig cfg;
  auto& s = cfg.sweep;
  const nlohmann::json base = get_or<nlohmann::json>(doc, "base", nlohmann::json::object(), path);
  s.base = parse_run_config(base, path + ".base", false).run;
  if (auto it = base.find("sensor"); it != base.end()) {
    s.sensor_overrides = *it;
    s.sensor_overrides.erase("modality");
  }
  s.name = get_or<std::string>(doc, "name", "sweep", path);
  s.scenarios = get_or<std::vector<std::string>>(doc, "scenarios", {}, path);
  for (const auto& m : get_or<std::vector<std::string>>(doc, "modalities", {}, path)) {
    try {
      s.modalities.push_back(modality_from_string(m));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(e.what()) + " at '" + path + ".modalities'");
    }
  }
  s.parameter = get_or<std::string>(doc, "parameter", "hfov_deg", path);
  if (!doc.contains("values")) throw ConfigError("missing required key '" + path + ".values'");
  s.values = get_required<std::vector<double>>(doc, "values", path);
  if (s.values.empty()) throw ConfigError("'" + path + ".values' must not be empty");
  // Noisy sensors get several seeds by default, noise-free ones one.
  s.replications = get_or<int>(doc, "replications", s.base.sensor.noise_enabled ? 5 : 1, path);
  s.parallel = get_or<int>(doc, "parallel", 1, path);
  cfg.out_dir = get_or<std::string>(doc, "out_dir", "", path);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

nlohmann::ordered_json default_sweep_document() {
  nlohmann::ordered_json doc;
  doc["version"] = kConfigVersion;
  doc["name"] = "hfov";
  doc["base"] = {{"sensor", {{"vfov_deg", 15.0}, {"range_m", 100.0}, {"seed", 1}, {"noise_enabled", true}}},
                 {"detection", {{"confidence_threshold", 0.6}}},
                 {"predictor", "cv"},
                 {"impute", "none"}};
  doc["scenarios"] = {"Sc-01", "Sc-02", "Sc-03", "Sc-04", "Sc-05", "Sc-06"};
  doc["modalities"] = {"radar", "camera"};
  doc["parameter"] = "hfov_deg";
  doc["values"] = {30, 60, 90, 120, 150, 180};
  doc["replications"] = 1;
  return doc;
}

std::string resolve_out_dir(const std::optional<std::string>& flag, const std::string& config_value) {
  if (flag && !flag->empty()) return *flag;
  if (!config_value.empty()) return config_value;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return kDefaultOutDir;
}

}  // namespace percept
