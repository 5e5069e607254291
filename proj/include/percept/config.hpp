#pragma once
// Versioned JSON configuration for runs and sweeps.
//
// Run document:
//   {"version": 1, "scenario": "Sc-01" | {...}, "sensor": {...},
//    "detection": {"confidence_threshold": 0.6}, "predictor": "cv",
//    "impute": "none", "prediction_times_s": [...], "test_id": "...",
//    "history_frames": 16, "history_rate_hz": 5, "horizon_frames": 25,
//    "out_dir": "..."}
// Sweep document:
//   {"version": 1, "name": "...", "base": {run keys without version},
//    "scenarios": [...], "modalities": [...], "parameter": "hfov_deg",
//    "values": [...], "replications": 1, "parallel": 4, "out_dir": "..."}

#include <optional>
#include <string>

#include <json.hpp>

#include "percept/evaluation.hpp"

namespace percept {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kDefaultOutDir = "percept_out";
inline constexpr const char* kOutDirEnv = "PERCEPT_SWEEP_OUT";

struct RunConfig {
  RunSpec run;
  std::string out_dir;  // empty when not given
};

struct SweepConfig {
  SweepSpec sweep;
  std::string out_dir;
};

/// Parses run keys at `path`; `top_level` requires and checks "version".
RunConfig parse_run_config(const nlohmann::json& doc, const std::string& path = "config", bool top_level = true);
SweepConfig parse_sweep_config(const nlohmann::json& doc);

/// HFOV sweep over all presets and both modalities.
nlohmann::ordered_json default_sweep_document();

/// --out-dir flag, then the config value, then $PERCEPT_SWEEP_OUT, then ./percept_out.
std::string resolve_out_dir(const std::optional<std::string>& flag, const std::string& config_value);

}  // namespace percept
