#pragma once
// Track preprocessing: neighbor selection around the target, conversion into
// the target's road-aligned frame, fixed-rate history assembly on a 13 x 3
// social grid, and optional gap imputation.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/scenario.hpp"
#include "percept/sensor.hpp"

namespace percept {

inline constexpr double kNeighborLongitudinalBound = 27.43;  // m, 90 ft
inline constexpr double kGridCellLength = 4.57;              // m, 15 ft
inline constexpr int kGridRows = 13;
inline constexpr int kGridCols = 3;
inline constexpr int kHistoryFrames = 16;  // 3 s at 5 Hz including the current frame
inline constexpr double kHistoryRate = 5.0;
inline constexpr int kHorizonFrames = 25;  // 5 s at 5 Hz

/// Target is not present in the source at the requested time.
class TargetAbsent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Target has no present frame anywhere in the history window.
class TargetNeverDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FrameOfReference { global, ego, target };

struct TrackSample {
  double t = 0.0;
  double x = 0.0;  // meaningless when !present
  double y = 0.0;
  bool present = false;
};

struct TrackHistory {
  std::string vehicle_id;
  std::vector<TrackSample> frames;
  FrameOfReference frame_of_reference = FrameOfReference::global;

  std::size_t present_count() const;
  bool complete() const { return present_count() == frames.size(); }
};

struct GridCell {
  int row = 0;  // 0 = rearmost, 6 = target's own row, 12 = foremost
  int col = 1;  // 0 = left lane, 1 = same lane, 2 = right lane

  auto operator<=>(const GridCell&) const = default;
};

struct NeighborGrid {
  TrackHistory target;
  std::map<GridCell, TrackHistory> cells;
};

enum class SourceKind { ground_truth, detections };

/// Either the ground-truth log or a detection stream lifted into the global
/// frame. Detection streams are sampled with latest-sample-hold. The ego
/// vehicle is always known to itself and is taken from ground truth in both.
class TrackSource {
 public:
  static TrackSource ground_truth(const GroundTruthLog& log);
  static TrackSource detections(const GroundTruthLog& log, const DetectionSet& set);

  SourceKind kind() const { return kind_; }
  const RoadGeometry& road() const { return log_->road; }
  const GroundTruthLog& log() const { return *log_; }

  /// Vehicles visible at time t, keyed by id.
  std::map<std::string, Vec2> snapshot(double t) const;
  std::optional<Vec2> position(const std::string& vehicle_id, double t) const;

 private:
  TrackSource() = default;
  const std::map<std::string, Vec2>* detection_frame_at(double t) const;

  SourceKind kind_ = SourceKind::ground_truth;
  const GroundTruthLog* log_ = nullptr;
  std::vector<double> times_;
  std::vector<std::map<std::string, Vec2>> frames_;
};

/// Road-aligned pose used as the origin of the target frame.
Pose2 target_anchor(const RoadGeometry& road, Vec2 target_position);

Vec2 to_target_frame(Vec2 point, Vec2 target_position, double road_angle);
Vec2 from_target_frame(Vec2 local, Vec2 target_position, double road_angle);

/// Grid cell of a point already in the target frame, or nothing when it lies
/// outside the neighbor boundary. Points on a bin edge go to the bin nearer
/// the target.
std::optional<GridCell> assign_cell(Vec2 local, double lane_width);

/// Neighbors of the target at time t inside the +/-27.43 m, +/-1 lane box.
/// Throws TargetAbsent when the source lacks the target at t.
std::vector<std::string> select_neighbors(const TrackSource& source, const std::string& target_id, double t);

struct ModelInput {
  std::string scenario_id;
  std::string target_id;
  SourceKind source = SourceKind::ground_truth;
  double t = 0.0;
  NeighborGrid grid;
  double history_rate = kHistoryRate;
  int horizon = kHorizonFrames;
  Pose2 anchor;                    // target frame origin in global coordinates
  double lane_width = 3.6;
  double target_lane_offset = 0.0; // target offset from its lane center, + left
};

ModelInput assemble_history(const TrackSource& source, const std::string& target_id, double t,
                            int history_frames = kHistoryFrames, double rate = kHistoryRate,
                            int horizon = kHorizonFrames);

/// Fills interior gaps by per-axis linear interpolation and leading/trailing
/// gaps by holding the nearest present value. Needs >= 2 present frames.
TrackHistory impute_linear(const TrackHistory& history);

/// Applies impute_linear to the target and to every neighbor with >= 2
/// present frames. Throws std::invalid_argument if the target cannot be imputed.
ModelInput impute_model_input(const ModelInput& input);

/// Exact wire-protocol request.
nlohmann::ordered_json to_protocol_request(const ModelInput& input, std::uint64_t id);
/// Request plus the metadata needed to map predictions back to the world.
nlohmann::ordered_json to_json(const ModelInput& input);
ModelInput model_input_from_json(const nlohmann::json& doc);

nlohmann::ordered_json track_to_json(const TrackHistory& history);

}  // namespace percept
