#pragma once
// Deterministic highway lane-change scenarios and ground-truth logging.
//
// Road frame: station s runs along the reference line (the right road edge),
// lateral offset d is measured to the left of it. Lane 0 is the rightmost
// lane and lane k is centered at d = (k + 0.5) * lane_width. Left is +y in
// every vehicle-aligned frame used by the project.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace percept {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }

/// Planar pose in the global frame.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

enum class RoadKind { straight, arc };

struct RoadGeometry {
  RoadKind kind = RoadKind::straight;
  int lane_count = 5;
  double lane_width = 3.6;
  double arc_radius = 600.0;  // arc only
  double length = 800.0;

  void validate() const;

  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  double width() const { return lane_count * lane_width; }
  /// Lane containing lateral offset d (clamped into the carriageway).
  int lane_of(double d) const;

  /// Global position of road coordinates (station, lateral offset).
  Vec2 to_global(double station, double offset) const;
  /// Inverse of to_global: returns (station, offset). Not range checked.
  std::pair<double, double> project(Vec2 p) const;
  /// Tangent heading at a station with no range check.
  double heading_at(double station) const;
};

/// Heading of the centerline tangent relative to the start heading.
/// Throws std::out_of_range when station is outside [0, length].
double road_angle(const RoadGeometry& road, double station);

enum class VehicleRole { ego, target, lead, surround };

struct VehicleSpec {
  std::string id;
  double length = 4.5;
  double width = 1.8;
  double height = 1.5;
  VehicleRole role = VehicleRole::surround;
  // initial state
  int lane = 0;
  double station = 0.0;
  double speed = 0.0;
};

enum class ManeuverKind { keep_lane, lane_change_left, lane_change_right };

struct SpeedPoint {
  double time = 0.0;
  double speed = 0.0;
};

struct ManeuverPlan {
  std::string vehicle_id;
  ManeuverKind kind = ManeuverKind::keep_lane;
  double start_time = 0.0;
  double duration = 5.0;
  int initial_lane = 0;
  int final_lane = 0;
  std::vector<SpeedPoint> speed_profile;

  bool is_lane_change() const { return kind != ManeuverKind::keep_lane; }
};

struct ScenarioSpec {
  std::string id;
  std::string description;
  RoadGeometry road;
  std::vector<VehicleSpec> vehicles;
  std::vector<ManeuverPlan> maneuvers;
  double relative_velocity_kph = 5.0;
  double duration = 20.0;
  double sim_step = 0.01;

  /// Throws std::invalid_argument naming the violated invariant.
  /// `min_duration` is the history window plus prediction horizon.
  void validate(double min_duration = 8.0) const;

  const VehicleSpec& vehicle(const std::string& id) const;
  const VehicleSpec& ego() const;
  const VehicleSpec& target() const;
  std::size_t frame_count() const;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  int lane = 0;
  double road_angle = 0.0;
  double station = 0.0;
  double offset = 0.0;
};

struct GroundTruthFrame {
  double t = 0.0;
  std::vector<VehicleState> states;  // parallel to GroundTruthLog::vehicle_ids
};

struct CollisionWarning {
  std::size_t frame = 0;
  std::string first;
  std::string second;
};

struct GroundTruthLog {
  std::string scenario_id;
  RoadGeometry road;
  double sim_step = 0.01;
  std::vector<std::string> vehicle_ids;
  std::vector<VehicleSpec> vehicles;  // parallel to vehicle_ids
  std::vector<GroundTruthFrame> frames;
  std::vector<CollisionWarning> warnings;

  std::size_t index_of(const std::string& vehicle_id) const;
  /// Frame nearest to time t.
  std::size_t frame_at(double t) const;
  const VehicleState& state(std::size_t frame, const std::string& vehicle_id) const;
};

/// Catalogue of shipped presets.
struct PresetInfo {
  std::string id;
  std::string description;
};
const std::vector<PresetInfo>& preset_catalogue();

/// Throws std::invalid_argument ("unknown scenario ...") listing valid ids.
ScenarioSpec preset_scenario(const std::string& id);

/// Quintic smoothstep 10t^3 - 15t^4 + 6t^5 with t clamped to [0, 1].
double smoothstep5(double tau);

/// Signed lateral offset of a lane change at time t, positive to the left.
/// Magnitude grows from 0 to |final - initial| * lane_width.
double lateral_profile(const ManeuverPlan& plan, double lane_width, double t);

/// Integrates every vehicle at spec.sim_step. Throws std::runtime_error with
/// the frame index when a vehicle leaves the road.
GroundTruthLog run_scenario(const ScenarioSpec& spec);

// Serialization.
std::string to_string(RoadKind kind);
std::string to_string(VehicleRole role);
std::string to_string(ManeuverKind kind);

nlohmann::ordered_json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& doc);

void write_ground_truth_csv(const GroundTruthLog& log, std::ostream& out);

}  // namespace percept
