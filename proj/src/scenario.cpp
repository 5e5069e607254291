#include "percept/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "percept/json_util.hpp"

namespace percept {

namespace {

VehicleSpec make_vehicle(std::string id, VehicleRole role, double length, double width, double height,
                         int lane, double station, double speed) {
  VehicleSpec v;
  v.id = std::move(id);
  v.role = role;
  v.length = length;
  v.width = width;
  v.height = height;
  v.lane = lane;
  v.station = station;
  v.speed = speed;
  return v;
}

// Speed along the lane at time t.
double speed_at(const VehicleSpec& v, const ManeuverPlan* speed_plan, double t) {
  if (speed_plan == nullptr || speed_plan->speed_profile.empty()) return v.speed;
  const auto& prof = speed_plan->speed_profile;
  if (t <= prof.front().time) return prof.front().speed;
  if (t >= prof.back().time) return prof.back().speed;
  auto hi = std::upper_bound(prof.begin(), prof.end(), t,
                             [](double value, const SpeedPoint& p) { return value < p.time; });
  auto lo = hi - 1;
  const double a = (t - lo->time) / (hi->time - lo->time);
  return lo->speed + a * (hi->speed - lo->speed);
}

double accel_at(const ManeuverPlan* speed_plan, double t) {
  if (speed_plan == nullptr || speed_plan->speed_profile.size() < 2) return 0.0;
  const auto& prof = speed_plan->speed_profile;
  if (t < prof.front().time || t >= prof.back().time) return 0.0;
  auto hi = std::upper_bound(prof.begin(), prof.end(), t,
                             [](double value, const SpeedPoint& p) { return value < p.time; });
  auto lo = hi - 1;
  return (hi->speed - lo->speed) / (hi->time - lo->time);
}

struct LateralState {
  double offset = 0.0;
  double rate = 0.0;
  double accel = 0.0;
};

LateralState lateral_at(const ManeuverPlan* lc, double lane_width, double base, double t) {
  LateralState s{base, 0.0, 0.0};
  if (lc == nullptr) return s;
  const double dy = (lc->final_lane - lc->initial_lane) * lane_width;
  const double tau = (t - lc->start_time) / lc->duration;
  s.offset = base + lateral_profile(*lc, lane_width, t);
  if (tau > 0.0 && tau < 1.0) {
    const double d1 = 30.0 * tau * tau - 60.0 * tau * tau * tau + 30.0 * std::pow(tau, 4);
    const double d2 = 60.0 * tau - 180.0 * tau * tau + 120.0 * tau * tau * tau;
    s.rate = dy * d1 / lc->duration;
    s.accel = dy * d2 / (lc->duration * lc->duration);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Road geometry

void RoadGeometry::validate() const {
  if (lane_count < 2) throw std::invalid_argument("road: lane_count must be >= 2");
  if (!(lane_width > 0.0)) throw std::invalid_argument("road: lane_width must be > 0");
  if (!(length > 0.0)) throw std::invalid_argument("road: length must be > 0");
  if (kind == RoadKind::arc && !(arc_radius > 100.0))
    throw std::invalid_argument("road: arc_radius must be > 100 m");
}

int RoadGeometry::lane_of(double d) const {
  const int lane = static_cast<int>(std::floor(d / lane_width));
  return std::clamp(lane, 0, lane_count - 1);
}

Vec2 RoadGeometry::to_global(double station, double offset) const {
  if (kind == RoadKind::straight) return {station, offset};
  const double phi = station / arc_radius;
  const double r = arc_radius - offset;
  return {r * std::sin(phi), arc_radius - r * std::cos(phi)};
}

std::pair<double, double> RoadGeometry::project(Vec2 p) const {
  if (kind == RoadKind::straight) return {p.x, p.y};
  const double dy = arc_radius - p.y;
  const double phi = std::atan2(p.x, dy);
  const double r = std::hypot(p.x, dy);
  return {arc_radius * phi, arc_radius - r};
}

double RoadGeometry::heading_at(double station) const {
  return kind == RoadKind::straight ? 0.0 : station / arc_radius;
}

double road_angle(const RoadGeometry& road, double station) {
  if (station < 0.0 || station > road.length)
    throw std::out_of_range("road_angle: station " + std::to_string(station) + " outside [0, " +
                            std::to_string(road.length) + "]");
  return road.heading_at(station);
}

// ---------------------------------------------------------------------------
// Scenario spec

void ScenarioSpec::validate(double min_duration) const {
  road.validate();
  if (!(sim_step > 0.0)) throw std::invalid_argument("scenario " + id + ": sim_step must be > 0");
  if (duration < min_duration)
    throw std::invalid_argument("scenario " + id + ": duration shorter than history + horizon");
  int egos = 0;
  int targets = 0;
  for (const auto& v : vehicles) {
    if (v.id.empty()) throw std::invalid_argument("scenario " + id + ": vehicle with empty id");
    if (!(v.length > 0.0 && v.width > 0.0 && v.height > 0.0))
      throw std::invalid_argument("vehicle " + v.id + ": dimensions must be > 0");
    if (v.lane < 0 || v.lane >= road.lane_count)
      throw std::invalid_argument("vehicle " + v.id + ": lane outside road");
    egos += v.role == VehicleRole::ego;
    targets += v.role == VehicleRole::target;
    const auto dup = std::count_if(vehicles.begin(), vehicles.end(),
                                   [&](const VehicleSpec& o) { return o.id == v.id; });
    if (dup != 1) throw std::invalid_argument("scenario " + id + ": duplicate vehicle id " + v.id);
  }
  if (egos != 1 || targets != 1)
    throw std::invalid_argument("scenario " + id + ": exactly one ego and one target required");
  for (const auto& m : maneuvers) {
    const auto it = std::find_if(vehicles.begin(), vehicles.end(),
                                 [&](const VehicleSpec& v) { return v.id == m.vehicle_id; });
    if (it == vehicles.end())
      throw std::invalid_argument("maneuver references unknown vehicle " + m.vehicle_id);
    if (!(m.duration > 0.0)) throw std::invalid_argument("maneuver " + m.vehicle_id + ": duration must be > 0");
    if (m.is_lane_change()) {
      const int delta = m.final_lane - m.initial_lane;
      const int expected = m.kind == ManeuverKind::lane_change_left ? 1 : -1;
      if (delta != expected)
        throw std::invalid_argument("maneuver " + m.vehicle_id + ": lane change must move exactly one lane " +
                                    (expected > 0 ? "left" : "right"));
      if (m.initial_lane != it->lane)
        throw std::invalid_argument("maneuver " + m.vehicle_id + ": initial_lane differs from vehicle lane");
      if (m.final_lane < 0 || m.final_lane >= road.lane_count)
        throw std::invalid_argument("maneuver " + m.vehicle_id + ": final_lane outside road");
      const auto lcs = std::count_if(maneuvers.begin(), maneuvers.end(), [&](const ManeuverPlan& o) {
        return o.vehicle_id == m.vehicle_id && o.is_lane_change();
      });
      if (lcs > 1) throw std::invalid_argument("vehicle " + m.vehicle_id + ": at most one lane change supported");
    }
    for (std::size_t i = 1; i < m.speed_profile.size(); ++i) {
      if (!(m.speed_profile[i].time > m.speed_profile[i - 1].time))
        throw std::invalid_argument("maneuver " + m.vehicle_id + ": speed_profile times must increase");
    }
  }
}

const VehicleSpec& ScenarioSpec::vehicle(const std::string& vid) const {
  for (const auto& v : vehicles)
    if (v.id == vid) return v;
  throw std::invalid_argument("scenario " + id + ": no vehicle " + vid);
}

const VehicleSpec& ScenarioSpec::ego() const {
  for (const auto& v : vehicles)
    if (v.role == VehicleRole::ego) return v;
  throw std::invalid_argument("scenario " + id + ": no ego vehicle");
}

const VehicleSpec& ScenarioSpec::target() const {
  for (const auto& v : vehicles)
    if (v.role == VehicleRole::target) return v;
  throw std::invalid_argument("scenario " + id + ": no target vehicle");
}

std::size_t ScenarioSpec::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration / sim_step + 0.5)) + 1;
}

// ---------------------------------------------------------------------------
// Log access

std::size_t GroundTruthLog::index_of(const std::string& vehicle_id) const {
  for (std::size_t i = 0; i < vehicle_ids.size(); ++i)
    if (vehicle_ids[i] == vehicle_id) return i;
  throw std::invalid_argument("ground truth: no vehicle " + vehicle_id);
}

std::size_t GroundTruthLog::frame_at(double t) const {
  const double idx = std::floor(t / sim_step + 0.5);
  if (idx < 0.0 || idx >= static_cast<double>(frames.size()))
    throw std::out_of_range("ground truth: time " + std::to_string(t) + " outside log");
  return static_cast<std::size_t>(idx);
}

const VehicleState& GroundTruthLog::state(std::size_t frame, const std::string& vehicle_id) const {
  return frames.at(frame).states.at(index_of(vehicle_id));
}

// ---------------------------------------------------------------------------
// Presets

const std::vector<PresetInfo>& preset_catalogue() {
  static const std::vector<PresetInfo> presets = {
      {"Sc-01", "LC to the Right - In front of the Ego car (US101)"},
      {"Sc-02", "LC to the Left - In front of the Ego Car (US101)"},
      {"Sc-03", "LC to the Right - In front of the Lead Car (US101)"},
      {"Sc-04", "LC to the Left - In front of the Lead Car (US101)"},
      {"Sc-05", "LC to the Right - In front of the Lead Car (Straight Road)"},
      {"Sc-06", "LC to the Left - In front of the Lead Car (Straight Road)"},
  };
  return presets;
}

ScenarioSpec preset_scenario(const std::string& id) {
  const auto& cat = preset_catalogue();
  const auto it = std::find_if(cat.begin(), cat.end(), [&](const PresetInfo& p) { return p.id == id; });
  if (it == cat.end()) {
    std::string valid;
    for (const auto& p : cat) valid += (valid.empty() ? "" : ", ") + p.id;
    throw std::invalid_argument("unknown scenario '" + id + "' (valid: " + valid + ")");
  }
  const int number = static_cast<int>(it - cat.begin()) + 1;
  const bool curved = number <= 4;
  const bool to_right = number % 2 == 1;
  const bool ahead_of_lead = number >= 3;

  ScenarioSpec spec;
  spec.id = id;
  spec.description = it->description;
  spec.road.kind = curved ? RoadKind::arc : RoadKind::straight;
  spec.road.lane_count = 5;
  spec.road.lane_width = 3.6;
  spec.road.arc_radius = 600.0;
  spec.road.length = 800.0;
  spec.relative_velocity_kph = 5.0;
  spec.duration = 20.0;
  spec.sim_step = 0.01;

  // Initial gaps and speeds are plausible choices, not survey data.
  const int ego_lane = 2;
  const int origin_lane = to_right ? ego_lane + 1 : ego_lane - 1;
  const int far_side_lane = to_right ? ego_lane - 1 : ego_lane + 1;
  const double ego_station = 60.0;
  const double ego_speed = 25.0;
  const double lead_gap = ahead_of_lead ? 30.0 : 55.0;
  const double target_gap = ahead_of_lead ? lead_gap + 12.0 : 12.0;
  const double target_speed = ego_speed + spec.relative_velocity_kph / 3.6;

  spec.vehicles = {
      make_vehicle("ego", VehicleRole::ego, 4.5, 1.8, 1.5, ego_lane, ego_station, ego_speed),
      make_vehicle("target", VehicleRole::target, 4.8, 1.9, 1.7, origin_lane, ego_station + target_gap,
                   target_speed),
      make_vehicle("lead", VehicleRole::lead, 5.5, 2.0, 2.2, ego_lane, ego_station + lead_gap, ego_speed),
      make_vehicle("NIO", VehicleRole::surround, 4.7, 1.9, 1.5, origin_lane, ego_station + target_gap - 14.0,
                   ego_speed),
      make_vehicle("van", VehicleRole::surround, 5.5, 2.0, 2.2, far_side_lane, ego_station + 20.0, ego_speed),
      make_vehicle("follower", VehicleRole::surround, 4.5, 1.8, 1.5, ego_lane, ego_station - 25.0, ego_speed),
  };

  ManeuverPlan lc;
  lc.vehicle_id = "target";
  lc.kind = to_right ? ManeuverKind::lane_change_right : ManeuverKind::lane_change_left;
  lc.start_time = 6.0;
  lc.duration = 5.0;
  lc.initial_lane = origin_lane;
  lc.final_lane = ego_lane;
  spec.maneuvers.push_back(lc);
  return spec;
}

// ---------------------------------------------------------------------------
// Kinematics

double smoothstep5(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  const double t3 = tau * tau * tau;
  return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

double lateral_profile(const ManeuverPlan& plan, double lane_width, double t) {
  if (!plan.is_lane_change()) return 0.0;
  const double dy = (plan.final_lane - plan.initial_lane) * lane_width;
  return dy * smoothstep5((t - plan.start_time) / plan.duration);
}

GroundTruthLog run_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const auto& road = spec.road;

  GroundTruthLog log;
  log.scenario_id = spec.id;
  log.road = road;
  log.sim_step = spec.sim_step;
  log.vehicles = spec.vehicles;
  for (const auto& v : spec.vehicles) log.vehicle_ids.push_back(v.id);

  const std::size_t n = spec.vehicles.size();
  std::vector<const ManeuverPlan*> lane_changes(n, nullptr);
  std::vector<const ManeuverPlan*> speed_plans(n, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& m : spec.maneuvers) {
      if (m.vehicle_id != spec.vehicles[i].id) continue;
      if (m.is_lane_change()) lane_changes[i] = &m;
      if (!m.speed_profile.empty() && speed_plans[i] == nullptr) speed_plans[i] = &m;
    }
  }

  std::vector<double> stations(n);
  for (std::size_t i = 0; i < n; ++i) stations[i] = spec.vehicles[i].station;

  // Station rate along the reference line for a vehicle moving at `speed`
  // along a path at lateral offset d.
  auto station_rate = [&](std::size_t i, double t) {
    const auto& v = spec.vehicles[i];
    const double speed = speed_at(v, speed_plans[i], t);
    if (road.kind == RoadKind::straight) return speed;
    const double d =
        lateral_at(lane_changes[i], road.lane_width, road.lane_center(v.lane), t).offset;
    return speed * road.arc_radius / (road.arc_radius - d);
  };

  const std::size_t frames = spec.frame_count();
  log.frames.reserve(frames);
  std::vector<std::vector<bool>> overlapping(n, std::vector<bool>(n, false));

  for (std::size_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) * spec.sim_step;
    if (k > 0) {
      // RK4 on ds/dt = rate(t); the rate does not depend on s.
      const double t0 = static_cast<double>(k - 1) * spec.sim_step;
      const double h = spec.sim_step;
      for (std::size_t i = 0; i < n; ++i) {
        const double k1 = station_rate(i, t0);
        const double k2 = station_rate(i, t0 + 0.5 * h);
        const double k4 = station_rate(i, t0 + h);
        stations[i] += h * (k1 + 4.0 * k2 + k4) / 6.0;
      }
    }

    GroundTruthFrame frame;
    frame.t = t;
    frame.states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = spec.vehicles[i];
      const auto lat = lateral_at(lane_changes[i], road.lane_width, road.lane_center(v.lane), t);
      const double s = stations[i];
      if (s < 0.0 || s > road.length || lat.offset < 0.0 || lat.offset > road.width()) {
        throw std::runtime_error("scenario " + spec.id + ": vehicle " + v.id + " left the road at frame " +
                                 std::to_string(k));
      }
      const double lon_speed = speed_at(v, speed_plans[i], t);
      const double lon_accel = accel_at(speed_plans[i], t);
      VehicleState st;
      const Vec2 p = road.to_global(s, lat.offset);
      st.x = p.x;
      st.y = p.y;
      st.road_angle = road.heading_at(s);
      st.yaw = st.road_angle + std::atan2(lat.rate, lon_speed);
      st.speed = std::hypot(lon_speed, lat.rate);
      st.accel = st.speed > 0.0 ? (lon_speed * lon_accel + lat.rate * lat.accel) / st.speed : lon_accel;
      st.lane = road.lane_of(lat.offset);
      st.station = s;
      st.offset = lat.offset;
      frame.states.push_back(st);
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& a = frame.states[i];
        const auto& b = frame.states[j];
        const auto& va = spec.vehicles[i];
        const auto& vb = spec.vehicles[j];
        const bool hit = std::abs(a.station - b.station) < 0.5 * (va.length + vb.length) &&
                         std::abs(a.offset - b.offset) < 0.5 * (va.width + vb.width);
        if (hit && !overlapping[i][j]) log.warnings.push_back({k, va.id, vb.id});
        overlapping[i][j] = hit;
      }
    }
    log.frames.push_back(std::move(frame));
  }
  return log;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_string(RoadKind kind) { return kind == RoadKind::arc ? "arc" : "straight"; }

std::string to_string(VehicleRole role) {
  switch (role) {
    case VehicleRole::ego: return "ego";
    case VehicleRole::target: return "target";
    case VehicleRole::lead: return "lead";
    case VehicleRole::surround: return "surround";
  }
  return "surround";
}

std::string to_string(ManeuverKind kind) {
  switch (kind) {
    case ManeuverKind::keep_lane: return "keep_lane";
    case ManeuverKind::lane_change_left: return "lane_change_left";
    case ManeuverKind::lane_change_right: return "lane_change_right";
  }
  return "keep_lane";
}

namespace {

RoadKind road_kind_from(const std::string& s, const std::string& path) {
  if (s == "straight") return RoadKind::straight;
  if (s == "arc") return RoadKind::arc;
  throw ConfigError("invalid road kind '" + s + "' at '" + path + "'");
}

VehicleRole role_from(const std::string& s, const std::string& path) {
  if (s == "ego") return VehicleRole::ego;
  if (s == "target") return VehicleRole::target;
  if (s == "lead") return VehicleRole::lead;
  if (s == "surround") return VehicleRole::surround;
  throw ConfigError("invalid vehicle role '" + s + "' at '" + path + "'");
}

ManeuverKind maneuver_from(const std::string& s, const std::string& path) {
  if (s == "keep_lane") return ManeuverKind::keep_lane;
  if (s == "lane_change_left") return ManeuverKind::lane_change_left;
  if (s == "lane_change_right") return ManeuverKind::lane_change_right;
  throw ConfigError("invalid maneuver kind '" + s + "' at '" + path + "'");
}

}  // namespace

nlohmann::ordered_json to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json doc;
  doc["id"] = spec.id;
  doc["description"] = spec.description;
  doc["road"] = {{"kind", to_string(spec.road.kind)},
                 {"lane_count", spec.road.lane_count},
                 {"lane_width_m", spec.road.lane_width},
                 {"arc_radius_m", spec.road.arc_radius},
                 {"length_m", spec.road.length}};
  auto vehicles = nlohmann::ordered_json::array();
  for (const auto& v : spec.vehicles) {
    vehicles.push_back({{"id", v.id},
                        {"role", to_string(v.role)},
                        {"length_m", v.length},
                        {"width_m", v.width},
                        {"height_m", v.height},
                        {"lane", v.lane},
                        {"station_m", v.station},
                        {"speed_mps", v.speed}});
  }
  doc["vehicles"] = vehicles;
  auto maneuvers = nlohmann::ordered_json::array();
  for (const auto& m : spec.maneuvers) {
    auto profile = nlohmann::ordered_json::array();
    for (const auto& p : m.speed_profile) profile.push_back({p.time, p.speed});
    maneuvers.push_back({{"vehicle_id", m.vehicle_id},
                         {"kind", to_string(m.kind)},
                         {"start_time_s", m.start_time},
                         {"duration_s", m.duration},
                         {"initial_lane", m.initial_lane},
                         {"final_lane", m.final_lane},
                         {"speed_profile_s_mps", profile}});
  }
  doc["maneuvers"] = maneuvers;
  doc["relative_velocity_kph"] = spec.relative_velocity_kph;
  doc["duration_s"] = spec.duration;
  doc["sim_step_s"] = spec.sim_step;
  return doc;
}

ScenarioSpec scenario_from_json(const nlohmann::json& doc) {
  const std::string root = "scenario";
  reject_unknown_keys(doc,
                      {"id", "description", "road", "vehicles", "maneuvers", "relative_velocity_kph",
                       "duration_s", "sim_step_s"},
                      root);
  ScenarioSpec spec;
  spec.id = get_required<std::string>(doc, "id", root);
  spec.description = get_or<std::string>(doc, "description", "", root);

  const auto& road = doc.at("road");
  reject_unknown_keys(road, {"kind", "lane_count", "lane_width_m", "arc_radius_m", "length_m"}, root + ".road");
  spec.road.kind = road_kind_from(get_required<std::string>(road, "kind", root + ".road"), root + ".road.kind");
  spec.road.lane_count = get_required<int>(road, "lane_count", root + ".road");
  spec.road.lane_width = get_required<double>(road, "lane_width_m", root + ".road");
  spec.road.arc_radius = get_or<double>(road, "arc_radius_m", spec.road.arc_radius, root + ".road");
  spec.road.length = get_required<double>(road, "length_m", root + ".road");

  const auto vehicles = get_required<nlohmann::json>(doc, "vehicles", root);
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const auto& jv = vehicles[i];
    const std::string p = root + ".vehicles[" + std::to_string(i) + "]";
    reject_unknown_keys(jv, {"id", "role", "length_m", "width_m", "height_m", "lane", "station_m", "speed_mps"}, p);
    VehicleSpec v;
    v.id = get_required<std::string>(jv, "id", p);
    v.role = role_from(get_required<std::string>(jv, "role", p), p + ".role");
    v.length = get_required<double>(jv, "length_m", p);
    v.width = get_required<double>(jv, "width_m", p);
    v.height = get_required<double>(jv, "height_m", p);
    v.lane = get_required<int>(jv, "lane", p);
    v.station = get_required<double>(jv, "station_m", p);
    v.speed = get_required<double>(jv, "speed_mps", p);
    spec.vehicles.push_back(v);
  }

  const auto maneuvers = get_or<nlohmann::json>(doc, "maneuvers", nlohmann::json::array(), root);
  for (std::size_t i = 0; i < maneuvers.size(); ++i) {
    const auto& jm = maneuvers[i];
    const std::string p = root + ".maneuvers[" + std::to_string(i) + "]";
    reject_unknown_keys(jm,
                        {"vehicle_id", "kind", "start_time_s", "duration_s", "initial_lane", "final_lane",
                         "speed_profile_s_mps"},
                        p);
    ManeuverPlan m;
    m.vehicle_id = get_required<std::string>(jm, "vehicle_id", p);
    m.kind = maneuver_from(get_required<std::string>(jm, "kind", p), p + ".kind");
    m.start_time = get_or<double>(jm, "start_time_s", 0.0, p);
    m.duration = get_or<double>(jm, "duration_s", 5.0, p);
    m.initial_lane = get_or<int>(jm, "initial_lane", 0, p);
    m.final_lane = get_or<int>(jm, "final_lane", m.initial_lane, p);
    const auto profile = get_or<std::vector<std::pair<double, double>>>(
        jm, "speed_profile_s_mps", std::vector<std::pair<double, double>>{}, p);
    for (const auto& [time, speed] : profile) m.speed_profile.push_back({time, speed});
    spec.maneuvers.push_back(m);
  }
  spec.relative_velocity_kph = get_or<double>(doc, "relative_velocity_kph", 5.0, root);
  spec.duration = get_required<double>(doc, "duration_s", root);
  spec.sim_step = get_or<double>(doc, "sim_step_s", 0.01, root);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

void write_ground_truth_csv(const GroundTruthLog& log, std::ostream& out) {
  out << "t,vehicle_id,x_m,y_m,yaw_rad,speed_mps,accel_mps2,lane,road_angle_rad\n";
  out << std::setprecision(17);
  for (const auto& frame : log.frames) {
    for (std::size_t i = 0; i < frame.states.size(); ++i) {
      const auto& s = frame.states[i];
      out << frame.t << ',' << log.vehicle_ids[i] << ',' << s.x << ',' << s.y << ',' << s.yaw << ',' << s.speed
          << ',' << s.accel << ',' << s.lane << ',' << s.road_angle << '\n';
    }
  }
}

}  // namespace percept
