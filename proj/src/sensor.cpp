#include "percept/sensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "percept/json_util.hpp"

namespace percept {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kBoltzmann = 1.380649e-23;  // J/K
constexpr double kReferenceTemp = 290.0;     // K
constexpr double kSpeedOfLight = 299792458.0;

double deg2rad(double d) { return d * kPi / 180.0; }
double rad2deg(double r) { return r * 180.0 / kPi; }

double wrap_near(double angle, double reference) {
  while (angle - reference > kPi) angle -= kTwoPi;
  while (angle - reference < -kPi) angle += kTwoPi;
  return angle;
}

// Smallest |a| over the interval [lo, hi] taken modulo 2*pi.
double nearest_abs_angle(double lo, double hi) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = -1; k <= 1; ++k) {
    const double zero = k * kTwoPi;
    if (lo <= zero && zero <= hi) return 0.0;
    best = std::min({best, std::abs(lo - zero), std::abs(hi - zero)});
  }
  return best;
}

std::array<Vec2, 4> footprint_corners(const Box3& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.length;
  const double hw = 0.5 * box.width;
  std::array<Vec2, 4> out;
  const double signs[4][2] = {{1, 1}, {1, -1}, {-1, -1}, {-1, 1}};
  for (int i = 0; i < 4; ++i) {
    const double lx = signs[i][0] * hl;
    const double ly = signs[i][1] * hw;
    out[i] = {box.x + c * lx - s * ly, box.y + s * lx + c * ly};
  }
  return out;
}

std::vector<std::size_t> non_ego_vehicles(const GroundTruthLog& log) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < log.vehicles.size(); ++i)
    if (log.vehicles[i].role != VehicleRole::ego) out.push_back(i);
  return out;
}

std::size_t ego_index(const GroundTruthLog& log) {
  for (std::size_t i = 0; i < log.vehicles.size(); ++i)
    if (log.vehicles[i].role == VehicleRole::ego) return i;
  throw std::invalid_argument("ground truth has no ego vehicle");
}

double radial_speed(const GroundTruthLog& log, std::size_t frame, std::size_t vehicle, const Pose2& sensor) {
  const auto& st = log.frames[frame].states[vehicle];
  const auto& ego = log.frames[frame].states[ego_index(log)];
  const double rx = st.x - sensor.x;
  const double ry = st.y - sensor.y;
  const double r = std::hypot(rx, ry);
  if (r <= 0.0) return 0.0;
  const double vx = st.speed * std::cos(st.yaw) - ego.speed * std::cos(ego.yaw);
  const double vy = st.speed * std::sin(st.yaw) - ego.speed * std::sin(ego.yaw);
  return (vx * rx + vy * ry) / r;
}

struct Seen {
  std::size_t vehicle = 0;
  Box3 box;
  AngularExtent extent;
};

std::vector<Seen> observe(const GroundTruthLog& log, std::size_t frame, const SensorConfig& config,
                          Pose2& sensor_out) {
  sensor_out = sensor_pose(log, frame, config.mount);
  std::vector<Seen> seen;
  for (std::size_t v : non_ego_vehicles(log)) {
    Seen s;
    s.vehicle = v;
    s.box = box_in_sensor_frame(log, frame, v, sensor_out, config.mount.z);
    s.extent = angular_extent(s.box);
    seen.push_back(s);
  }
  return seen;
}

// Occluder rectangles strictly nearer than `target`, unwrapped around the
// target's azimuth with copies one turn either side.
std::vector<Rect> nearer_occluders(const std::vector<Seen>& seen, const Seen& target) {
  std::vector<Rect> out;
  for (const auto& o : seen) {
    if (o.vehicle == target.vehicle) continue;
    if (!(o.extent.center_range < target.extent.center_range)) continue;
    const double shift = wrap_near(o.extent.center_azimuth, target.extent.center_azimuth) - o.extent.center_azimuth;
    for (int k = -1; k <= 1; ++k) {
      Rect r = o.extent.rect();
      r.u0 += shift + k * kTwoPi;
      r.u1 += shift + k * kTwoPi;
      out.push_back(r);
    }
  }
  return out;
}

std::vector<Rect> fov_window(const SensorConfig& config) {
  const double hv = 0.5 * deg2rad(config.vfov_deg);
  if (config.hfov_deg >= 360.0) return {Rect{-4.0 * kPi, -hv, 4.0 * kPi, hv}};
  const double hh = 0.5 * deg2rad(config.hfov_deg);
  std::vector<Rect> w;
  for (int k = -1; k <= 1; ++k) w.push_back({-hh + k * kTwoPi, -hv, hh + k * kTwoPi, hv});
  return w;
}

}  // namespace

std::string to_string(Modality m) { return m == Modality::camera ? "camera" : "radar"; }

Modality modality_from_string(const std::string& s) {
  if (s == "radar") return Modality::radar;
  if (s == "camera") return Modality::camera;
  throw ConfigError("invalid sensor modality '" + s + "' (expected radar|camera)");
}

// ---------------------------------------------------------------------------
// Config

double SensorConfig::cycle_time() const {
  return (modality == Modality::radar ? radar.cycle_time_ms : camera.frame_time_ms) / 1000.0;
}

void SensorConfig::validate() const {
  if (!(hfov_deg > 0.0 && hfov_deg <= 360.0)) throw std::invalid_argument("sensor: hfov must be in (0, 360]");
  if (!(vfov_deg > 0.0 && vfov_deg <= 180.0)) throw std::invalid_argument("sensor: vfov must be in (0, 180]");
  if (!(range_max > 0.0)) throw std::invalid_argument("sensor: range_max must be > 0");
  if (!(cycle_time() > 0.0)) throw std::invalid_argument("sensor: cycle time must be > 0");
  if (modality == Modality::radar) {
    const auto& r = radar;
    if (!(r.dist_accuracy > 0 && r.azimuth_accuracy > 0 && r.speed_accuracy > 0 && r.tx_frequency_ghz > 0 &&
          r.noise_bandwidth_hz > 0 && r.noise_figure_db > 0 && r.atmospheric_loss_db_per_km >= 0 &&
          r.dist_resolution >= 0 && r.azimuth_resolution >= 0 && r.speed_resolution >= 0))
      throw std::invalid_argument("sensor: radar parameters must be positive");
  } else {
    const auto& c = camera;
    if (!(c.h_resolution > 0 && c.v_resolution > 0 && c.baseline > 0 && c.disparity_error > 0 &&
          c.focal_length > 0))
      throw std::invalid_argument("sensor: camera parameters must be positive");
  }
}

SensorConfig SensorConfig::default_radar() {
  SensorConfig c;
  c.id = "radar";
  c.modality = Modality::radar;
  c.mount = {3.8, 0.0, 0.5, 0.0};
  return c;
}

SensorConfig SensorConfig::default_camera() {
  SensorConfig c;
  c.id = "camera";
  c.modality = Modality::camera;
  c.mount = {1.8, 0.0, 1.3, 0.0};
  return c;
}

SensorConfig SensorConfig::defaults(Modality m) {
  return m == Modality::radar ? default_radar() : default_camera();
}

SensorConfig SensorConfig::ideal() {
  SensorConfig c = default_radar();
  c.id = "ideal";
  c.hfov_deg = 360.0;
  c.vfov_deg = 180.0;
  c.range_max = 1000.0;
  c.noise_enabled = false;
  c.radar.quantize = false;
  c.radar.cycle_time_ms = 10.0;
  c.radar.snr_threshold_db = -200.0;
  return c;
}

// ---------------------------------------------------------------------------
// Geometry

AngularExtent angular_extent(const Box3& box) {
  AngularExtent e;
  e.center_azimuth = std::atan2(box.y, box.x);
  e.center_range = std::hypot(box.x, box.y);

  // Distance from the sensor to the footprint, in the box frame.
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double px = -(c * box.x + s * box.y);
  const double py = -(-s * box.x + c * box.y);
  const double dx = std::max(std::abs(px) - 0.5 * box.length, 0.0);
  const double dy = std::max(std::abs(py) - 0.5 * box.width, 0.0);
  const double rho_min = std::hypot(dx, dy);

  double rho_max = 0.0;
  const auto corners = footprint_corners(box);
  if (rho_min > 0.0) {
    e.az_min = std::numeric_limits<double>::infinity();
    e.az_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : corners) {
      const double a = wrap_near(std::atan2(p.y, p.x), e.center_azimuth);
      e.az_min = std::min(e.az_min, a);
      e.az_max = std::max(e.az_max, a);
    }
    e.nearest_azimuth = nearest_abs_angle(e.az_min, e.az_max);
  } else {
    e.az_min = e.center_azimuth - kPi;
    e.az_max = e.center_azimuth + kPi;
    e.nearest_azimuth = 0.0;
  }
  for (const auto& p : corners) rho_max = std::max(rho_max, std::hypot(p.x, p.y));

  e.el_max = box.z1 >= 0.0 ? std::atan2(box.z1, rho_min) : std::atan2(box.z1, rho_max);
  e.el_min = box.z0 <= 0.0 ? std::atan2(box.z0, rho_min) : std::atan2(box.z0, rho_max);
  e.nearest_elevation = (e.el_min <= 0.0 && e.el_max >= 0.0) ? 0.0 : std::min(std::abs(e.el_min), std::abs(e.el_max));

  const double dz = box.z0 > 0.0 ? box.z0 : (box.z1 < 0.0 ? -box.z1 : 0.0);
  e.nearest_range = std::hypot(rho_min, dz);
  return e;
}

bool fov_range_gate(const SensorConfig& config, const Vec3& p) {
  const double az = rad2deg(std::atan2(p.y, p.x));
  const double el = rad2deg(std::atan2(p.z, std::hypot(p.x, p.y)));
  const double range = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  return std::abs(az) <= 0.5 * config.hfov_deg && std::abs(el) <= 0.5 * config.vfov_deg &&
         range <= config.range_max;
}

bool fov_range_gate(const SensorConfig& config, const Box3& box) {
  const auto e = angular_extent(box);
  return rad2deg(e.nearest_azimuth) <= 0.5 * config.hfov_deg &&
         rad2deg(e.nearest_elevation) <= 0.5 * config.vfov_deg && e.nearest_range <= config.range_max;
}

// ---------------------------------------------------------------------------
// Radar

double radar_snr(const RadarParams& p, double range, double rcs_dbsm) {
  const double lambda = kSpeedOfLight / (p.tx_frequency_ghz * 1e9);
  const double noise_dbm = 10.0 * std::log10(kBoltzmann * kReferenceTemp * p.noise_bandwidth_hz) + 30.0;
  return p.tx_power_dbm + 2.0 * p.antenna_gain_dbi + 20.0 * std::log10(lambda) + rcs_dbsm -
         30.0 * std::log10(4.0 * kPi) - 40.0 * std::log10(range) - noise_dbm - p.noise_figure_db -
         2.0 * p.atmospheric_loss_db_per_km * range / 1000.0;
}

double quantize(double value, double resolution) {
  if (!(resolution > 0.0)) return value;
  return std::round(value / resolution) * resolution;
}

double radar_confidence(double snr_db, double threshold_db) {
  return 1.0 / (1.0 + std::exp(-(snr_db - threshold_db) / 2.0));
}

// ---------------------------------------------------------------------------
// Camera

std::optional<Rect> camera_project(const CameraParams& params, const Box3& box) {
  const auto corners = footprint_corners(box);
  const double f = params.focal_length;
  const double cu = 0.5 * params.h_resolution;
  const double cv = 0.5 * params.v_resolution;
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  int in_front = 0;
  for (const auto& p : corners) {
    if (!(p.x > 0.0)) continue;
    ++in_front;
    for (double z : {box.z0, box.z1}) {
      const double u = cu - f * p.y / p.x;
      const double v = cv - f * z / p.x;
      r.u0 = std::min(r.u0, u);
      r.u1 = std::max(r.u1, u);
      r.v0 = std::min(r.v0, v);
      r.v1 = std::max(r.v1, v);
    }
  }
  if (in_front == 0) return std::nullopt;
  r.u0 = std::clamp(r.u0, 0.0, params.h_resolution);
  r.u1 = std::clamp(r.u1, 0.0, params.h_resolution);
  r.v0 = std::clamp(r.v0, 0.0, params.v_resolution);
  r.v1 = std::clamp(r.v1, 0.0, params.v_resolution);
  return r;
}

double stereo_range_sigma(const CameraParams& p, double range) {
  return range * range * p.disparity_error / (p.focal_length * p.baseline);
}

std::pair<double, double> stereo_depth_bounds(const CameraParams& p, double range, double delta_px) {
  const double fb = p.focal_length * p.baseline;
  const double d = fb / range;
  return {fb / (d + delta_px), fb / (d - delta_px)};
}

// ---------------------------------------------------------------------------
// Frames

Pose2 ego_frame_pose(const GroundTruthLog& log, std::size_t frame) {
  const std::size_t e = ego_index(log);
  const auto& st = log.frames.at(frame).states[e];
  const double half = 0.5 * log.vehicles[e].length;
  return {st.x - half * std::cos(st.yaw), st.y - half * std::sin(st.yaw), st.yaw};
}

Pose2 sensor_pose(const GroundTruthLog& log, std::size_t frame, const MountPose& mount) {
  const Pose2 ego = ego_frame_pose(log, frame);
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  return {ego.x + c * mount.x - s * mount.y, ego.y + s * mount.x + c * mount.y, ego.heading + mount.yaw};
}

Box3 box_in_sensor_frame(const GroundTruthLog& log, std::size_t frame, std::size_t vehicle, const Pose2& sensor,
                         double sensor_height) {
  const auto& st = log.frames.at(frame).states.at(vehicle);
  const auto& spec = log.vehicles.at(vehicle);
  const double c = std::cos(sensor.heading);
  const double s = std::sin(sensor.heading);
  const double dx = st.x - sensor.x;
  const double dy = st.y - sensor.y;
  Box3 b;
  b.x = c * dx + s * dy;
  b.y = -s * dx + c * dy;
  b.yaw = st.yaw - sensor.heading;
  b.length = spec.length;
  b.width = spec.width;
  b.z0 = -sensor_height;
  b.z1 = spec.height - sensor_height;
  return b;
}

std::vector<Measurement> radar_measure(const SensorConfig& config, const GroundTruthLog& log, std::size_t frame,
                                       std::mt19937_64& rng) {
  Pose2 sensor;
  const auto seen = observe(log, frame, config, sensor);
  const auto& p = config.radar;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Measurement> out;
  for (const auto& target : seen) {
    if (!fov_range_gate(config, target.box)) continue;
    const auto occluders = nearer_occluders(seen, target);
    const Rect window[] = {target.extent.rect()};
    const double visible = visible_fraction(target.extent.rect(), occluders, window);
    const double snr = radar_snr(p, target.extent.center_range, p.default_rcs_dbsm) +
                       10.0 * std::log10(std::max(visible, 0.05));
    if (snr < p.snr_threshold_db) continue;

    Measurement m;
    m.vehicle_id = log.vehicle_ids[target.vehicle];
    m.range = target.extent.center_range;
    m.azimuth = target.extent.center_azimuth;
    m.rel_speed = radial_speed(log, frame, target.vehicle, sensor);
    m.confidence = radar_confidence(snr, p.snr_threshold_db);
    if (config.noise_enabled) {
      m.range += p.dist_accuracy * normal(rng);
      m.azimuth += deg2rad(p.azimuth_accuracy) * normal(rng);
      m.rel_speed += (p.speed_accuracy / 3.6) * normal(rng);
      if (p.quantize) {
        m.range = quantize(m.range, p.dist_resolution);
        m.azimuth = quantize(m.azimuth, deg2rad(p.azimuth_resolution));
        m.rel_speed = quantize(m.rel_speed, p.speed_resolution / 3.6);
      }
    }
    out.push_back(m);
  }
  return out;
}

std::vector<Measurement> camera_measure(const SensorConfig& config, const GroundTruthLog& log, std::size_t frame,
                                        std::mt19937_64& rng) {
  Pose2 sensor;
  const auto seen = observe(log, frame, config, sensor);
  const auto window = fov_window(config);
  const auto& p = config.camera;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Measurement> out;
  for (const auto& target : seen) {
    if (!fov_range_gate(config, target.box)) continue;
    const auto occluders = nearer_occluders(seen, target);
    Measurement m;
    m.vehicle_id = log.vehicle_ids[target.vehicle];
    // Visible share of the whole box; the part outside the FOV counts as hidden.
    m.confidence = visible_fraction(target.extent.rect(), occluders, window);
    m.range = target.extent.center_range;
    m.azimuth = target.extent.center_azimuth;
    m.rel_speed = radial_speed(log, frame, target.vehicle, sensor);
    if (config.noise_enabled) {
      m.range += stereo_range_sigma(p, m.range) * normal(rng);
      m.azimuth += normal(rng) / p.focal_length;
    }
    out.push_back(m);
  }
  return out;
}

DetectionFrame detect(const std::vector<Measurement>& measurements, const DetectionParams& params,
                      const MountPose& mount, double t) {
  DetectionFrame frame;
  frame.t = t;
  for (const auto& m : measurements) {
    if (!(m.confidence >= params.confidence_threshold)) continue;
    Detection d;
    d.vehicle_id = m.vehicle_id;
    d.range = m.range;
    d.azimuth = m.azimuth;
    d.rel_speed = m.rel_speed;
    d.confidence = m.confidence;
    d.x_ego = mount.x + m.range * std::cos(m.azimuth + mount.yaw);
    d.y_ego = mount.y + m.range * std::sin(m.azimuth + mount.yaw);
    frame.detections.push_back(d);
  }
  std::stable_sort(frame.detections.begin(), frame.detections.end(),
                   [](const Detection& a, const Detection& b) { return a.vehicle_id < b.vehicle_id; });
  return frame;
}

DetectionSet simulate_sensor(const SensorConfig& config, const DetectionParams& params, const GroundTruthLog& log) {
  config.validate();
  const double ratio = config.cycle_time() / log.sim_step;
  const auto step = static_cast<std::size_t>(std::llround(ratio));
  if (step == 0 || std::abs(ratio - static_cast<double>(step)) > 1e-6)
    throw std::invalid_argument("sensor cycle time must be a multiple of the simulation step");

  std::mt19937_64 rng(config.seed);
  DetectionSet set;
  set.sensor_id = config.id;
  for (std::size_t k = 0; k < log.frames.size(); k += step) {
    const auto measurements = config.modality == Modality::radar ? radar_measure(config, log, k, rng)
                                                                 : camera_measure(config, log, k, rng);
    auto frame = detect(measurements, params, config.mount, log.frames[k].t);
    frame.gt_frame = k;
    set.frames.push_back(std::move(frame));
  }
  return set;
}

Vec2 detection_to_global(const GroundTruthLog& log, std::size_t gt_frame, const Detection& det) {
  const Pose2 ego = ego_frame_pose(log, gt_frame);
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  return {ego.x + c * det.x_ego - s * det.y_ego, ego.y + s * det.x_ego + c * det.y_ego};
}

void write_detections_csv(const DetectionSet& set, std::ostream& out) {
  out << "t,sensor_id,vehicle_id,range_m,azimuth_rad,rel_speed_mps,x_ego_m,y_ego_m,confidence\n";
  out << std::setprecision(17);
  for (const auto& frame : set.frames) {
    for (const auto& d : frame.detections) {
      out << frame.t << ',' << set.sensor_id << ',' << d.vehicle_id << ',' << d.range << ',' << d.azimuth << ','
          << d.rel_speed << ',' << d.x_ego << ',' << d.y_ego << ',' << d.confidence << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const SensorConfig& c) {
  nlohmann::ordered_json doc;
  doc["id"] = c.id;
  doc["modality"] = to_string(c.modality);
  doc["hfov_deg"] = c.hfov_deg;
  doc["vfov_deg"] = c.vfov_deg;
  doc["range_m"] = c.range_max;
  doc["mount"] = {{"x_m", c.mount.x}, {"y_m", c.mount.y}, {"z_m", c.mount.z}, {"yaw_rad", c.mount.yaw}};
  doc["seed"] = c.seed;
  doc["noise_enabled"] = c.noise_enabled;
  if (c.modality == Modality::radar) {
    const auto& r = c.radar;
    doc["radar"] = {{"dist_accuracy_m", r.dist_accuracy},
                    {"dist_resolution_m", r.dist_resolution},
                    {"azimuth_accuracy_deg", r.azimuth_accuracy},
                    {"azimuth_resolution_deg", r.azimuth_resolution},
                    {"speed_accuracy_kph", r.speed_accuracy},
                    {"speed_resolution_kph", r.speed_resolution},
                    {"cycle_time_ms", r.cycle_time_ms},
                    {"tx_frequency_ghz", r.tx_frequency_ghz},
                    {"tx_power_dbm", r.tx_power_dbm},
                    {"noise_bandwidth_hz", r.noise_bandwidth_hz},
                    {"noise_figure_db", r.noise_figure_db},
                    {"antenna_gain_dbi", r.antenna_gain_dbi},
                    {"default_rcs_dbsm", r.default_rcs_dbsm},
                    {"snr_threshold_db", r.snr_threshold_db},
                    {"atmospheric_loss_db_per_km", r.atmospheric_loss_db_per_km},
                    {"quantize", r.quantize}};
  } else {
    const auto& k = c.camera;
    doc["camera"] = {{"h_resolution_px", k.h_resolution},
                     {"v_resolution_px", k.v_resolution},
                     {"resolution_factor", k.resolution_factor},
                     {"camera_type", k.camera_type},
                     {"baseline_m", k.baseline},
                     {"disparity_error_px", k.disparity_error},
                     {"focal_length_px", k.focal_length},
                     {"frame_time_ms", k.frame_time_ms}};
  }
  return doc;
}

SensorConfig sensor_from_json(const nlohmann::json& doc, const SensorConfig& base, const std::string& path) {
  reject_unknown_keys(doc,
                      {"id", "modality", "hfov_deg", "vfov_deg", "range_m", "mount", "seed", "noise_enabled",
                       "radar", "camera"},
                      path);
  SensorConfig c = base;
  if (doc.contains("modality")) {
    const Modality m = modality_from_string(get_required<std::string>(doc, "modality", path));
    if (m != c.modality) {
      // Switching modality swaps in that modality's mount and id defaults.
      const SensorConfig d = SensorConfig::defaults(m);
      c.modality = m;
      c.mount = d.mount;
      c.id = d.id;
    }
  }
  c.id = get_or<std::string>(doc, "id", c.id, path);
  c.hfov_deg = get_or<double>(doc, "hfov_deg", c.hfov_deg, path);
  c.vfov_deg = get_or<double>(doc, "vfov_deg", c.vfov_deg, path);
  c.range_max = get_or<double>(doc, "range_m", c.range_max, path);
  c.seed = get_or<std::uint64_t>(doc, "seed", c.seed, path);
  c.noise_enabled = get_or<bool>(doc, "noise_enabled", c.noise_enabled, path);
  if (auto it = doc.find("mount"); it != doc.end()) {
    const std::string p = path + ".mount";
    reject_unknown_keys(*it, {"x_m", "y_m", "z_m", "yaw_rad"}, p);
    c.mount.x = get_or<double>(*it, "x_m", c.mount.x, p);
    c.mount.y = get_or<double>(*it, "y_m", c.mount.y, p);
    c.mount.z = get_or<double>(*it, "z_m", c.mount.z, p);
    c.mount.yaw = get_or<double>(*it, "yaw_rad", c.mount.yaw, p);
  }
  if (auto it = doc.find("radar"); it != doc.end()) {
    const std::string p = path + ".radar";
    reject_unknown_keys(*it,
                        {"dist_accuracy_m", "dist_resolution_m", "azimuth_accuracy_deg", "azimuth_resolution_deg",
                         "speed_accuracy_kph", "speed_resolution_kph", "cycle_time_ms", "tx_frequency_ghz",
                         "tx_power_dbm", "noise_bandwidth_hz", "noise_figure_db", "antenna_gain_dbi",
                         "default_rcs_dbsm", "snr_threshold_db", "atmospheric_loss_db_per_km", "quantize"},
                        p);
    auto& r = c.radar;
    r.dist_accuracy = get_or<double>(*it, "dist_accuracy_m", r.dist_accuracy, p);
    r.dist_resolution = get_or<double>(*it, "dist_resolution_m", r.dist_resolution, p);
    r.azimuth_accuracy = get_or<double>(*it, "azimuth_accuracy_deg", r.azimuth_accuracy, p);
    r.azimuth_resolution = get_or<double>(*it, "azimuth_resolution_deg", r.azimuth_resolution, p);
    r.speed_accuracy = get_or<double>(*it, "speed_accuracy_kph", r.speed_accuracy, p);
    r.speed_resolution = get_or<double>(*it, "speed_resolution_kph", r.speed_resolution, p);
    r.cycle_time_ms = get_or<double>(*it, "cycle_time_ms", r.cycle_time_ms, p);
    r.tx_frequency_ghz = get_or<double>(*it, "tx_frequency_ghz", r.tx_frequency_ghz, p);
    r.tx_power_dbm = get_or<double>(*it, "tx_power_dbm", r.tx_power_dbm, p);
    r.noise_bandwidth_hz = get_or<double>(*it, "noise_bandwidth_hz", r.noise_bandwidth_hz, p);
    r.noise_figure_db = get_or<double>(*it, "noise_figure_db", r.noise_figure_db, p);
    r.antenna_gain_dbi = get_or<double>(*it, "antenna_gain_dbi", r.antenna_gain_dbi, p);
    r.default_rcs_dbsm = get_or<double>(*it, "default_rcs_dbsm", r.default_rcs_dbsm, p);
    r.snr_threshold_db = get_or<double>(*it, "snr_threshold_db", r.snr_threshold_db, p);
    r.atmospheric_loss_db_per_km = get_or<double>(*it, "atmospheric_loss_db_per_km", r.atmospheric_loss_db_per_km, p);
    r.quantize = get_or<bool>(*it, "quantize", r.quantize, p);
  }
  if (auto it = doc.find("camera"); it != doc.end()) {
    const std::string p = path + ".camera";
    reject_unknown_keys(*it,
                        {"h_resolution_px", "v_resolution_px", "resolution_factor", "camera_type", "baseline_m",
                         "disparity_error_px", "focal_length_px", "frame_time_ms"},
                        p);
    auto& k = c.camera;
    k.h_resolution = get_or<double>(*it, "h_resolution_px", k.h_resolution, p);
    k.v_resolution = get_or<double>(*it, "v_resolution_px", k.v_resolution, p);
    k.resolution_factor = get_or<double>(*it, "resolution_factor", k.resolution_factor, p);
    k.camera_type = get_or<std::string>(*it, "camera_type", k.camera_type, p);
    if (k.camera_type != "stereo") throw ConfigError("only camera_type 'stereo' is supported at '" + p + "'");
    k.baseline = get_or<double>(*it, "baseline_m", k.baseline, p);
    k.disparity_error = get_or<double>(*it, "disparity_error_px", k.disparity_error, p);
    k.focal_length = get_or<double>(*it, "focal_length_px", k.focal_length, p);
    k.frame_time_ms = get_or<double>(*it, "frame_time_ms", k.frame_time_ms, p);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " at '" + path + "'");
  }
  return c;
}

}  // namespace percept
