#pragma once
// Radar and stereo-camera sensor models. A sensor maps a ground-truth frame to
// raw measurements (gating, occlusion, noise, quantization) and the detection
// stage keeps measurements whose confidence clears a fixed threshold.
//
// Sensor frame: x forward, y left, z up, origin at the mounting point.
// Ego frame: same axes, origin at the rear end of the ego box on the ground.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/occlusion.hpp"
#include "percept/scenario.hpp"

namespace percept {

enum class Modality { radar, camera };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct MountPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;
};

/// Defaults follow the published radar datasheet values; gain, RCS and
/// threshold are modelling choices needed to close the radar equation.
struct RadarParams {
  double dist_accuracy = 0.4;         // m, 1 sigma
  double dist_resolution = 1.8;       // m
  double azimuth_accuracy = 0.1;      // deg, 1 sigma
  double azimuth_resolution = 1.6;    // deg
  double speed_accuracy = 0.1;        // km/h, 1 sigma
  double speed_resolution = 0.4;      // km/h
  double cycle_time_ms = 60.0;
  double tx_frequency_ghz = 77.0;
  double tx_power_dbm = 14.0;
  double noise_bandwidth_hz = 25000.0;
  double noise_figure_db = 4.8;
  double antenna_gain_dbi = 25.0;
  double default_rcs_dbsm = 10.0;
  double snr_threshold_db = 30.0;
  double atmospheric_loss_db_per_km = 0.5;
  bool quantize = true;
};

struct CameraParams {
  double h_resolution = 1280.0;  // px
  double v_resolution = 960.0;   // px
  double resolution_factor = 50.0;  // stored only
  std::string camera_type = "stereo";
  double baseline = 0.12;        // m
  double disparity_error = 0.5;  // px, 1 sigma
  double focal_length = 2400.0;  // px
  double frame_time_ms = 60.0;
};

struct SensorConfig {
  std::string id = "sensor";
  Modality modality = Modality::radar;
  double hfov_deg = 30.0;
  double vfov_deg = 15.0;
  double range_max = 100.0;
  MountPose mount;
  std::uint64_t seed = 1;
  bool noise_enabled = true;
  RadarParams radar;
  CameraParams camera;

  /// Cycle time in seconds of the active modality.
  double cycle_time() const;
  void validate() const;

  static SensorConfig default_radar();
  static SensorConfig default_camera();
  static SensorConfig defaults(Modality m);
  /// 360 degree radar with effectively unlimited range, no noise, no
  /// quantization and a 10 ms cycle, so its detections reproduce ground truth.
  static SensorConfig ideal();
};

struct DetectionParams {
  double confidence_threshold = 0.6;
};

struct Measurement {
  std::string vehicle_id;
  double range = 0.0;     // m, horizontal
  double azimuth = 0.0;   // rad, sensor frame
  double rel_speed = 0.0; // m/s, radial
  double confidence = 0.0;
};

struct Detection {
  std::string vehicle_id;
  double range = 0.0;
  double azimuth = 0.0;
  double rel_speed = 0.0;
  double x_ego = 0.0;
  double y_ego = 0.0;
  double confidence = 0.0;
};

struct DetectionFrame {
  double t = 0.0;
  std::size_t gt_frame = 0;
  std::vector<Detection> detections;
};

struct DetectionSet {
  std::string sensor_id;
  std::vector<DetectionFrame> frames;
};

/// Oriented vehicle box expressed in the sensor frame. (x, y) is the footprint
/// center, z0/z1 the bottom and top heights relative to the sensor.
struct Box3 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double length = 0.0;
  double width = 0.0;
  double z0 = 0.0;
  double z1 = 0.0;
};

/// Angular footprint of a box seen from the sensor origin.
struct AngularExtent {
  double az_min = 0.0;   // unwrapped around center_azimuth
  double az_max = 0.0;
  double el_min = 0.0;
  double el_max = 0.0;
  double center_azimuth = 0.0;
  double center_range = 0.0;   // horizontal range to the box center
  double nearest_range = 0.0;  // 3D distance to the nearest box point
  double nearest_azimuth = 0.0;    // smallest |azimuth| over the box
  double nearest_elevation = 0.0;  // smallest |elevation| over the box

  Rect rect() const { return {az_min, el_min, az_max, el_max}; }
};

AngularExtent angular_extent(const Box3& box);

/// Point gate: |azimuth| <= hfov/2, |elevation| <= vfov/2, range <= range_max.
bool fov_range_gate(const SensorConfig& config, const Vec3& rel_position);
/// Box gate evaluated at the nearest point of the box.
bool fov_range_gate(const SensorConfig& config, const Box3& box);

/// Radar equation in dB with two-way atmospheric loss.
double radar_snr(const RadarParams& params, double range, double rcs_dbsm);

/// Rounds to the nearest multiple of resolution; resolution <= 0 is identity.
double quantize(double value, double resolution);

/// logistic((snr - threshold) / 2 dB)
double radar_confidence(double snr_db, double threshold_db);

/// Pinhole projection of the 8 box corners, clipped to the image.
std::optional<Rect> camera_project(const CameraParams& params, const Box3& box);

double stereo_range_sigma(const CameraParams& params, double range);
/// Depth interval implied by a disparity error of +/- delta_px at `range`.
std::pair<double, double> stereo_depth_bounds(const CameraParams& params, double range, double delta_px);

/// Global pose of the ego-frame origin at a log frame.
Pose2 ego_frame_pose(const GroundTruthLog& log, std::size_t frame);
Pose2 sensor_pose(const GroundTruthLog& log, std::size_t frame, const MountPose& mount);
/// Box of a logged vehicle expressed in a sensor frame.
Box3 box_in_sensor_frame(const GroundTruthLog& log, std::size_t frame, std::size_t vehicle,
                         const Pose2& sensor, double sensor_height);

std::vector<Measurement> radar_measure(const SensorConfig& config, const GroundTruthLog& log, std::size_t frame,
                                       std::mt19937_64& rng);
std::vector<Measurement> camera_measure(const SensorConfig& config, const GroundTruthLog& log, std::size_t frame,
                                        std::mt19937_64& rng);

/// Threshold and convert to ego-frame positions; output sorted by vehicle id.
DetectionFrame detect(const std::vector<Measurement>& measurements, const DetectionParams& params,
                      const MountPose& mount, double t);

/// Runs the sensor over the whole log on its cycle grid with a fresh RNG
/// seeded from config.seed.
DetectionSet simulate_sensor(const SensorConfig& config, const DetectionParams& params, const GroundTruthLog& log);

/// Global position of a detection, using the ego pose of the frame it was taken in.
Vec2 detection_to_global(const GroundTruthLog& log, std::size_t gt_frame, const Detection& det);

void write_detections_csv(const DetectionSet& set, std::ostream& out);

nlohmann::ordered_json to_json(const SensorConfig& config);
/// Applies keys from `doc` on top of `base`; unknown keys are rejected.
SensorConfig sensor_from_json(const nlohmann::json& doc, const SensorConfig& base, const std::string& path = "sensor");

}  // namespace percept
