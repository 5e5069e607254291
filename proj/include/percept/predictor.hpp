#pragma once
// Trajectory predictors. Every predictor maps a ModelInput to a sequence of
// bivariate Gaussians in the target frame. Three built-ins run in-process and
// an external client speaks newline-delimited JSON to a child process or a
// TCP endpoint.

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "percept/track.hpp"

namespace percept {

inline constexpr int kProtocolVersion = 1;

struct GaussianStep {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double rho = 0.0;
};

struct GaussianTrajectory {
  std::vector<GaussianStep> steps;
  std::vector<std::pair<std::string, double>> maneuver_probs;  // may be empty
};

enum class PredictorErrorKind { timeout, malformed_json, wrong_step_count, malformed_output, remote_error, protocol, transport };

std::string to_string(PredictorErrorKind kind);

class PredictorError : public std::runtime_error {
 public:
  PredictorError(PredictorErrorKind kind, const std::string& message, std::string raw = {})
      : std::runtime_error(message), kind_(kind), raw_(std::move(raw)) {}

  PredictorErrorKind kind() const { return kind_; }
  /// Raw response text that caused the error, when there was one.
  const std::string& raw() const { return raw_; }

 private:
  PredictorErrorKind kind_;
  std::string raw_;
};

/// Throws PredictorError (wrong_step_count / malformed_output) unless the
/// trajectory has `horizon` steps with sigma > 0, |rho| < 1 and, if present,
/// maneuver probabilities in [0, 1] summing to 1 within 1e-6.
void validate_trajectory(const GaussianTrajectory& trajectory, std::size_t horizon, const std::string& raw = {});

enum class PredictorKind { constant_velocity, constant_acceleration, social_grid, external };

struct PredictorId {
  PredictorKind kind = PredictorKind::constant_velocity;
  std::string endpoint;  // external only

  /// Accepts cv | ca | social | external:<endpoint>, plus the long kind names.
  static PredictorId parse(const std::string& text);
  std::string to_string() const;
};

struct LinearFit {
  double x0 = 0.0;  // fitted position at the last history frame
  double y0 = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double rms_x = 0.0;  // fit residual RMS per axis
  double rms_y = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line through the present frames, time measured from the
/// last frame of the history. Needs two distinct present timestamps.
LinearFit cv_fit(const TrackHistory& history);

GaussianTrajectory predict_constant_velocity(const ModelInput& input);
/// Quadratic least-squares fit; falls back to constant velocity with fewer
/// than three present frames.
GaussianTrajectory predict_constant_acceleration(const ModelInput& input);
/// Maneuver-aware surrogate: lateral evidence over the last second selects
/// keep / lc_left / lc_right, adjacent occupied cells veto lane changes, and
/// the mean follows a quintic lateral completion toward the destination lane.
GaussianTrajectory social_grid_predict(const ModelInput& input);

/// Parses and validates one protocol response line.
GaussianTrajectory parse_prediction_response(const std::string& line, std::uint64_t id, std::size_t horizon);

/// One connection to an external predictor. Endpoints: "tcp:PORT",
/// "tcp:HOST:PORT", or any other string as a shell command whose stdio
/// carries the protocol.
class ExternalPredictor {
 public:
  explicit ExternalPredictor(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~ExternalPredictor();
  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  GaussianTrajectory predict(const ModelInput& input);

 private:
  void connect();
  void send_line(const std::string& line);
  std::string read_line();
  void close_all();

  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  int read_fd_ = -1;
  int write_fd_ = -1;
  int child_pid_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual GaussianTrajectory predict(const ModelInput& input) = 0;
};

/// Built-ins are stateless; an external predictor opens its connection here.
std::unique_ptr<Predictor> make_predictor(const PredictorId& id,
                                          std::chrono::milliseconds timeout = std::chrono::seconds(10));

nlohmann::ordered_json to_json(const GaussianTrajectory& trajectory);
GaussianTrajectory trajectory_from_json(const nlohmann::json& doc);

}  // namespace percept
