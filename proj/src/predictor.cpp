#include "percept/predictor.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "percept/json_util.hpp"

namespace percept {

namespace {

constexpr double kSigmaFloor = 0.1;          // m
constexpr double kLateralThreshold = 0.2;    // m/s
constexpr double kLateralScale = 0.2;        // m/s per logit unit
constexpr double kLateralWindow = 1.0;       // s
constexpr double kOffsetTolerance = 1e-6;    // m, offsets this small count as centered

struct Present {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> y;
};

Present present_frames(const TrackHistory& h, double since = -1e300) {
  Present p;
  if (h.frames.empty()) return p;
  const double t_last = h.frames.back().t;
  for (const auto& f : h.frames) {
    if (!f.present || f.t < since - 1e-9) continue;
    p.t.push_back(f.t - t_last);
    p.x.push_back(f.x);
    p.y.push_back(f.y);
  }
  return p;
}

// Slope and intercept of v against t; nothing when the times do not vary.
std::optional<std::pair<double, double>> line_fit(const std::vector<double>& t, const std::vector<double>& v) {
  const double n = static_cast<double>(t.size());
  if (t.size() < 2) return std::nullopt;
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double vm = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double stt = 0.0;
  double stv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    stv += (t[i] - tm) * (v[i] - vm);
  }
  if (!(stt > 1e-12)) return std::nullopt;
  const double slope = stv / stt;
  return std::make_pair(slope, vm - slope * tm);
}

// Least-squares quadratic v = a + b t + c t^2 via centred normal equations.
std::optional<std::array<double, 3>> quadratic_fit(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() < 3) return std::nullopt;
  double m[3][4] = {};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double basis[3] = {1.0, t[i], t[i] * t[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
      m[r][3] += basis[r] * v[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-12) return std::nullopt;
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double k = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= k * m[col][c];
    }
  }
  return std::array<double, 3>{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

double rms(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s / static_cast<double>(r.size()));
}

double sigma_at(int k, double residual) { return std::max(kSigmaFloor, k * residual); }

void require_present(const ModelInput& input) {
  if (input.grid.target.present_count() < 2)
    throw std::invalid_argument("predictor needs at least 2 present target frames");
  if (input.horizon <= 0 || !(input.history_rate > 0.0)) throw std::invalid_argument("invalid horizon or rate");
}

// Lateral completion y(s) = v0 s + c3 s^3 + c4 s^4 + c5 s^5 reaching `delta`
// at s = T with zero velocity and acceleration.
struct LateralCompletion {
  double v0 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double duration = 1.0;
  double delta = 0.0;

  LateralCompletion(double delta_, double v0_, double T) : v0(v0_), duration(T), delta(delta_) {
    const double T2 = T * T;
    const double T3 = T2 * T;
    // Rows: position, velocity, acceleration at s = T.
    const double a[3][3] = {{T3, T3 * T, T3 * T2}, {3 * T2, 4 * T3, 5 * T3 * T}, {6 * T, 12 * T2, 20 * T3}};
    const double b[3] = {delta - v0 * T, -v0, 0.0};
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    auto solve = [&](int col) {
      double m[3][3];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] = (c == col) ? b[r] : a[r][c];
      return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
              m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) /
             det;
    };
    c3 = solve(0);
    c4 = solve(1);
    c5 = solve(2);
  }

  double at(double s) const {
    if (s >= duration) return delta;
    const double s3 = s * s * s;
    return v0 * s + c3 * s3 + c4 * s3 * s + c5 * s3 * s * s;
  }
};

bool adjacent_occupied(const ModelInput& input, int col) {
  for (const auto& [cell, h] : input.grid.cells) {
    if (cell.col != col || cell.row < kGridRows / 2 - 1 || cell.row > kGridRows / 2 + 1) continue;
    if (!h.frames.empty() && h.frames.back().present) return true;
  }
  return false;
}

double number_field(const nlohmann::json& obj, const char* key, const std::string& raw) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw PredictorError(PredictorErrorKind::malformed_output,
                         std::string("malformed predictor output: missing numeric '") + key + "'", raw);
  return it->get<double>();
}

}  // namespace

std::string to_string(PredictorErrorKind kind) {
  switch (kind) {
    case PredictorErrorKind::timeout: return "timeout";
    case PredictorErrorKind::malformed_json: return "malformed_json";
    case PredictorErrorKind::wrong_step_count: return "wrong_step_count";
    case PredictorErrorKind::malformed_output: return "malformed_output";
    case PredictorErrorKind::remote_error: return "remote_error";
    case PredictorErrorKind::protocol: return "protocol";
    case PredictorErrorKind::transport: return "transport";
  }
  return "unknown";
}

void validate_trajectory(const GaussianTrajectory& tr, std::size_t horizon, const std::string& raw) {
  if (tr.steps.size() != horizon)
    throw PredictorError(PredictorErrorKind::wrong_step_count,
                         "wrong step count: got " + std::to_string(tr.steps.size()) + ", expected " +
                             std::to_string(horizon),
                         raw);
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    const auto& s = tr.steps[k];
    const bool ok = std::isfinite(s.mu_x) && std::isfinite(s.mu_y) && std::isfinite(s.sigma_x) &&
                    std::isfinite(s.sigma_y) && s.sigma_x > 0.0 && s.sigma_y > 0.0 && std::abs(s.rho) < 1.0;
    if (!ok)
      throw PredictorError(PredictorErrorKind::malformed_output,
                           "malformed predictor output: invalid Gaussian at step " + std::to_string(k + 1), raw);
  }
  if (!tr.maneuver_probs.empty()) {
    double sum = 0.0;
    for (const auto& [label, p] : tr.maneuver_probs) {
      if (!(p >= 0.0 && p <= 1.0))
        throw PredictorError(PredictorErrorKind::malformed_output,
                             "malformed predictor output: probability of '" + label + "' outside [0, 1]", raw);
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw PredictorError(PredictorErrorKind::malformed_output,
                           "malformed predictor output: maneuver probabilities sum to " + std::to_string(sum), raw);
  }
}

// ---------------------------------------------------------------------------
// Predictor ids

PredictorId PredictorId::parse(const std::string& text) {
  if (text == "cv" || text == "constant_velocity") return {PredictorKind::constant_velocity, {}};
  if (text == "ca" || text == "constant_acceleration") return {PredictorKind::constant_acceleration, {}};
  if (text == "social" || text == "social_grid") return {PredictorKind::social_grid, {}};
  const std::string prefix = "external:";
  if (text.rfind(prefix, 0) == 0) {
    std::string endpoint = text.substr(prefix.size());
    if (endpoint.empty()) throw std::invalid_argument("external predictor requires an endpoint");
    return {PredictorKind::external, endpoint};
  }
  throw std::invalid_argument("unknown predictor '" + text + "' (valid: cv, ca, social, external:<cmd-or-addr>)");
}

std::string PredictorId::to_string() const {
  switch (kind) {
    case PredictorKind::constant_velocity: return "cv";
    case PredictorKind::constant_acceleration: return "ca";
    case PredictorKind::social_grid: return "social";
    case PredictorKind::external: return "external:" + endpoint;
  }
  return "cv";
}

// ---------------------------------------------------------------------------
// Built-ins

LinearFit cv_fit(const TrackHistory& history) {
  const auto p = present_frames(history);
  const auto fx = line_fit(p.t, p.x);
  const auto fy = line_fit(p.t, p.y);
  if (!fx || !fy) throw std::invalid_argument("cv_fit: need at least 2 present frames with distinct timestamps");
  LinearFit fit;
  fit.vx = fx->first;
  fit.x0 = fx->second;
  fit.vy = fy->first;
  fit.y0 = fy->second;
  std::vector<double> rx;
  std::vector<double> ry;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    rx.push_back(p.x[i] - (fit.x0 + fit.vx * p.t[i]));
    ry.push_back(p.y[i] - (fit.y0 + fit.vy * p.t[i]));
  }
  fit.rms_x = rms(rx);
  fit.rms_y = rms(ry);
  fit.samples = p.t.size();
  return fit;
}

GaussianTrajectory predict_constant_velocity(const ModelInput& input) {
  require_present(input);
  const auto fit = cv_fit(input.grid.target);
  GaussianTrajectory out;
  for (int k = 1; k <= input.horizon; ++k) {
    const double s = k / input.history_rate;
    out.steps.push_back({fit.x0 + fit.vx * s, fit.y0 + fit.vy * s, sigma_at(k, fit.rms_x), sigma_at(k, fit.rms_y), 0.0});
  }
  return out;
}

GaussianTrajectory predict_constant_acceleration(const ModelInput& input) {
  require_present(input);
  const auto p = present_frames(input.grid.target);
  const auto qx = quadratic_fit(p.t, p.x);
  const auto qy = quadratic_fit(p.t, p.y);
  if (!qx || !qy) return predict_constant_velocity(input);
  std::vector<double> rx;
  std::vector<double> ry;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    const double t = p.t[i];
    rx.push_back(p.x[i] - ((*qx)[0] + (*qx)[1] * t + (*qx)[2] * t * t));
    ry.push_back(p.y[i] - ((*qy)[0] + (*qy)[1] * t + (*qy)[2] * t * t));
  }
  const double sx = rms(rx);
  const double sy = rms(ry);
  GaussianTrajectory out;
  for (int k = 1; k <= input.horizon; ++k) {
    const double s = k / input.history_rate;
    out.steps.push_back({(*qx)[0] + (*qx)[1] * s + (*qx)[2] * s * s, (*qy)[0] + (*qy)[1] * s + (*qy)[2] * s * s,
                         sigma_at(k, sx), sigma_at(k, sy), 0.0});
  }
  return out;
}

GaussianTrajectory social_grid_predict(const ModelInput& input) {
  require_present(input);
  const auto fit = cv_fit(input.grid.target);

  // Lateral velocity over the last second, falling back to the full fit.
  double vy = fit.vy;
  {
    const auto recent = present_frames(input.grid.target, input.grid.target.frames.back().t - kLateralWindow);
    if (auto f = line_fit(recent.t, recent.y)) vy = f->first;
  }

  const double e_keep = 1.0;
  const double e_left = std::exp((vy - kLateralThreshold) / kLateralScale);
  const double e_right = std::exp((-vy - kLateralThreshold) / kLateralScale);
  const double sum = e_keep + (e_left + e_right);
  double p_keep = e_keep / sum;
  double p_left = e_left / sum;
  double p_right = e_right / sum;
  if (adjacent_occupied(input, 0)) {
    p_keep += p_left;
    p_left = 0.0;
  }
  if (adjacent_occupied(input, 2)) {
    p_keep += p_right;
    p_right = 0.0;
  }

  const double w = input.lane_width;
  const double off = input.target_lane_offset;
  double delta = -off;
  if (p_left > p_keep && p_left > p_right) {
    delta = off >= -kOffsetTolerance ? w - off : -off;
  } else if (p_right > p_keep && p_right > p_left) {
    delta = off <= kOffsetTolerance ? -w - off : -off;
  }
  const double T = std::clamp(2.0 * std::abs(delta) / std::max(std::abs(vy), kLateralThreshold), 1.0, 6.0);
  const LateralCompletion lateral(delta, vy, T);

  GaussianTrajectory out;
  for (int k = 1; k <= input.horizon; ++k) {
    const double s = k / input.history_rate;
    out.steps.push_back(
        {fit.x0 + fit.vx * s, fit.y0 + lateral.at(s), sigma_at(k, fit.rms_x), sigma_at(k, fit.rms_y), 0.0});
  }
  out.maneuver_probs = {{"keep", p_keep}, {"lc_left", p_left}, {"lc_right", p_right}};
  return out;
}

// ---------------------------------------------------------------------------
// Protocol

GaussianTrajectory parse_prediction_response(const std::string& line, std::uint64_t id, std::size_t horizon) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw PredictorError(PredictorErrorKind::malformed_json, std::string("malformed JSON from predictor: ") + e.what(),
                         line);
  }
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string())
    throw PredictorError(PredictorErrorKind::protocol, "response lacks a string 'type'", line);
  const auto type = doc["type"].get<std::string>();
  const bool id_ok = doc.contains("id") && doc["id"].is_number_unsigned() && doc["id"].get<std::uint64_t>() == id;
  if (type == "error") {
    const std::string message = doc.value("message", std::string("(no message)"));
    throw PredictorError(PredictorErrorKind::remote_error, "predictor error: " + message, line);
  }
  if (type != "prediction") throw PredictorError(PredictorErrorKind::protocol, "unexpected response type '" + type + "'", line);
  if (!id_ok) throw PredictorError(PredictorErrorKind::protocol, "response id does not match request " + std::to_string(id), line);
  if (!doc.contains("steps") || !doc["steps"].is_array())
    throw PredictorError(PredictorErrorKind::malformed_output, "malformed predictor output: 'steps' must be an array", line);

  GaussianTrajectory tr;
  for (const auto& s : doc["steps"]) {
    if (!s.is_object())
      throw PredictorError(PredictorErrorKind::malformed_output, "malformed predictor output: step is not an object", line);
    tr.steps.push_back({number_field(s, "mux", line), number_field(s, "muy", line), number_field(s, "sigx", line),
                        number_field(s, "sigy", line), number_field(s, "rho", line)});
  }
  if (doc.contains("maneuver_probs")) {
    const auto& mp = doc["maneuver_probs"];
    if (!mp.is_array())
      throw PredictorError(PredictorErrorKind::malformed_output, "malformed predictor output: 'maneuver_probs'", line);
    for (const auto& e : mp) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number())
        throw PredictorError(PredictorErrorKind::malformed_output, "malformed predictor output: maneuver entry", line);
      tr.maneuver_probs.emplace_back(e[0].get<std::string>(), e[1].get<double>());
    }
  }
  validate_trajectory(tr, horizon, line);
  return tr;
}

GaussianTrajectory ExternalPredictor::predict(const ModelInput& input) {
  const std::uint64_t id = next_id_++;
  send_line(to_protocol_request(input, id).dump());
  const std::string line = read_line();
  return parse_prediction_response(line, id, static_cast<std::size_t>(input.horizon));
}

namespace {

class BuiltinPredictor : public Predictor {
 public:
  explicit BuiltinPredictor(PredictorKind kind) : kind_(kind) {}
  GaussianTrajectory predict(const ModelInput& input) override {
    GaussianTrajectory out;
    switch (kind_) {
      case PredictorKind::constant_acceleration: out = predict_constant_acceleration(input); break;
      case PredictorKind::social_grid: out = social_grid_predict(input); break;
      default: out = predict_constant_velocity(input); break;
    }
    validate_trajectory(out, static_cast<std::size_t>(input.horizon));
    return out;
  }

 private:
  PredictorKind kind_;
};

class ExternalAdapter : public Predictor {
 public:
  ExternalAdapter(const std::string& endpoint, std::chrono::milliseconds timeout) : client_(endpoint, timeout) {}
  GaussianTrajectory predict(const ModelInput& input) override { return client_.predict(input); }

 private:
  ExternalPredictor client_;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(const PredictorId& id, std::chrono::milliseconds timeout) {
  if (id.kind == PredictorKind::external) return std::make_unique<ExternalAdapter>(id.endpoint, timeout);
  return std::make_unique<BuiltinPredictor>(id.kind);
}

nlohmann::ordered_json to_json(const GaussianTrajectory& tr) {
  nlohmann::ordered_json doc;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : tr.steps)
    steps.push_back({{"mux", s.mu_x}, {"muy", s.mu_y}, {"sigx", s.sigma_x}, {"sigy", s.sigma_y}, {"rho", s.rho}});
  doc["steps"] = steps;
  if (!tr.maneuver_probs.empty()) {
    auto mp = nlohmann::ordered_json::array();
    for (const auto& [label, p] : tr.maneuver_probs) mp.push_back({label, p});
    doc["maneuver_probs"] = mp;
  }
  return doc;
}

GaussianTrajectory trajectory_from_json(const nlohmann::json& doc) {
  GaussianTrajectory tr;
  for (const auto& s : doc.at("steps"))
    tr.steps.push_back({s.at("mux").get<double>(), s.at("muy").get<double>(), s.at("sigx").get<double>(),
                        s.at("sigy").get<double>(), s.at("rho").get<double>()});
  if (doc.contains("maneuver_probs"))
    for (const auto& e : doc["maneuver_probs"]) tr.maneuver_probs.emplace_back(e[0].get<std::string>(), e[1].get<double>());
  return tr;
}

}  // namespace percept
