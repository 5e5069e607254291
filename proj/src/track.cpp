#include "percept/track.hpp"

#include <algorithm>
#include <cmath>

#include "percept/json_util.hpp"

namespace percept {

namespace {

constexpr double kTimeEps = 1e-9;

// Signed bin index; ties on a bin edge round toward zero (toward the target).
int bin_toward_zero(double u) {
  const double k = std::ceil(std::abs(u) - 0.5);
  return static_cast<int>(u < 0.0 ? -k : k);
}

std::string source_name(SourceKind k) { return k == SourceKind::ground_truth ? "ground_truth" : "detections"; }

nlohmann::ordered_json frames_to_json(const TrackHistory& h) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : h.frames) {
    if (f.present) {
      arr.push_back({f.t, f.x, f.y, true});
    } else {
      arr.push_back({f.t, nullptr, nullptr, false});
    }
  }
  return arr;
}

TrackHistory frames_from_json(const nlohmann::json& arr, const std::string& id) {
  TrackHistory h;
  h.vehicle_id = id;
  h.frame_of_reference = FrameOfReference::target;
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 4) throw ConfigError("track frame must be [t, x, y, present]");
    TrackSample s;
    s.t = row[0].get<double>();
    s.present = row[3].get<bool>();
    if (s.present) {
      s.x = row[1].get<double>();
      s.y = row[2].get<double>();
    }
    h.frames.push_back(s);
  }
  return h;
}

}  // namespace

std::size_t TrackHistory::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [](const TrackSample& s) { return s.present; }));
}

// ---------------------------------------------------------------------------
// Sources

TrackSource TrackSource::ground_truth(const GroundTruthLog& log) {
  TrackSource s;
  s.kind_ = SourceKind::ground_truth;
  s.log_ = &log;
  return s;
}

TrackSource TrackSource::detections(const GroundTruthLog& log, const DetectionSet& set) {
  TrackSource s;
  s.kind_ = SourceKind::detections;
  s.log_ = &log;
  std::string ego_id;
  for (std::size_t i = 0; i < log.vehicles.size(); ++i)
    if (log.vehicles[i].role == VehicleRole::ego) ego_id = log.vehicle_ids[i];
  for (const auto& frame : set.frames) {
    std::map<std::string, Vec2> seen;
    for (const auto& d : frame.detections) seen[d.vehicle_id] = detection_to_global(log, frame.gt_frame, d);
    const auto& ego = log.state(frame.gt_frame, ego_id);
    seen[ego_id] = {ego.x, ego.y};
    s.times_.push_back(frame.t);
    s.frames_.push_back(std::move(seen));
  }
  return s;
}

const std::map<std::string, Vec2>* TrackSource::detection_frame_at(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t + kTimeEps);
  if (it == times_.begin()) return nullptr;
  return &frames_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

std::map<std::string, Vec2> TrackSource::snapshot(double t) const {
  if (kind_ == SourceKind::ground_truth) {
    std::map<std::string, Vec2> out;
    const auto& frame = log_->frames.at(log_->frame_at(t));
    for (std::size_t i = 0; i < log_->vehicle_ids.size(); ++i)
      out[log_->vehicle_ids[i]] = {frame.states[i].x, frame.states[i].y};
    return out;
  }
  const auto* frame = detection_frame_at(t);
  return frame ? *frame : std::map<std::string, Vec2>{};
}

std::optional<Vec2> TrackSource::position(const std::string& vehicle_id, double t) const {
  if (kind_ == SourceKind::ground_truth) {
    const auto& st = log_->state(log_->frame_at(t), vehicle_id);
    return Vec2{st.x, st.y};
  }
  const auto* frame = detection_frame_at(t);
  if (frame == nullptr) return std::nullopt;
  auto it = frame->find(vehicle_id);
  if (it == frame->end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Frames and grid

Pose2 target_anchor(const RoadGeometry& road, Vec2 p) {
  const double station = road.project(p).first;
  return {p.x, p.y, road.heading_at(station)};
}

Vec2 to_target_frame(Vec2 point, Vec2 target_position, double road_angle) {
  const double c = std::cos(road_angle);
  const double s = std::sin(road_angle);
  const double dx = point.x - target_position.x;
  const double dy = point.y - target_position.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 from_target_frame(Vec2 local, Vec2 target_position, double road_angle) {
  const double c = std::cos(road_angle);
  const double s = std::sin(road_angle);
  return {target_position.x + c * local.x - s * local.y, target_position.y + s * local.x + c * local.y};
}

std::optional<GridCell> assign_cell(Vec2 local, double lane_width) {
  if (std::abs(local.x) > kNeighborLongitudinalBound) return std::nullopt;
  const double lanes = local.y / lane_width;
  if (std::abs(lanes) > 1.5) return std::nullopt;
  const int row = kGridRows / 2 + bin_toward_zero(local.x / kGridCellLength);
  const int col = 1 - bin_toward_zero(lanes);
  return GridCell{row, col};
}

std::vector<std::string> select_neighbors(const TrackSource& source, const std::string& target_id, double t) {
  const auto snap = source.snapshot(t);
  auto it = snap.find(target_id);
  if (it == snap.end()) throw TargetAbsent("target '" + target_id + "' absent at t=" + std::to_string(t));
  const Pose2 anchor = target_anchor(source.road(), it->second);
  std::vector<std::string> out;
  for (const auto& [id, pos] : snap) {
    if (id == target_id) continue;
    const Vec2 local = to_target_frame(pos, {anchor.x, anchor.y}, anchor.heading);
    if (assign_cell(local, source.road().lane_width)) out.push_back(id);
  }
  return out;
}

ModelInput assemble_history(const TrackSource& source, const std::string& target_id, double t, int history_frames,
                            double rate, int horizon) {
  if (history_frames < 2 || !(rate > 0.0) || horizon <= 0)
    throw std::invalid_argument("assemble_history: invalid window parameters");
  const double start = t - (history_frames - 1) / rate;
  if (start < -kTimeEps) throw std::invalid_argument("assemble_history: history window starts before the log");

  const auto neighbors = select_neighbors(source, target_id, t);
  const auto target_pos = *source.position(target_id, t);
  const Pose2 anchor = target_anchor(source.road(), target_pos);
  const Vec2 origin{anchor.x, anchor.y};

  auto history_of = [&](const std::string& id) {
    TrackHistory h;
    h.vehicle_id = id;
    h.frame_of_reference = FrameOfReference::target;
    for (int j = 0; j < history_frames; ++j) {
      TrackSample s;
      s.t = t - (history_frames - 1 - j) / rate;
      if (auto p = source.position(id, s.t)) {
        const Vec2 local = to_target_frame(*p, origin, anchor.heading);
        s.x = local.x;
        s.y = local.y;
        s.present = true;
      }
      h.frames.push_back(s);
    }
    return h;
  };

  ModelInput input;
  input.target_id = target_id;
  input.scenario_id = source.log().scenario_id;
  input.source = source.kind();
  input.t = t;
  input.history_rate = rate;
  input.horizon = horizon;
  input.anchor = anchor;
  input.lane_width = source.road().lane_width;
  const double offset = source.road().project(target_pos).second;
  input.target_lane_offset = offset - source.road().lane_center(source.road().lane_of(offset));

  input.grid.target = history_of(target_id);
  if (input.grid.target.present_count() == 0) throw TargetNeverDetected("target never detected");

  std::map<GridCell, double> occupant_distance;
  for (const auto& id : neighbors) {
    const Vec2 local = to_target_frame(*source.position(id, t), origin, anchor.heading);
    const auto cell = assign_cell(local, input.lane_width);
    if (!cell) continue;
    const double dist = std::hypot(local.x, local.y);
    auto occ = occupant_distance.find(*cell);
    // Neighbors arrive in id order, so a distance tie keeps the lower id.
    if (occ != occupant_distance.end() && !(dist < occ->second)) continue;
    occupant_distance[*cell] = dist;
    input.grid.cells[*cell] = history_of(id);
  }
  return input;
}

TrackHistory impute_linear(const TrackHistory& history) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < history.frames.size(); ++i)
    if (history.frames[i].present) present.push_back(i);
  if (present.size() < 2)
    throw std::invalid_argument("impute_linear: need at least 2 present frames for '" + history.vehicle_id + "'");

  TrackHistory out = history;
  auto& f = out.frames;
  for (std::size_t i = 0; i < present.front(); ++i) {
    f[i].x = f[present.front()].x;
    f[i].y = f[present.front()].y;
    f[i].present = true;
  }
  for (std::size_t i = present.back() + 1; i < f.size(); ++i) {
    f[i].x = f[present.back()].x;
    f[i].y = f[present.back()].y;
    f[i].present = true;
  }
  for (std::size_t k = 0; k + 1 < present.size(); ++k) {
    const auto& a = f[present[k]];
    const auto& b = f[present[k + 1]];
    for (std::size_t i = present[k] + 1; i < present[k + 1]; ++i) {
      const double w = (f[i].t - a.t) / (b.t - a.t);
      f[i].x = a.x + w * (b.x - a.x);
      f[i].y = a.y + w * (b.y - a.y);
      f[i].present = true;
    }
  }
  return out;
}

ModelInput impute_model_input(const ModelInput& input) {
  ModelInput out = input;
  out.grid.target = impute_linear(input.grid.target);
  for (auto& [cell, h] : out.grid.cells) {
    if (h.present_count() >= 2) h = impute_linear(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json track_to_json(const TrackHistory& history) { return frames_to_json(history); }

nlohmann::ordered_json to_protocol_request(const ModelInput& input, std::uint64_t id) {
  nlohmann::ordered_json req;
  req["type"] = "predict";
  req["id"] = id;
  req["rate_hz"] = input.history_rate;
  req["horizon"] = input.horizon;
  req["target"] = frames_to_json(input.grid.target);
  auto neighbors = nlohmann::ordered_json::array();
  for (const auto& [cell, h] : input.grid.cells) {
    neighbors.push_back({{"cell", {cell.row, cell.col}}, {"track", frames_to_json(h)}});
  }
  req["neighbors"] = neighbors;
  return req;
}

nlohmann::ordered_json to_json(const ModelInput& input) {
  nlohmann::ordered_json doc;
  doc["request"] = to_protocol_request(input, 0);
  nlohmann::ordered_json ids = nlohmann::ordered_json::object();
  for (const auto& [cell, h] : input.grid.cells)
    ids[std::to_string(cell.row) + "," + std::to_string(cell.col)] = h.vehicle_id;
  doc["meta"] = {{"scenario_id", input.scenario_id},
                 {"target_id", input.target_id},
                 {"source", source_name(input.source)},
                 {"t", input.t},
                 {"anchor", {input.anchor.x, input.anchor.y, input.anchor.heading}},
                 {"lane_width_m", input.lane_width},
                 {"target_lane_offset_m", input.target_lane_offset},
                 {"neighbor_ids", ids}};
  return doc;
}

ModelInput model_input_from_json(const nlohmann::json& doc) {
  const auto& req = doc.at("request");
  const auto& meta = doc.at("meta");
  ModelInput in;
  in.scenario_id = meta.at("scenario_id").get<std::string>();
  in.target_id = meta.at("target_id").get<std::string>();
  in.source = meta.at("source").get<std::string>() == "ground_truth" ? SourceKind::ground_truth
                                                                     : SourceKind::detections;
  in.t = meta.at("t").get<double>();
  const auto anchor = meta.at("anchor");
  in.anchor = {anchor.at(0).get<double>(), anchor.at(1).get<double>(), anchor.at(2).get<double>()};
  in.lane_width = meta.at("lane_width_m").get<double>();
  in.target_lane_offset = meta.at("target_lane_offset_m").get<double>();
  in.history_rate = req.at("rate_hz").get<double>();
  in.horizon = req.at("horizon").get<int>();
  in.grid.target = frames_from_json(req.at("target"), in.target_id);
  const auto& ids = meta.at("neighbor_ids");
  for (const auto& n : req.at("neighbors")) {
    GridCell cell{n.at("cell").at(0).get<int>(), n.at("cell").at(1).get<int>()};
    const std::string key = std::to_string(cell.row) + "," + std::to_string(cell.col);
    in.grid.cells[cell] = frames_from_json(n.at("track"), ids.value(key, std::string{}));
  }
  return in;
}

}  // namespace percept
