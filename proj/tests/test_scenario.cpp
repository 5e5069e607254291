#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "percept/scenario.hpp"

using namespace percept;

namespace {

const VehicleSpec& by_id(const ScenarioSpec& s, const std::string& id) { return s.vehicle(id); }

}  // namespace

TEST(Presets, CatalogueListsSixScenarios) {
  const auto& cat = preset_catalogue();
  ASSERT_EQ(cat.size(), 6u);
  EXPECT_EQ(cat[0].id, "Sc-01");
  EXPECT_EQ(cat[2].description, "LC to the Right - In front of the Lead Car (US101)");
  EXPECT_EQ(cat[4].description, "LC to the Right - In front of the Lead Car (Straight Road)");
}

TEST(Presets, Sc05IsStraightRightChangeAheadOfLead) {
  const auto s = preset_scenario("Sc-05");
  EXPECT_EQ(s.road.kind, RoadKind::straight);
  ASSERT_EQ(s.maneuvers.size(), 1u);
  EXPECT_EQ(s.maneuvers[0].kind, ManeuverKind::lane_change_right);
  EXPECT_GT(s.target().station, by_id(s, "lead").station);
}

TEST(Presets, Sc02IsArcLeftCutInAheadOfEgo) {
  const auto s = preset_scenario("Sc-02");
  EXPECT_EQ(s.road.kind, RoadKind::arc);
  EXPECT_EQ(s.maneuvers[0].kind, ManeuverKind::lane_change_left);
  EXPECT_EQ(s.maneuvers[0].final_lane, s.ego().lane);
  EXPECT_GT(s.target().station, s.ego().station);
  EXPECT_LT(s.target().station, by_id(s, "lead").station);
}

TEST(Presets, EveryPresetHasNioAndRelativeVelocity) {
  for (const auto& p : preset_catalogue()) {
    const auto s = preset_scenario(p.id);
    EXPECT_NO_THROW(s.vehicle("NIO")) << p.id;
    EXPECT_DOUBLE_EQ(s.relative_velocity_kph, 5.0);
    EXPECT_NEAR(s.target().speed - s.ego().speed, 5.0 / 3.6, 1e-12);
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Presets, UnknownIdListsValidIds) {
  try {
    preset_scenario("Sc-99");
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("unknown scenario"), std::string::npos);
    EXPECT_NE(msg.find("Sc-06"), std::string::npos);
  }
}

TEST(LateralProfile, BoundaryAndInteriorValues) {
  ManeuverPlan p;
  p.kind = ManeuverKind::lane_change_left;
  p.start_time = 2.0;
  p.duration = 4.0;
  p.initial_lane = 1;
  p.final_lane = 2;
  EXPECT_DOUBLE_EQ(lateral_profile(p, 3.6, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(lateral_profile(p, 3.6, 6.0), 3.6);
  EXPECT_NEAR(lateral_profile(p, 3.6, 4.0), 1.8, 1e-12);
  EXPECT_NEAR(lateral_profile(p, 3.6, 3.0), 0.37265625, 1e-12);
  // Clamped outside the window.
  EXPECT_DOUBLE_EQ(lateral_profile(p, 3.6, -10.0), 0.0);
  EXPECT_DOUBLE_EQ(lateral_profile(p, 3.6, 50.0), 3.6);
}

TEST(LateralProfile, RightChangeIsNegative) {
  ManeuverPlan p;
  p.kind = ManeuverKind::lane_change_right;
  p.duration = 5.0;
  p.initial_lane = 3;
  p.final_lane = 2;
  EXPECT_NEAR(lateral_profile(p, 3.6, 2.5), -1.8, 1e-12);
}

TEST(RoadAngle, StraightArcAndRange) {
  RoadGeometry straight;
  straight.kind = RoadKind::straight;
  EXPECT_EQ(road_angle(straight, 123.0), 0.0);
  RoadGeometry arc;
  arc.kind = RoadKind::arc;
  arc.arc_radius = 600.0;
  EXPECT_DOUBLE_EQ(road_angle(arc, 300.0), 0.5);
  EXPECT_DOUBLE_EQ(road_angle(arc, 0.0), 0.0);
  EXPECT_THROW(road_angle(arc, 801.0), std::out_of_range);
  EXPECT_THROW(road_angle(arc, -1.0), std::out_of_range);
}

TEST(RoadGeometry, ProjectInvertsToGlobal) {
  RoadGeometry arc;
  arc.kind = RoadKind::arc;
  for (double s : {0.0, 120.0, 555.5}) {
    for (double d : {0.0, 5.4, 17.9}) {
      const auto [s2, d2] = arc.project(arc.to_global(s, d));
      EXPECT_NEAR(s2, s, 1e-9);
      EXPECT_NEAR(d2, d, 1e-9);
    }
  }
}

TEST(RunScenario, FrameCountAndCompleteness) {
  const auto log = run_scenario(preset_scenario("Sc-05"));
  ASSERT_EQ(log.frames.size(), 2001u);
  for (std::size_t k = 0; k < log.frames.size(); ++k) {
    ASSERT_EQ(log.frames[k].states.size(), log.vehicle_ids.size());
    ASSERT_NEAR(log.frames[k].t, 0.01 * static_cast<double>(k), 1e-9);
  }
}

TEST(RunScenario, DeterministicCsv) {
  const auto spec = preset_scenario("Sc-03");
  std::ostringstream a;
  std::ostringstream b;
  write_ground_truth_csv(run_scenario(spec), a);
  write_ground_truth_csv(run_scenario(spec), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,vehicle_id,x_m,y_m,yaw_rad,speed_mps,accel_mps2,lane,road_angle_rad");
}

TEST(RunScenario, Sc01TargetChangesLaneExactlyOnce) {
  const auto spec = preset_scenario("Sc-01");
  const auto log = run_scenario(spec);
  const auto ti = log.index_of("target");
  int transitions = 0;
  int prev = log.frames[0].states[ti].lane;
  EXPECT_EQ(prev, 3);
  for (const auto& f : log.frames) {
    const int lane = f.states[ti].lane;
    if (lane != prev) {
      EXPECT_EQ(lane, prev - 1);
      ++transitions;
    }
    prev = lane;
  }
  EXPECT_EQ(transitions, 1);
  EXPECT_EQ(prev, 2);
}

TEST(RunScenario, PositionsContinuousAndSpeedConsistent) {
  for (const char* id : {"Sc-01", "Sc-06"}) {
    const auto log = run_scenario(preset_scenario(id));
    const double dt = log.sim_step;
    const auto lead = log.index_of("lead");
    for (std::size_t k = 1; k < log.frames.size(); ++k) {
      for (std::size_t i = 0; i < log.vehicle_ids.size(); ++i) {
        const auto& a = log.frames[k - 1].states[i];
        const auto& b = log.frames[k].states[i];
        const double vmax = std::max(a.speed, b.speed);
        ASSERT_LE(std::hypot(b.x - a.x, b.y - a.y), vmax * dt + 1e-6);
      }
      if (k + 1 < log.frames.size()) {
        const auto& p = log.frames[k - 1].states[lead];
        const auto& n = log.frames[k + 1].states[lead];
        const double fd = std::hypot(n.x - p.x, n.y - p.y) / (2 * dt);
        ASSERT_NEAR(fd, log.frames[k].states[lead].speed, 1e-6);
      }
    }
  }
}

TEST(RunScenario, LateralAccelerationBounded) {
  const auto spec = preset_scenario("Sc-02");
  const auto log = run_scenario(spec);
  const auto ti = log.index_of("target");
  const double dt = log.sim_step;
  const double dy = spec.road.lane_width;
  const double T = spec.maneuvers[0].duration;
  const double max_dd = 10.0 / std::sqrt(3.0);  // max |d2 smoothstep / dtau2|
  const double bound = 2.0 * dy * max_dd / (T * T) + 1e-6;
  for (std::size_t k = 1; k + 1 < log.frames.size(); ++k) {
    const double a = (log.frames[k + 1].states[ti].offset - 2 * log.frames[k].states[ti].offset +
                      log.frames[k - 1].states[ti].offset) /
                     (dt * dt);
    ASSERT_LE(std::abs(a), bound) << "frame " << k;
  }
}

TEST(RunScenario, LeavingTheRoadNamesTheFrame) {
  auto spec = preset_scenario("Sc-05");
  spec.road.length = 300.0;
  try {
    run_scenario(spec);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("frame"), std::string::npos);
  }
}

TEST(RunScenario, OverlapIsAWarningNotAnError) {
  auto spec = preset_scenario("Sc-05");
  for (auto& v : spec.vehicles)
    if (v.id == "follower") v.station = spec.ego().station - 2.0;
  const auto log = run_scenario(spec);
  ASSERT_FALSE(log.warnings.empty());
  EXPECT_EQ(log.warnings[0].frame, 0u);
  EXPECT_EQ(log.frames.size(), 2001u);
}

TEST(ScenarioSpec, ValidationNamesTheProblem) {
  auto spec = preset_scenario("Sc-01");
  spec.maneuvers[0].final_lane = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = preset_scenario("Sc-01");
  spec.vehicles.push_back(spec.vehicles[0]);
  spec.vehicles.back().id = "ego2";
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = preset_scenario("Sc-01");
  spec.duration = 5.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(ScenarioJson, RoundTripsEveryPreset) {
  for (const auto& p : preset_catalogue()) {
    const auto spec = preset_scenario(p.id);
    const auto back = scenario_from_json(nlohmann::json::parse(to_json(spec).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(spec).dump()) << p.id;
  }
}

TEST(ScenarioJson, UnknownKeyIsRejectedWithPath) {
  auto doc = nlohmann::json::parse(to_json(preset_scenario("Sc-01")).dump());
  doc["road"]["banking_deg"] = 2;
  try {
    scenario_from_json(doc);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("scenario.road.banking_deg"), std::string::npos);
  }
}
