#include <cmath>

#include "cpstest/abstraction.hpp"
#include "cpstest/dsl.hpp"
#include "cpstest/sim.hpp"
#include "doctest.h"
#include "kinematics.hpp"

using namespace cpstest;

namespace {

dsl::Scenario stop_sign_scenario(double speed, double sign_pos,
                                 bool faulted = false) {
  dsl::Scenario s;
  s.name = "stop_sign";
  dsl::Sign sign;
  sign.kind = dsl::SignKind::kStop;
  sign.position = sign_pos;
  s.road.signs.push_back(sign);
  s.actors.ego.start_speed = speed;
  if (faulted) {
    s.actors.ego.fault = dsl::FaultSpec{dsl::FaultKind::kIgnoreStopSign, {}};
  }
  dsl::OracleClause c;
  c.kind = dsl::OracleKind::kStopAtSign;
  c.value = 0.5;
  s.oracle.longitudinal.push_back(c);
  return s;
}

dsl::Scenario lead_scenario(double ego_speed, double gap, double lead_speed,
                            bool faulted = false) {
  dsl::Scenario s;
  s.name = "lead";
  s.actors.ego.start_speed = ego_speed;
  dsl::NpcVehicle lead;
  lead.id = "lead";
  lead.start_position = gap;
  lead.start_speed = lead_speed;
  s.actors.vehicles.push_back(lead);
  if (faulted) {
    s.actors.ego.fault = dsl::FaultSpec{dsl::FaultKind::kIgnoreLeadVehicle, {}};
  }
  dsl::OracleClause c;
  c.kind = dsl::OracleKind::kNoCollision;
  s.oracle.longitudinal.push_back(c);
  return s;
}

dsl::Scenario ped_scenario(double ego_speed, double crossing, double trigger,
                           bool faulted = false) {
  dsl::Scenario s;
  s.name = "ped";
  s.actors.ego.start_speed = ego_speed;
  dsl::Pedestrian p;
  p.id = "walker";
  p.crossing_position = crossing;
  p.trigger_distance = trigger;
  s.actors.pedestrians.push_back(p);
  if (faulted) {
    s.actors.ego.fault = dsl::FaultSpec{dsl::FaultKind::kIgnorePedestrian, {}};
  }
  dsl::OracleClause c;
  c.kind = dsl::OracleKind::kNoCollision;
  s.oracle.longitudinal.push_back(c);
  dsl::OracleClause y;
  y.kind = dsl::OracleKind::kYieldToPedestrian;
  s.oracle.longitudinal.push_back(y);
  return s;
}

}  // namespace

TEST_CASE("stop sign: braking onset and stop position match the "
          "independent arithmetic") {
  // Ego from rest position 0 at 10 m/s toward a stop sign at 80 m: the
  // envelope is v^2/8 + 2 = 14.5 m, so braking starts at the first state
  // with distance <= 14.5 and the ego must come to rest short of the sign.
  auto oracle = test_oracles::stopping_profile(10.0, 80.0);
  REQUIRE(oracle.first_brake_state > 0);
  CHECK(oracle.brake_distance <= 14.5);
  CHECK(oracle.stop_position < 80.0);

  auto s = stop_sign_scenario(10.0, 80.0);
  sim::SimConfig cfg;
  auto [trace, verdict] = sim::run(s, {}, cfg);
  CHECK(verdict.pass());

  int first_brake = -1;
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    if (trace.states[k].ego_braking) {
      first_brake = static_cast<int>(k);
      break;
    }
  }
  REQUIRE(first_brake == oracle.first_brake_state);
  double dist_at_brake = 80.0 - trace.states[first_brake].positions.at("ego");
  CHECK(dist_at_brake == doctest::Approx(oracle.brake_distance));
  CHECK(dist_at_brake <= 14.5);
  // The state before still had distance beyond the envelope.
  CHECK(80.0 - trace.states[first_brake - 1].positions.at("ego") > 14.5);

  // Full stop before the sign.
  int stop_state = -1;
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    if (trace.states[k].speeds.at("ego") == 0.0) {
      stop_state = static_cast<int>(k);
      break;
    }
  }
  REQUIRE(stop_state > 0);
  double stop_pos = trace.states[stop_state].positions.at("ego");
  CHECK(stop_pos == doctest::Approx(oracle.stop_position));
  CHECK(stop_pos < 80.0);
  // Frozen from the arithmetic: onset at state 66 (x = 66), rest at 78.0.
  CHECK(first_brake == 66);
  CHECK(stop_pos == doctest::Approx(78.0));
}

TEST_CASE("lone ego with empty word passes") {
  dsl::Scenario s;
  s.name = "lonely";
  s.actors.ego.start_speed = 10.0;
  dsl::OracleClause c;
  c.kind = dsl::OracleKind::kNoCollision;
  s.oracle.longitudinal.push_back(c);
  auto [trace, verdict] = sim::run(s, {}, sim::SimConfig{});
  CHECK(verdict.pass());
  CHECK(trace.states.size() == 301);  // max_steps + initial
}

TEST_CASE("30 m/s into a stopped lead 20 m ahead collides") {
  // Stopping needs 112.5 m (closed form), only 20 available.
  auto s = lead_scenario(30.0, 20.0, 0.0);
  sim::SimConfig cfg;
  auto [trace, verdict] = sim::run(s, {}, cfg);
  REQUIRE_FALSE(verdict.pass());
  REQUIRE(verdict.violated_clauses.size() == 1);
  CHECK(verdict.violated_clauses[0].clause.kind ==
        dsl::OracleKind::kNoCollision);
  // Frozen from step arithmetic: positions 0,3,5.96,...,20.16 cross the
  // 0.5 m signed gap at state 7.
  CHECK(verdict.violated_clauses[0].first_violation_step == 7);
  // Early halt: no states after the collision.
  CHECK(trace.states.size() == 8);
  CHECK(trace.events_applied.size() == 7);
}

TEST_CASE("step: ego at rest with no obstacles is a fixpoint") {
  dsl::Scenario s;
  s.name = "still";
  dsl::OracleClause c;
  c.kind = dsl::OracleKind::kNoCollision;
  s.oracle.longitudinal.push_back(c);
  auto st0 = sim::initial_state(s);
  auto st1 = sim::step(st0, {sim::EventKind::kNone, ""}, s, sim::SimConfig{});
  CHECK(st1.step == 1);
  CHECK(st1.positions.at("ego") == st0.positions.at("ego"));
  CHECK(st1.speeds.at("ego") == 0.0);
  CHECK_FALSE(st1.ego_braking);
}

TEST_CASE("PED_CROSS beyond trigger distance leaves the pedestrian off road") {
  auto s = ped_scenario(10.0, 150.0, 20.0);
  auto st0 = sim::initial_state(s);
  auto st1 = sim::step(st0, {sim::EventKind::kPedCross, "walker"}, s,
                       sim::SimConfig{});
  CHECK_FALSE(st1.pedestrian_on_road.at("walker"));
}

TEST_CASE("faulted ignore_pedestrian does not brake where the unfaulted "
          "controller does") {
  sim::SimConfig cfg;
  auto build_states = [&](bool faulted) {
    auto s = ped_scenario(10.0, 12.0, 20.0, faulted);
    auto st0 = sim::initial_state(s);
    // Pedestrian steps onto the road 12 m ahead (within trigger range).
    auto st1 =
        sim::step(st0, {sim::EventKind::kPedCross, "walker"}, s, cfg);
    return st1;
  };
  auto faulted = build_states(true);
  auto unfaulted = build_states(false);
  CHECK(unfaulted.ego_braking);
  CHECK(unfaulted.speeds.at("ego") < 10.0);
  CHECK_FALSE(faulted.ego_braking);
  CHECK(faulted.speeds.at("ego") == 10.0);
}

TEST_CASE("determinism: identical runs produce byte-identical traces") {
  auto s = lead_scenario(12.0, 60.0, 8.0);
  std::vector<sim::Event> word{{sim::EventKind::kNpcBrake, "lead"},
                               {sim::EventKind::kRainOn, ""}};
  auto [t1, v1] = sim::run(s, word, sim::SimConfig{});
  auto [t2, v2] = sim::run(s, word, sim::SimConfig{});
  CHECK(t1.to_json() == t2.to_json());
  CHECK(v1.pass() == v2.pass());
}

TEST_CASE("safety monotonicity on a coarse grid") {
  // Unfaulted ego vs one static obstacle: pass iff the initial gap clears
  // the closed-form threshold (one-cell tolerance band at v*dt).
  sim::SimConfig cfg;
  for (double v : {5.0, 10.0, 20.0}) {
    for (double gap : {10.0, 20.0, 40.0, 80.0, 120.0}) {
      auto s = lead_scenario(v, gap, 0.0);
      auto [trace, verdict] = sim::run(s, {}, cfg);
      double threshold = test_oracles::collision_threshold(v);
      CAPTURE(v);
      CAPTURE(gap);
      if (std::abs(gap - threshold) < v * cfg.dt) continue;  // band
      CHECK(verdict.pass() == (gap > threshold));
    }
  }
}

TEST_CASE("fault soundness: each fault kind fails its oracle where the "
          "rule follower passes") {
  sim::SimConfig cfg;

  SUBCASE("ignore_stop_sign vs stop_at_sign") {
    auto bad = sim::run(stop_sign_scenario(10.0, 80.0, true), {}, cfg);
    auto good = sim::run(stop_sign_scenario(10.0, 80.0, false), {}, cfg);
    CHECK_FALSE(bad.second.pass());
    CHECK(bad.second.violated_clauses[0].clause.kind ==
          dsl::OracleKind::kStopAtSign);
    CHECK(good.second.pass());
  }
  SUBCASE("ignore_lead_vehicle vs no_collision") {
    std::vector<sim::Event> word{{sim::EventKind::kNpcBrake, "lead"}};
    auto bad = sim::run(lead_scenario(10.0, 60.0, 10.0, true), word, cfg);
    auto good = sim::run(lead_scenario(10.0, 60.0, 10.0, false), word, cfg);
    CHECK_FALSE(bad.second.pass());
    CHECK(good.second.pass());
  }
  SUBCASE("ignore_pedestrian vs yield_to_pedestrian") {
    std::vector<sim::Event> word{{sim::EventKind::kPedCross, "walker"}};
    auto bad = sim::run(ped_scenario(8.0, 60.0, 70.0, true), word, cfg);
    auto good = sim::run(ped_scenario(8.0, 60.0, 70.0, false), word, cfg);
    REQUIRE_FALSE(bad.second.pass());
    bool yield_violated = false;
    for (const auto& v : bad.second.violated_clauses) {
      if (v.clause.kind == dsl::OracleKind::kYieldToPedestrian) {
        yield_violated = true;
      }
    }
    CHECK(yield_violated);
    CHECK(good.second.pass());
  }
}

TEST_CASE("rain halves the braking capability") {
  // With rain active from the start, the envelope doubles: braking starts
  // earlier and the stopping distance from 10 m/s becomes v^2/4 = 25 m.
  auto s = lead_scenario(10.0, 60.0, 0.0);
  s.environment.weather = dsl::Weather::kRain;
  sim::SimConfig cfg;
  auto [trace, verdict] = sim::run(s, {}, cfg);
  CHECK(verdict.pass());
  auto rain_oracle = test_oracles::stopping_profile(10.0, 60.0, 2.0);
  int stop_state = -1;
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    if (trace.states[k].speeds.at("ego") == 0.0) {
      stop_state = static_cast<int>(k);
      break;
    }
  }
  REQUIRE(stop_state > 0);
  CHECK(trace.states[stop_state].positions.at("ego") ==
        doctest::Approx(rain_oracle.stop_position));
}

TEST_CASE("events referencing unknown actors raise InvalidEvent") {
  auto s = lead_scenario(10.0, 60.0, 10.0);
  CHECK_THROWS_AS(
      sim::run(s, {{sim::EventKind::kNpcBrake, "ghost"}}, sim::SimConfig{}),
      sim::InvalidEvent);
  CHECK_THROWS_AS(
      sim::run(s, {{sim::EventKind::kPedCross, "lead"}}, sim::SimConfig{}),
      sim::InvalidEvent);
}

TEST_CASE("word longer than max_steps violates the precondition") {
  auto s = lead_scenario(10.0, 60.0, 10.0);
  sim::SimConfig cfg;
  cfg.max_steps = 3;
  std::vector<sim::Event> word(4, {sim::EventKind::kNone, ""});
  CHECK_THROWS_AS(sim::run(s, word, cfg), std::invalid_argument);
}

TEST_CASE("trace events are the word padded with NONE") {
  auto s = lead_scenario(10.0, 100.0, 10.0);
  sim::SimConfig cfg;
  cfg.max_steps = 10;
  std::vector<sim::Event> word{{sim::EventKind::kRainOn, ""}};
  auto [trace, verdict] = sim::run(s, word, cfg);
  auto replayed = abstraction::word_of_trace(trace);
  REQUIRE(replayed.size() == 10);
  CHECK(replayed[0].kind == sim::EventKind::kRainOn);
  for (std::size_t i = 1; i < replayed.size(); ++i) {
    CHECK(replayed[i].kind == sim::EventKind::kNone);
  }
}

TEST_CASE("event text round-trips") {
  for (const char* text : {"NONE", "RAIN_ON", "RAIN_OFF", "NPC_BRAKE(lead)",
                           "PED_CROSS(walker)"}) {
    CHECK(sim::to_string(sim::parse_event(text)) == text);
  }
  CHECK_THROWS_AS(sim::parse_event("WIBBLE"), sim::InvalidEvent);
}

TEST_CASE("trace JSON round-trips") {
  auto s = lead_scenario(12.0, 50.0, 6.0);
  sim::SimConfig cfg;
  cfg.max_steps = 20;
  auto [trace, verdict] = sim::run(s, {{sim::EventKind::kNpcBrake, "lead"}},
                                   cfg);
  auto parsed = sim::Trace::from_json(trace.to_json());
  CHECK(parsed.to_json() == trace.to_json());
}

TEST_CASE("positions are monotone non-decreasing per vehicle") {
  auto s = lead_scenario(15.0, 40.0, 5.0);
  auto [trace, verdict] = sim::run(s, {{sim::EventKind::kNpcBrake, "lead"}},
                                   sim::SimConfig{});
  for (std::size_t k = 1; k < trace.states.size(); ++k) {
    for (const auto& [id, pos] : trace.states[k].positions) {
      CHECK(pos >= trace.states[k - 1].positions.at(id));
    }
  }
}
