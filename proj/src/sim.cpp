#include "cpstest/sim.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace cpstest::sim {

namespace {
constexpr const char* kEgoId = "ego";
constexpr double kRainDecelFactor = 0.5;
}  // namespace

void SimConfig::check() const {
  if (dt <= 0 || max_steps < 1 || comfortable_decel <= 0 ||
      collision_gap <= 0 || stop_zone <= 0) {
    throw std::invalid_argument("SimConfig: all constants must be positive");
  }
}

std::string to_string(const Event& e) {
  switch (e.kind) {
    case EventKind::kNone: return "NONE";
    case EventKind::kNpcBrake: return "NPC_BRAKE(" + e.actor + ")";
    case EventKind::kPedCross: return "PED_CROSS(" + e.actor + ")";
    case EventKind::kRainOn: return "RAIN_ON";
    case EventKind::kRainOff: return "RAIN_OFF";
  }
  return "?";
}

Event parse_event(const std::string& text) {
  if (text == "NONE") return {EventKind::kNone, ""};
  if (text == "RAIN_ON") return {EventKind::kRainOn, ""};
  if (text == "RAIN_OFF") return {EventKind::kRainOff, ""};
  auto param_of = [&](const std::string& prefix) -> std::optional<std::string> {
    if (text.size() > prefix.size() + 1 && text.rfind(prefix + "(", 0) == 0 &&
        text.back() == ')') {
      return text.substr(prefix.size() + 1, text.size() - prefix.size() - 2);
    }
    return std::nullopt;
  };
  if (auto id = param_of("NPC_BRAKE")) return {EventKind::kNpcBrake, *id};
  if (auto id = param_of("PED_CROSS")) return {EventKind::kPedCross, *id};
  throw InvalidEvent("unrecognized event '" + text + "'");
}

std::vector<Event> event_alphabet(const dsl::Scenario& s) {
  std::vector<Event> alphabet;
  alphabet.push_back({EventKind::kNone, ""});
  for (const auto& v : s.actors.vehicles) {
    alphabet.push_back({EventKind::kNpcBrake, v.id});
  }
  for (const auto& p : s.actors.pedestrians) {
    alphabet.push_back({EventKind::kPedCross, p.id});
  }
  alphabet.push_back({EventKind::kRainOn, ""});
  alphabet.push_back({EventKind::kRainOff, ""});
  return alphabet;
}

bool in_lane(const dsl::NpcVehicle& v, int step) {
  return v.behavior != dsl::NpcBehaviorKind::kCutInAt ||
         step >= v.behavior_step;
}

SimState initial_state(const dsl::Scenario& s) {
  SimState st;
  st.step = 0;
  st.weather = s.environment.weather;
  st.positions[kEgoId] = s.actors.ego.start_position;
  st.speeds[kEgoId] = s.actors.ego.start_speed;
  for (const auto& v : s.actors.vehicles) {
    st.positions[v.id] = v.start_position;
    st.speeds[v.id] = v.start_speed;
    st.npc_braking[v.id] = false;
  }
  for (const auto& p : s.actors.pedestrians) {
    st.positions[p.id] = p.crossing_position;
    st.pedestrian_on_road[p.id] = false;
  }
  return st;
}

namespace {

double effective_decel(const SimState& st, const SimConfig& cfg) {
  double a = cfg.comfortable_decel;
  if (st.weather == dsl::Weather::kRain) a *= kRainDecelFactor;
  return a;
}

bool fault_active(const dsl::FaultSpec& fault, const SimState& st,
                  const dsl::Scenario& s) {
  if (!fault.guard) return true;
  if (fault.guard->field == dsl::FaultGuard::Field::kWeather) {
    return st.weather == fault.guard->weather_value;
  }
  return s.environment.time_of_day == fault.guard->time_value;
}

bool fault_applies(const dsl::Scenario& s, const SimState& st,
                   dsl::FaultKind kind) {
  const auto& fault = s.actors.ego.fault;
  return fault && fault->kind == kind && fault_active(*fault, st, s);
}

void apply_event(SimState& st, const Event& event, const dsl::Scenario& s) {
  switch (event.kind) {
    case EventKind::kNone:
      break;
    case EventKind::kRainOn:
      st.weather = dsl::Weather::kRain;
      break;
    case EventKind::kRainOff:
      st.weather = dsl::Weather::kClear;
      break;
    case EventKind::kNpcBrake: {
      auto it = st.npc_braking.find(event.actor);
      if (it == st.npc_braking.end()) {
        throw InvalidEvent("NPC_BRAKE references unknown vehicle '" +
                           event.actor + "'");
      }
      it->second = true;
      break;
    }
    case EventKind::kPedCross: {
      const dsl::Pedestrian* ped = nullptr;
      for (const auto& p : s.actors.pedestrians) {
        if (p.id == event.actor) ped = &p;
      }
      if (!ped) {
        throw InvalidEvent("PED_CROSS references unknown pedestrian '" +
                           event.actor + "'");
      }
      double ahead = ped->crossing_position - st.positions.at(kEgoId);
      if (ahead >= 0 && ahead <= ped->trigger_distance) {
        st.pedestrian_on_road[event.actor] = true;
      }
      break;
    }
  }
}

}  // namespace

CollisionTracker::CollisionTracker(const dsl::Scenario& s,
                                   const SimConfig& cfg)
    : collision_gap_(cfg.collision_gap) {
  vehicles_.push_back({kEgoId, -1});
  for (const auto& v : s.actors.vehicles) {
    vehicles_.push_back(
        {v.id, v.behavior == dsl::NpcBehaviorKind::kCutInAt ? v.behavior_step
                                                            : -1});
  }
  for (const auto& p : s.actors.pedestrians) {
    pedestrians_.push_back({p.id, p.crossing_position});
  }
  orientation_.assign(vehicles_.size() * vehicles_.size(), 0);
}

bool CollisionTracker::feed(const SimState& st) {
  bool hit = false;
  auto lane = [&](const Vehicle& v) {
    return v.cut_in_step < 0 || st.step >= v.cut_in_step;
  };
  for (std::size_t i = 0; i < vehicles_.size() && !hit; ++i) {
    for (std::size_t j = i + 1; j < vehicles_.size() && !hit; ++j) {
      if (!lane(vehicles_[i]) || !lane(vehicles_[j])) continue;
      int& orient = orientation_[i * vehicles_.size() + j];
      double delta =
          st.positions.at(vehicles_[j].id) - st.positions.at(vehicles_[i].id);
      if (orient == 0) orient = delta >= 0 ? +1 : -1;
      if (orient * delta < collision_gap_) hit = true;
    }
  }
  for (const auto& p : pedestrians_) {
    if (hit) break;
    if (!st.pedestrian_on_road.at(p.id)) continue;
    if (p.crossing_position - st.positions.at(kEgoId) < collision_gap_) {
      hit = true;
    }
  }
  return hit;
}

SimState step(const SimState& state, const Event& event,
              const dsl::Scenario& s, const SimConfig& cfg) {
  SimState next = state;
  next.step = state.step + 1;

  apply_event(next, event, s);

  // Scripted npc behaviors fire by transition index (= source state step).
  for (const auto& v : s.actors.vehicles) {
    if (v.behavior == dsl::NpcBehaviorKind::kBrakeAt &&
        state.step >= v.behavior_step) {
      next.npc_braking[v.id] = true;
    }
  }

  // Kinematics: positions advance with the pre-update speeds.
  for (auto& [id, pos] : next.positions) {
    auto sp = state.speeds.find(id);
    if (sp != state.speeds.end()) pos += sp->second * cfg.dt;
  }

  // Controller decisions are taken against the post-move geometry; with
  // x' = x + v*dt this keeps the constant-deceleration stopping distance
  // exact on the discrete grid.
  const double decel = effective_decel(next, cfg);
  const double ego_pos = next.positions.at(kEgoId);
  const double ego_speed = state.speeds.at(kEgoId);
  const double envelope = ego_speed * ego_speed / (2.0 * decel) + cfg.stop_zone;

  bool brake = false;
  if (!fault_applies(s, next, dsl::FaultKind::kIgnoreStopSign)) {
    for (const auto& sign : s.road.signs) {
      if (sign.kind != dsl::SignKind::kStop) continue;
      double dist = sign.position - ego_pos;
      if (dist >= 0 && dist <= envelope) brake = true;
    }
  }
  if (!fault_applies(s, next, dsl::FaultKind::kIgnoreLeadVehicle)) {
    for (const auto& v : s.actors.vehicles) {
      if (!in_lane(v, next.step)) continue;
      double gap = next.positions.at(v.id) - ego_pos;
      if (gap >= 0 && gap <= envelope) brake = true;
    }
  }
  if (!fault_applies(s, next, dsl::FaultKind::kIgnorePedestrian)) {
    for (const auto& p : s.actors.pedestrians) {
      if (!next.pedestrian_on_road.at(p.id)) continue;
      double dist = p.crossing_position - ego_pos;
      if (dist >= 0 && dist <= envelope) brake = true;
    }
  }
  next.ego_braking = brake;
  double ego_accel = brake ? -decel : 0.0;
  next.speeds[kEgoId] = std::max(0.0, ego_speed + ego_accel * cfg.dt);

  for (const auto& v : s.actors.vehicles) {
    double sp = state.speeds.at(v.id);
    if (next.npc_braking.at(v.id)) {
      sp = std::max(0.0, sp - decel * cfg.dt);
    }
    next.speeds[v.id] = sp;
  }

  return next;
}

bool collision_at(const std::vector<SimState>& states, std::size_t index,
                  const dsl::Scenario& s, const SimConfig& cfg) {
  CollisionTracker tracker(s, cfg);
  bool hit = false;
  for (std::size_t k = 0; k <= index && k < states.size(); ++k) {
    hit = tracker.feed(states[k]);
  }
  return hit;
}

std::pair<Trace, Verdict> run(const dsl::Scenario& s,
                              const std::vector<Event>& word,
                              const SimConfig& cfg) {
  cfg.check();
  if (static_cast<int>(word.size()) > cfg.max_steps) {
    throw std::invalid_argument("run: event word longer than max_steps");
  }
  const auto alphabet = event_alphabet(s);
  for (const Event& e : word) {
    if (std::find(alphabet.begin(), alphabet.end(), e) == alphabet.end()) {
      throw InvalidEvent("event " + to_string(e) +
                         " does not reference a declared actor");
    }
  }

  Trace trace;
  trace.scenario_ref = s.name;
  trace.dt = cfg.dt;
  trace.states.push_back(initial_state(s));

  CollisionTracker tracker(s, cfg);
  bool collided = tracker.feed(trace.states[0]);

  for (int k = 0; k < cfg.max_steps && !collided; ++k) {
    Event e = k < static_cast<int>(word.size()) ? word[k]
                                                : Event{EventKind::kNone, ""};
    trace.states.push_back(step(trace.states.back(), e, s, cfg));
    trace.events_applied.push_back(e);
    collided = tracker.feed(trace.states.back());
  }

  return {trace, evaluate_oracles(trace, s, cfg)};
}

namespace {

std::optional<int> first_collision_step(const Trace& t,
                                        const dsl::Scenario& s,
                                        const SimConfig& cfg) {
  CollisionTracker tracker(s, cfg);
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    if (tracker.feed(t.states[k])) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<int> stop_sign_violation_step(const Trace& t,
                                            const dsl::Scenario& s,
                                            const SimConfig& cfg,
                                            double max_overshoot) {
  std::optional<int> best;
  for (const auto& sign : s.road.signs) {
    if (sign.kind != dsl::SignKind::kStop) continue;
    bool stopped_in_zone = false;
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      const SimState& st = t.states[k];
      double pos = st.positions.at(kEgoId);
      double speed = st.speeds.at(kEgoId);
      if (speed == 0.0 && std::abs(sign.position - pos) <= cfg.stop_zone) {
        stopped_in_zone = true;
      }
      if (pos > sign.position + max_overshoot && speed > 0.1 &&
          !stopped_in_zone) {
        if (!best || static_cast<int>(k) < *best) best = static_cast<int>(k);
        break;
      }
    }
  }
  return best;
}

std::optional<int> yield_violation_step(const Trace& t,
                                        const dsl::Scenario& s) {
  std::optional<int> best;
  for (const auto& p : s.actors.pedestrians) {
    for (std::size_t k = 1; k < t.states.size(); ++k) {
      const SimState& st = t.states[k];
      const SimState& prev = t.states[k - 1];
      if (!st.pedestrian_on_road.at(p.id)) continue;
      if (st.positions.at(kEgoId) > p.crossing_position &&
          prev.positions.at(kEgoId) <= p.crossing_position) {
        if (!best || static_cast<int>(k) < *best) best = static_cast<int>(k);
        break;
      }
    }
  }
  return best;
}

std::optional<int> speeding_step(const Trace& t, double limit) {
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    if (t.states[k].speeds.at(kEgoId) > limit) return static_cast<int>(k);
  }
  return std::nullopt;
}

}  // namespace

Verdict evaluate_oracles(const Trace& t, const dsl::Scenario& s,
                         const SimConfig& cfg) {
  Verdict verdict;
  auto check_clause = [&](const dsl::OracleClause& clause) {
    std::optional<int> step;
    switch (clause.kind) {
      case dsl::OracleKind::kNoCollision:
        step = first_collision_step(t, s, cfg);
        break;
      case dsl::OracleKind::kStopAtSign:
        step = stop_sign_violation_step(t, s, cfg, clause.value);
        break;
      case dsl::OracleKind::kYieldToPedestrian:
        step = yield_violation_step(t, s);
        break;
      case dsl::OracleKind::kSpeedBelow:
        step = speeding_step(t, clause.value);
        break;
    }
    if (step) verdict.violated_clauses.push_back({clause, *step});
  };
  for (const auto& c : s.oracle.longitudinal) check_clause(c);
  for (const auto& c : s.oracle.lateral) check_clause(c);
  return verdict;
}

std::string Trace::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_ref;
  j["dt"] = dt;
  j["states"] = nlohmann::ordered_json::array();
  for (const SimState& st : states) {
    nlohmann::ordered_json js;
    js["step"] = st.step;
    js["positions"] = st.positions;
    js["speeds"] = st.speeds;
    js["weather"] = dsl::to_string(st.weather);
    js["pedestrian_on_road"] = st.pedestrian_on_road;
    js["npc_braking"] = st.npc_braking;
    js["ego_braking"] = st.ego_braking;
    j["states"].push_back(std::move(js));
  }
  j["events"] = nlohmann::ordered_json::array();
  for (const Event& e : events_applied) j["events"].push_back(to_string(e));
  return j.dump(2);
}

Trace Trace::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Trace t;
  t.scenario_ref = j.at("scenario").get<std::string>();
  t.dt = j.at("dt").get<double>();
  for (const auto& js : j.at("states")) {
    SimState st;
    st.step = js.at("step").get<int>();
    st.positions = js.at("positions").get<std::map<std::string, double>>();
    st.speeds = js.at("speeds").get<std::map<std::string, double>>();
    const std::string w = js.at("weather").get<std::string>();
    st.weather = w == "rain"   ? dsl::Weather::kRain
                 : w == "fog"  ? dsl::Weather::kFog
                               : dsl::Weather::kClear;
    st.pedestrian_on_road =
        js.at("pedestrian_on_road").get<std::map<std::string, bool>>();
    st.npc_braking = js.at("npc_braking").get<std::map<std::string, bool>>();
    st.ego_braking = js.at("ego_braking").get<bool>();
    t.states.push_back(std::move(st));
  }
  for (const auto& je : j.at("events")) {
    t.events_applied.push_back(parse_event(je.get<std::string>()));
  }
  return t;
}

std::vector<std::string> dry_run_check(const dsl::Scenario& s) {
  std::vector<std::string> problems;
  SimConfig cfg;
  cfg.max_steps = 10;
  try {
    auto [trace, verdict] = run(s, {}, cfg);
    if (collision_at(trace.states, 0, s, cfg)) {
      problems.push_back("scenario starts in a colliding configuration");
    }
  } catch (const std::exception& e) {
    problems.push_back(std::string("simulator rejected scenario: ") + e.what());
  }
  return problems;
}

}  // namespace cpstest::sim
