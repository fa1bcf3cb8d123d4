#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpstest/dsl.hpp"

namespace cpstest::sim {

struct SimConfig {
  double dt = 0.1;                 // seconds
  int max_steps = 300;
  double comfortable_decel = 4.0;  // m/s^2, halved while raining
  double collision_gap = 0.5;      // meters
  double stop_zone = 2.0;          // meters

  void check() const;
};

enum class EventKind { kNone, kNpcBrake, kPedCross, kRainOn, kRainOff };

struct Event {
  EventKind kind = EventKind::kNone;
  std::string actor;  // NPC_BRAKE / PED_CROSS only

  friend bool operator==(const Event& a, const Event& b) {
    return a.kind == b.kind && a.actor == b.actor;
  }
  friend auto operator<=>(const Event& a, const Event& b) = default;
};

std::string to_string(const Event& e);
Event parse_event(const std::string& text);

// All events legal for a scenario: NONE, RAIN_ON, RAIN_OFF, one NPC_BRAKE
// per npc vehicle and one PED_CROSS per pedestrian, in a fixed order.
std::vector<Event> event_alphabet(const dsl::Scenario& s);

class InvalidEvent : public std::runtime_error {
 public:
  explicit InvalidEvent(const std::string& what) : std::runtime_error(what) {}
};

struct SimState {
  int step = 0;
  std::map<std::string, double> positions;  // actor id -> meters
  std::map<std::string, double> speeds;     // vehicles only
  dsl::Weather weather = dsl::Weather::kClear;
  std::map<std::string, bool> pedestrian_on_road;
  std::map<std::string, bool> npc_braking;
  bool ego_braking = false;
};

struct Trace {
  std::string scenario_ref;
  double dt = 0.1;
  std::vector<SimState> states;        // executed steps + 1
  std::vector<Event> events_applied;   // length = states.size() - 1

  std::string to_json() const;
  static Trace from_json(const std::string& text);
};

struct Violation {
  dsl::OracleClause clause;
  int first_violation_step = 0;
};

struct Verdict {
  bool pass() const { return violated_clauses.empty(); }
  std::vector<Violation> violated_clauses;
};

// True while a cut_in_at vehicle has not yet entered the lane; everything
// else is always in lane.
bool in_lane(const dsl::NpcVehicle& v, int step);

// One transition of the world. Event side effects apply first, then
// positions advance by v*dt, then controllers choose decelerations from
// the post-move geometry, then speeds update. Pure.
SimState step(const SimState& state, const Event& event,
              const dsl::Scenario& s, const SimConfig& cfg);

SimState initial_state(const dsl::Scenario& s);

// Executes the scenario under `word` (padded with NONE to max_steps),
// halting early at the first collision. Deterministic.
std::pair<Trace, Verdict> run(const dsl::Scenario& s,
                              const std::vector<Event>& word,
                              const SimConfig& cfg);

Verdict evaluate_oracles(const Trace& t, const dsl::Scenario& s,
                         const SimConfig& cfg);

// True at `state` if any ordered vehicle pair or the ego and an on-road
// pedestrian are closer than collision_gap (signed by approach direction,
// so fast movers cannot tunnel through the gap undetected). Needs the
// preceding states to orient pairs that enter the lane late.
bool collision_at(const std::vector<SimState>& states, std::size_t index,
                  const dsl::Scenario& s, const SimConfig& cfg);

// Incremental form of collision_at: feed states in trace order. Pair
// orientation (who is ahead) is fixed at the first state where both
// vehicles share the lane; from then on the signed gap must stay at or
// above collision_gap, so overrunning a vehicle keeps reading as a crash.
class CollisionTracker {
 public:
  CollisionTracker(const dsl::Scenario& s, const SimConfig& cfg);

  // Collision verdict for this state; call once per state, in order.
  bool feed(const SimState& st);

 private:
  struct Vehicle {
    std::string id;
    int cut_in_step = -1;  // -1: always in lane
  };
  struct Ped {
    std::string id;
    double crossing_position = 0.0;
  };
  double collision_gap_;
  std::vector<Vehicle> vehicles_;  // ego first
  std::vector<Ped> pedestrians_;
  std::vector<int> orientation_;   // per pair, 0 until both in lane
};

// Diagnostics for the validator's dry-run stage: runs 10 steps with the
// empty word and reports simulator-level rejections.
std::vector<std::string> dry_run_check(const dsl::Scenario& s);

}  // namespace cpstest::sim
