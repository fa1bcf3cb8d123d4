#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpstest/ltl.hpp"
#include "cpstest/sim.hpp"

namespace cpstest::abstraction {

// Fixed predicate vocabulary; bit i of every letter always means
// predicate i, in this order:
//   0 collision        1 ego_stopped   2 in_stop_zone
//   3 ped_on_road      4 speeding(v)   5 braking
// The speeding threshold comes from the scenario's speed_below clause when
// present, else defaults to 20 m/s.
struct PredicateSet {
  double speed_limit = 20.0;

  static constexpr int kCollision = 0;
  static constexpr int kEgoStopped = 1;
  static constexpr int kInStopZone = 2;
  static constexpr int kPedOnRoad = 3;
  static constexpr int kSpeeding = 4;
  static constexpr int kBraking = 5;
  static constexpr int kCount = 6;

  std::vector<std::string> names() const;

  static PredicateSet for_scenario(const dsl::Scenario& s);

  friend bool operator==(const PredicateSet& a, const PredicateSet& b) {
    return a.speed_limit == b.speed_limit;
  }
};

enum class Label { kPositive, kNegative, kUnlabeled };

const char* to_string(Label l);

struct LabeledTrace {
  std::vector<std::uint64_t> letters;  // one bitmask per state
  PredicateSet predicates;
  Label label = Label::kUnlabeled;

  std::string to_json() const;
  static LabeledTrace from_json(const std::string& text);
};

// Letter for one state; needs the whole prefix for the collision bit (pair
// orientation, see sim::collision_at).
std::uint64_t letter_of_state(const std::vector<sim::SimState>& states,
                              std::size_t index, const dsl::Scenario& s,
                              const PredicateSet& p, const sim::SimConfig& cfg);

LabeledTrace abstract_trace(const sim::Trace& t, const dsl::Scenario& s,
                            const PredicateSet& p, const sim::Verdict& verdict,
                            const sim::SimConfig& cfg);

std::vector<sim::Event> word_of_trace(const sim::Trace& t);

// The LTLf property whose violation corresponds to an oracle clause
// failing, over the standard predicates. stop_at_sign uses the speeding
// bit, so pair it with a PredicateSet whose speed_limit separates
// compliant zone entry speeds from cruise-through speeds.
ltl::FormulaPtr formula_for_clause(const dsl::OracleClause& clause,
                                   const PredicateSet& p);

}  // namespace cpstest::abstraction
