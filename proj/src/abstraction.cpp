#include "cpstest/abstraction.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cpstest/util.hpp"
#include "json.hpp"

namespace cpstest::abstraction {

std::vector<std::string> PredicateSet::names() const {
  return {"collision",
          "ego_stopped",
          "in_stop_zone",
          "ped_on_road",
          "speeding(" + format_fixed(speed_limit) + ")",
          "braking"};
}

PredicateSet PredicateSet::for_scenario(const dsl::Scenario& s) {
  PredicateSet p;
  for (const auto& c : s.oracle.longitudinal) {
    if (c.kind == dsl::OracleKind::kSpeedBelow) p.speed_limit = c.value;
  }
  for (const auto& c : s.oracle.lateral) {
    if (c.kind == dsl::OracleKind::kSpeedBelow) p.speed_limit = c.value;
  }
  return p;
}

const char* to_string(Label l) {
  switch (l) {
    case Label::kPositive: return "positive";
    case Label::kNegative: return "negative";
    case Label::kUnlabeled: return "unlabeled";
  }
  return "?";
}

namespace {

std::uint64_t letter_bits(const sim::SimState& st, bool collision,
                          const dsl::Scenario& s, const PredicateSet& p,
                          const sim::SimConfig& cfg) {
  std::uint64_t letter = 0;
  if (collision) letter |= 1ull << PredicateSet::kCollision;
  const double ego_pos = st.positions.at("ego");
  const double ego_speed = st.speeds.at("ego");
  if (ego_speed == 0.0) letter |= 1ull << PredicateSet::kEgoStopped;
  for (const auto& sign : s.road.signs) {
    if (sign.kind == dsl::SignKind::kStop &&
        std::abs(sign.position - ego_pos) <= cfg.stop_zone) {
      letter |= 1ull << PredicateSet::kInStopZone;
    }
  }
  for (const auto& [id, on_road] : st.pedestrian_on_road) {
    if (on_road) letter |= 1ull << PredicateSet::kPedOnRoad;
  }
  if (ego_speed > p.speed_limit) letter |= 1ull << PredicateSet::kSpeeding;
  if (st.ego_braking) letter |= 1ull << PredicateSet::kBraking;
  return letter;
}

}  // namespace

std::uint64_t letter_of_state(const std::vector<sim::SimState>& states,
                              std::size_t index, const dsl::Scenario& s,
                              const PredicateSet& p,
                              const sim::SimConfig& cfg) {
  return letter_bits(states[index], sim::collision_at(states, index, s, cfg),
                     s, p, cfg);
}

LabeledTrace abstract_trace(const sim::Trace& t, const dsl::Scenario& s,
                            const PredicateSet& p, const sim::Verdict& verdict,
                            const sim::SimConfig& cfg) {
  LabeledTrace lt;
  lt.predicates = p;
  lt.label = verdict.pass() ? Label::kPositive : Label::kNegative;
  lt.letters.reserve(t.states.size());
  sim::CollisionTracker tracker(s, cfg);
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    lt.letters.push_back(
        letter_bits(t.states[k], tracker.feed(t.states[k]), s, p, cfg));
  }
  return lt;
}

std::vector<sim::Event> word_of_trace(const sim::Trace& t) {
  return t.events_applied;
}

std::string LabeledTrace::to_json() const {
  nlohmann::ordered_json j;
  j["predicates"] = predicates.names();
  j["speed_limit"] = predicates.speed_limit;
  j["letters"] = nlohmann::ordered_json::array();
  for (std::uint64_t letter : letters) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02llx",
                  static_cast<unsigned long long>(letter));
    j["letters"].push_back(buf);
  }
  j["label"] = to_string(label);
  return j.dump(2);
}

LabeledTrace LabeledTrace::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  LabeledTrace lt;
  lt.predicates.speed_limit = j.at("speed_limit").get<double>();
  for (const auto& hex : j.at("letters")) {
    lt.letters.push_back(
        std::stoull(hex.get<std::string>(), nullptr, 16));
  }
  const std::string label = j.at("label").get<std::string>();
  if (label == "positive") lt.label = Label::kPositive;
  else if (label == "negative") lt.label = Label::kNegative;
  else if (label == "unlabeled") lt.label = Label::kUnlabeled;
  else throw std::runtime_error("bad trace label '" + label + "'");
  return lt;
}

ltl::FormulaPtr formula_for_clause(const dsl::OracleClause& clause,
                                   const PredicateSet& p) {
  const auto names = p.names();
  auto at = [&](int i) { return ltl::atom(i, names[i]); };
  switch (clause.kind) {
    case dsl::OracleKind::kNoCollision:
      return ltl::globally(ltl::negate(at(PredicateSet::kCollision)));
    case dsl::OracleKind::kStopAtSign:
      return ltl::globally(ltl::negate(
          ltl::conj(at(PredicateSet::kInStopZone), at(PredicateSet::kSpeeding))));
    case dsl::OracleKind::kYieldToPedestrian:
      return ltl::globally(ltl::negate(
          ltl::conj(at(PredicateSet::kPedOnRoad), at(PredicateSet::kCollision))));
    case dsl::OracleKind::kSpeedBelow:
      return ltl::globally(ltl::negate(at(PredicateSet::kSpeeding)));
  }
  throw std::logic_error("unhandled oracle clause");
}

}  // namespace cpstest::abstraction
