#include <set>

#include "cpstest/dsl.hpp"
#include "cpstest/sim.hpp"
#include "json.hpp"

namespace cpstest::dsl {

bool ValidationReport::valid() const {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::kError) return false;
  }
  return true;
}

namespace {

const char* to_string(Stage s) {
  switch (s) {
    case Stage::kSyntax: return "syntax";
    case Stage::kSemantic: return "semantic";
    case Stage::kDryRun: return "dry_run";
  }
  return "?";
}

const char* to_string(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

}  // namespace

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["verdict"] = valid() ? "valid" : "invalid";
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : diagnostics) {
    nlohmann::ordered_json jd;
    jd["stage"] = to_string(d.stage);
    jd["severity"] = to_string(d.severity);
    jd["message"] = d.message;
    jd["span"] = {{"offset", d.span.offset},
                  {"length", d.span.length},
                  {"line", d.span.line},
                  {"column", d.span.column}};
    j["diagnostics"].push_back(std::move(jd));
  }
  return j.dump(2);
}

ValidationReport validate_semantic(const Scenario& s) {
  ValidationReport report;
  auto error = [&](const std::string& message, const Span& span) {
    report.diagnostics.push_back(
        {Stage::kSemantic, Severity::kError, message, span});
  };

  // Actor identifiers must be unique ("ego" is reserved).
  std::set<std::string> ids{"ego"};
  auto check_id = [&](const std::string& id, const Span& span) {
    if (!ids.insert(id).second) {
      error("duplicate actor identifier '" + id + "'", span);
    }
  };
  for (const auto& v : s.actors.vehicles) check_id(v.id, v.span);
  for (const auto& p : s.actors.pedestrians) check_id(p.id, p.span);

  // Road layout.
  double prev_sign_pos = -1.0;
  bool have_stop_sign = false;
  for (const auto& sign : s.road.signs) {
    if (sign.kind == SignKind::kStop) have_stop_sign = true;
    if (sign.position < 0 || sign.position > kRoadLength) {
      error("sign position " + std::to_string(sign.position) +
                " outside road [0, 200]",
            sign.span);
    }
    if (sign.position <= prev_sign_pos) {
      error("sign positions must be strictly increasing", sign.span);
    }
    prev_sign_pos = sign.position;
    if (sign.kind == SignKind::kSpeedLimit && sign.limit <= 0) {
      error("speed_limit value must be positive", sign.span);
    }
  }
  for (const auto& m : s.road.markers) {
    if (m.kind == MarkerKind::kCrosswalk &&
        (m.position < 0 || m.position > kRoadLength)) {
      error("crosswalk position outside road [0, 200]", m.span);
    }
  }

  // Actors.
  const EgoSpec& ego = s.actors.ego;
  if (ego.start_speed < 0) {
    error("ego start_speed must be non-negative", ego.span);
  }
  if (ego.start_speed > kMaxSpeed) {
    error("ego start_speed exceeds 40 m/s", ego.span);
  }
  for (const auto& v : s.actors.vehicles) {
    if (v.start_position <= ego.start_position) {
      error("vehicle '" + v.id +
                "' must start ahead of the ego (single-lane world)",
            v.span);
    }
    if (v.start_speed < 0) {
      error("vehicle '" + v.id + "' start_speed must be non-negative", v.span);
    }
    if (v.start_speed > kMaxSpeed) {
      error("vehicle '" + v.id + "' start_speed exceeds 40 m/s", v.span);
    }
    if (v.behavior != NpcBehaviorKind::kCruise && v.behavior_step < 0) {
      error("vehicle '" + v.id + "' behavior step must be non-negative",
            v.span);
    }
  }
  for (const auto& p : s.actors.pedestrians) {
    if (p.trigger_distance <= 0) {
      error("pedestrian '" + p.id + "' trigger_distance must be positive",
            p.span);
    }
    if (p.crossing_position < 0 || p.crossing_position > kRoadLength) {
      error("pedestrian '" + p.id + "' crossing_position outside road [0, 200]",
            p.span);
    }
  }

  // Oracle.
  if (s.oracle.longitudinal.empty() && s.oracle.lateral.empty()) {
    error("oracle must contain at least one clause", s.oracle.span);
  }
  auto check_clause = [&](const OracleClause& c) {
    if (c.kind == OracleKind::kStopAtSign) {
      if (!have_stop_sign) {
        error("oracle references missing sign: stop_at_sign requires a stop "
              "sign in road.signs",
              c.span);
      }
      if (c.value < 0) error("max_overshoot must be non-negative", c.span);
    }
    if (c.kind == OracleKind::kSpeedBelow && c.value <= 0) {
      error("speed_below limit must be positive", c.span);
    }
  };
  for (const auto& c : s.oracle.longitudinal) check_clause(c);
  for (const auto& c : s.oracle.lateral) check_clause(c);

  return report;
}

ValidationReport validate_scenario(const Scenario& s, bool run_dry) {
  ValidationReport report = validate_semantic(s);
  if (run_dry && report.valid()) {
    for (const std::string& problem : sim::dry_run_check(s)) {
      report.diagnostics.push_back(
          {Stage::kDryRun, Severity::kError, problem, s.span});
    }
  }
  return report;
}

}  // namespace cpstest::dsl
