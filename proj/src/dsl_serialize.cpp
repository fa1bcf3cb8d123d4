#include <sstream>

#include "cpstest/dsl.hpp"
#include "cpstest/util.hpp"

namespace cpstest::dsl {

std::string to_string(const OracleClause& c) {
  switch (c.kind) {
    case OracleKind::kNoCollision: return "no_collision";
    case OracleKind::kStopAtSign:
      return "stop_at_sign(" + format_fixed(c.value) + ")";
    case OracleKind::kYieldToPedestrian: return "yield_to_pedestrian";
    case OracleKind::kSpeedBelow:
      return "speed_below(" + format_fixed(c.value) + ")";
  }
  return "?";
}

namespace {

void write_clauses(std::ostringstream& out, const char* key,
                   const std::vector<OracleClause>& clauses) {
  if (clauses.empty()) return;
  out << "    " << key << ": [";
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) out << ", ";
    out << to_string(clauses[i]);
  }
  out << "];\n";
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "scenario " << s.name << " {\n";

  out << "  environment {\n";
  out << "    weather: " << to_string(s.environment.weather) << ";\n";
  out << "    time_of_day: " << to_string(s.environment.time_of_day) << ";\n";
  out << "  }\n";

  out << "  road {\n";
  out << "    type: " << to_string(s.road.road_type) << ";\n";
  if (!s.road.markers.empty()) {
    out << "    markers: [";
    for (std::size_t i = 0; i < s.road.markers.size(); ++i) {
      if (i) out << ", ";
      const Marker& m = s.road.markers[i];
      switch (m.kind) {
        case MarkerKind::kSolidCenter: out << "solid_center"; break;
        case MarkerKind::kDashedCenter: out << "dashed_center"; break;
        case MarkerKind::kCrosswalk:
          out << "crosswalk @ " << format_fixed(m.position);
          break;
      }
    }
    out << "];\n";
  }
  if (!s.road.signs.empty()) {
    out << "    signs: [";
    for (std::size_t i = 0; i < s.road.signs.size(); ++i) {
      if (i) out << ", ";
      const Sign& sign = s.road.signs[i];
      if (sign.kind == SignKind::kStop) {
        out << "stop";
      } else {
        out << "speed_limit(" << format_fixed(sign.limit) << ")";
      }
      out << " @ " << format_fixed(sign.position);
    }
    out << "];\n";
  }
  out << "  }\n";

  out << "  actors {\n";
  out << "    ego {\n";
  out << "      start_position: " << format_fixed(s.actors.ego.start_position)
      << ";\n";
  out << "      start_speed: " << format_fixed(s.actors.ego.start_speed)
      << ";\n";
  out << "      controller: ";
  if (!s.actors.ego.fault) {
    out << "rule_follower";
  } else {
    const FaultSpec& f = *s.actors.ego.fault;
    out << "faulted(" << to_string(f.kind);
    if (f.guard) {
      out << " when ";
      if (f.guard->field == FaultGuard::Field::kWeather) {
        out << "weather = " << to_string(f.guard->weather_value);
      } else {
        out << "time_of_day = " << to_string(f.guard->time_value);
      }
    }
    out << ")";
  }
  out << ";\n";
  out << "    }\n";
  for (const NpcVehicle& v : s.actors.vehicles) {
    out << "    vehicle " << v.id << " {\n";
    out << "      start_position: " << format_fixed(v.start_position) << ";\n";
    out << "      start_speed: " << format_fixed(v.start_speed) << ";\n";
    out << "      behavior: ";
    switch (v.behavior) {
      case NpcBehaviorKind::kCruise: out << "cruise"; break;
      case NpcBehaviorKind::kBrakeAt:
        out << "brake_at(" << v.behavior_step << ")";
        break;
      case NpcBehaviorKind::kCutInAt:
        out << "cut_in_at(" << v.behavior_step << ")";
        break;
    }
    out << ";\n";
    out << "    }\n";
  }
  for (const Pedestrian& p : s.actors.pedestrians) {
    out << "    pedestrian " << p.id << " {\n";
    out << "      crossing_position: " << format_fixed(p.crossing_position)
        << ";\n";
    out << "      trigger_distance: " << format_fixed(p.trigger_distance)
        << ";\n";
    out << "    }\n";
  }
  out << "  }\n";

  out << "  oracle {\n";
  write_clauses(out, "longitudinal", s.oracle.longitudinal);
  write_clauses(out, "lateral", s.oracle.lateral);
  out << "  }\n";

  out << "}\n";
  return out.str();
}

const std::string& grammar_reference() {
  static const std::string text = R"(Scenario DSL reference
======================

A scenario is UTF-8 text with four blocks in this exact order:

  scenario <name> {
    environment { weather: clear|rain|fog; time_of_day: day|night; }
    road {
      type: straight|intersection;
      markers: [solid_center, dashed_center, crosswalk @ <meters>];
      signs: [stop @ <meters>, speed_limit(<m/s>) @ <meters>];
    }
    actors {
      ego {
        start_position: <meters>;
        start_speed: <m/s>;
        controller: rule_follower
                  | faulted(<fault> [when weather = <w> | time_of_day = <t>]);
      }
      vehicle <id> {
        start_position: <meters>;
        start_speed: <m/s>;
        behavior: cruise | brake_at(<step>) | cut_in_at(<step>);
      }
      pedestrian <id> {
        crossing_position: <meters>;
        trigger_distance: <meters>;
      }
    }
    oracle {
      longitudinal: [no_collision, stop_at_sign(<max_overshoot_m>),
                     yield_to_pedestrian, speed_below(<m/s>)];
      lateral: [speed_below(<m/s>)];
    }
  }

Fault kinds: ignore_stop_sign, ignore_lead_vehicle, ignore_pedestrian.
Lists may be empty; block bodies may be empty, in which case defaults
apply: weather clear, time_of_day day, road straight, ego at 0.0 m with
speed 0.0 m/s and controller rule_follower, oracle [no_collision].
`#` starts a line comment.

World model: a single straight lane of 200.0 m. Positions are
longitudinal meters from the road origin; speeds in m/s (max 40.0).
Constraints: sign positions strictly increasing and within the road;
the ego must start behind every npc vehicle; trigger_distance > 0;
at least one oracle clause; stop_at_sign requires a stop sign.
)";
  return text;
}

}  // namespace cpstest::dsl
