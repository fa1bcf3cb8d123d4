#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpstest::dsl {

// Half-open byte range into the source text, with 1-based line/column of
// its first character. Spans are carried for diagnostics and are ignored
// by structural equality.
struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;
  int line = 1;
  int column = 1;
};

enum class Weather { kClear, kRain, kFog };
enum class TimeOfDay { kDay, kNight };
enum class RoadType { kStraight, kIntersection };

const char* to_string(Weather w);
const char* to_string(TimeOfDay t);
const char* to_string(RoadType r);

struct Environment {
  Weather weather = Weather::kClear;
  TimeOfDay time_of_day = TimeOfDay::kDay;
  Span span;

  friend bool operator==(const Environment& a, const Environment& b) {
    return a.weather == b.weather && a.time_of_day == b.time_of_day;
  }
};

enum class MarkerKind { kSolidCenter, kDashedCenter, kCrosswalk };

struct Marker {
  MarkerKind kind = MarkerKind::kSolidCenter;
  double position = 0.0;  // crosswalk only
  Span span;

  friend bool operator==(const Marker& a, const Marker& b) {
    return a.kind == b.kind &&
           (a.kind != MarkerKind::kCrosswalk || a.position == b.position);
  }
};

enum class SignKind { kStop, kSpeedLimit };

struct Sign {
  SignKind kind = SignKind::kStop;
  double limit = 0.0;  // speed_limit only, m/s
  double position = 0.0;
  Span span;

  friend bool operator==(const Sign& a, const Sign& b) {
    return a.kind == b.kind && a.position == b.position &&
           (a.kind != SignKind::kSpeedLimit || a.limit == b.limit);
  }
};

struct RoadNetwork {
  RoadType road_type = RoadType::kStraight;
  std::vector<Marker> markers;
  std::vector<Sign> signs;
  Span span;

  friend bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
    return a.road_type == b.road_type && a.markers == b.markers &&
           a.signs == b.signs;
  }
};

enum class FaultKind { kIgnoreStopSign, kIgnoreLeadVehicle, kIgnorePedestrian };

const char* to_string(FaultKind k);

// Guard restricts a fault to states where one environment field has the
// given value, e.g. "when weather = rain".
struct FaultGuard {
  enum class Field { kWeather, kTimeOfDay };
  Field field = Field::kWeather;
  Weather weather_value = Weather::kRain;
  TimeOfDay time_value = TimeOfDay::kDay;

  friend bool operator==(const FaultGuard& a, const FaultGuard& b) {
    if (a.field != b.field) return false;
    return a.field == Field::kWeather ? a.weather_value == b.weather_value
                                      : a.time_value == b.time_value;
  }
};

struct FaultSpec {
  FaultKind kind = FaultKind::kIgnoreStopSign;
  std::optional<FaultGuard> guard;

  friend bool operator==(const FaultSpec& a, const FaultSpec& b) {
    return a.kind == b.kind && a.guard == b.guard;
  }
};

struct EgoSpec {
  double start_position = 0.0;
  double start_speed = 0.0;
  std::optional<FaultSpec> fault;  // nullopt = rule_follower
  Span span;

  friend bool operator==(const EgoSpec& a, const EgoSpec& b) {
    return a.start_position == b.start_position &&
           a.start_speed == b.start_speed && a.fault == b.fault;
  }
};

enum class NpcBehaviorKind { kCruise, kBrakeAt, kCutInAt };

struct NpcVehicle {
  std::string id;
  double start_position = 0.0;
  double start_speed = 0.0;
  NpcBehaviorKind behavior = NpcBehaviorKind::kCruise;
  int behavior_step = 0;  // brake_at / cut_in_at
  Span span;

  friend bool operator==(const NpcVehicle& a, const NpcVehicle& b) {
    return a.id == b.id && a.start_position == b.start_position &&
           a.start_speed == b.start_speed && a.behavior == b.behavior &&
           (a.behavior == NpcBehaviorKind::kCruise ||
            a.behavior_step == b.behavior_step);
  }
};

struct Pedestrian {
  std::string id;
  double crossing_position = 0.0;
  double trigger_distance = 0.0;
  Span span;

  friend bool operator==(const Pedestrian& a, const Pedestrian& b) {
    return a.id == b.id && a.crossing_position == b.crossing_position &&
           a.trigger_distance == b.trigger_distance;
  }
};

struct ActorSet {
  EgoSpec ego;
  std::vector<NpcVehicle> vehicles;
  std::vector<Pedestrian> pedestrians;
  Span span;

  friend bool operator==(const ActorSet& a, const ActorSet& b) {
    return a.ego == b.ego && a.vehicles == b.vehicles &&
           a.pedestrians == b.pedestrians;
  }
};

enum class OracleKind {
  kNoCollision,
  kStopAtSign,
  kYieldToPedestrian,
  kSpeedBelow
};

struct OracleClause {
  OracleKind kind = OracleKind::kNoCollision;
  double value = 0.0;  // stop_at_sign: max_overshoot; speed_below: limit
  Span span;

  friend bool operator==(const OracleClause& a, const OracleClause& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == OracleKind::kStopAtSign || a.kind == OracleKind::kSpeedBelow)
      return a.value == b.value;
    return true;
  }
};

std::string to_string(const OracleClause& c);

struct OracleSpec {
  std::vector<OracleClause> longitudinal;
  std::vector<OracleClause> lateral;
  Span span;

  friend bool operator==(const OracleSpec& a, const OracleSpec& b) {
    return a.longitudinal == b.longitudinal && a.lateral == b.lateral;
  }
};

struct Scenario {
  std::string name;
  Environment environment;
  RoadNetwork road;
  ActorSet actors;
  OracleSpec oracle;
  Span span;

  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.environment == b.environment &&
           a.road == b.road && a.actors == b.actors && a.oracle == b.oracle;
  }
};

// Fixed world constants, applied at parse time and documented in the
// grammar reference.
inline constexpr double kRoadLength = 200.0;
inline constexpr double kMaxSpeed = 40.0;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int column,
             std::vector<std::string> expected)
      : std::runtime_error(std::move(message)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

Scenario parse_scenario(std::string_view text);

// Canonical form: fixed block/field order, two-space indent, one field per
// line, numbers via format_fixed. parse(serialize(s)) == s structurally,
// and equal ASTs serialize byte-identically.
std::string serialize_scenario(const Scenario& s);

enum class Stage { kSyntax, kSemantic, kDryRun };
enum class Severity { kError, kWarning };

struct Diagnostic {
  Stage stage = Stage::kSemantic;
  Severity severity = Severity::kError;
  std::string message;
  Span span;
};

struct ValidationReport {
  bool valid() const;
  std::vector<Diagnostic> diagnostics;

  std::string to_json() const;
};

// Semantic stage only; the dry-run stage needs the simulator and lives in
// validate_scenario (validate.cpp).
ValidationReport validate_semantic(const Scenario& s);

ValidationReport validate_scenario(const Scenario& s, bool run_dry);

// Grammar reference text embedded into LLM prompts and the README.
const std::string& grammar_reference();

}  // namespace cpstest::dsl
