#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "cpstest/dsl.hpp"

namespace cpstest::dsl {

const char* to_string(Weather w) {
  switch (w) {
    case Weather::kClear: return "clear";
    case Weather::kRain: return "rain";
    case Weather::kFog: return "fog";
  }
  return "?";
}

const char* to_string(TimeOfDay t) {
  return t == TimeOfDay::kDay ? "day" : "night";
}

const char* to_string(RoadType r) {
  return r == RoadType::kStraight ? "straight" : "intersection";
}

const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::kIgnoreStopSign: return "ignore_stop_sign";
    case FaultKind::kIgnoreLeadVehicle: return "ignore_lead_vehicle";
    case FaultKind::kIgnorePedestrian: return "ignore_pedestrian";
  }
  return "?";
}

namespace {

enum class Tok {
  kIdent,
  kNumber,
  kLBrace,
  kRBrace,
  kLBracket,
  kRBracket,
  kLParen,
  kRParen,
  kColon,
  kSemi,
  kComma,
  kAt,
  kEquals,
  kEnd
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  Span span;
};

const char* punct_name(Tok t) {
  switch (t) {
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kColon: return "':'";
    case Tok::kSemi: return "';'";
    case Tok::kComma: return "','";
    case Tok::kAt: return "'@'";
    case Tok::kEquals: return "'='";
    case Tok::kEnd: return "end of input";
    case Tok::kIdent: return "identifier";
    case Tok::kNumber: return "number";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.span = here(0);
    if (pos_ >= text_.size()) {
      t.kind = Tok::kEnd;
      return t;
    }
    char c = text_[pos_];
    switch (c) {
      case '{': return punct(Tok::kLBrace);
      case '}': return punct(Tok::kRBrace);
      case '[': return punct(Tok::kLBracket);
      case ']': return punct(Tok::kRBracket);
      case '(': return punct(Tok::kLParen);
      case ')': return punct(Tok::kRParen);
      case ':': return punct(Tok::kColon);
      case ';': return punct(Tok::kSemi);
      case ',': return punct(Tok::kComma);
      case '@': return punct(Tok::kAt);
      case '=': return punct(Tok::kEquals);
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        advance();
      }
      t.kind = Tok::kIdent;
      t.text = std::string(text_.substr(start, pos_ - start));
      t.span.length = pos_ - start;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      std::size_t start = pos_;
      if (c == '-' || c == '+') advance();
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '.')) {
        advance();
      }
      std::string num(text_.substr(start, pos_ - start));
      double value = 0.0;
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
      if (ec != std::errc() || p != num.data() + num.size()) {
        throw ParseError("malformed number '" + num + "'", t.span.line,
                         t.span.column, {"number"});
      }
      t.kind = Tok::kNumber;
      t.text = num;
      t.number = value;
      t.span.length = pos_ - start;
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'",
                     t.span.line, t.span.column, {});
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {  // line comment
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Span here(std::size_t len) const { return Span{pos_, len, line_, col_}; }

  Token punct(Tok kind) {
    Token t;
    t.kind = kind;
    t.span = here(1);
    t.text = std::string(1, text_[pos_]);
    advance();
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { bump(); }

  Scenario parse() {
    Scenario s;
    Span start = cur_.span;
    expect_keyword("scenario");
    s.name = expect(Tok::kIdent, "scenario name").text;
    expect(Tok::kLBrace, "'{'");
    s.environment = parse_environment();
    s.road = parse_road();
    s.actors = parse_actors();
    s.oracle = parse_oracle();
    Token close = expect(Tok::kRBrace, "'}'");
    expect(Tok::kEnd, "end of input");
    s.span = start;
    s.span.length = close.span.offset + close.span.length - start.offset;
    return s;
  }

 private:
  void bump() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& what,
                         std::vector<std::string> expected) {
    std::string found = cur_.kind == Tok::kIdent || cur_.kind == Tok::kNumber
                            ? "'" + cur_.text + "'"
                            : punct_name(cur_.kind);
    throw ParseError("expected " + what + ", found " + found, cur_.span.line,
                     cur_.span.column, std::move(expected));
  }

  Token expect(Tok kind, const std::string& what) {
    if (cur_.kind != kind) fail(what, {what});
    Token t = cur_;
    bump();
    return t;
  }

  Token expect_keyword(const std::string& kw) {
    if (cur_.kind != Tok::kIdent || cur_.text != kw) {
      fail("'" + kw + "'", {kw});
    }
    Token t = cur_;
    bump();
    return t;
  }

  bool at_keyword(const std::string& kw) const {
    return cur_.kind == Tok::kIdent && cur_.text == kw;
  }

  double expect_number() { return expect(Tok::kNumber, "number").number; }

  int expect_int() {
    Token t = expect(Tok::kNumber, "integer");
    double v = t.number;
    if (v != std::floor(v)) {
      throw ParseError("expected integer, found '" + t.text + "'",
                       t.span.line, t.span.column, {"integer"});
    }
    return static_cast<int>(v);
  }

  // Blocks must appear in the fixed order environment, road, actors,
  // oracle; a block out of order is reported against the expected one.
  void expect_block_keyword(const std::string& kw) {
    if (cur_.kind != Tok::kIdent || cur_.text != kw) {
      fail("block '" + kw + "'", {kw});
    }
    bump();
  }

  template <typename T>
  T expect_enum(const std::map<std::string, T>& values,
                const std::string& what) {
    if (cur_.kind == Tok::kIdent) {
      auto it = values.find(cur_.text);
      if (it != values.end()) {
        bump();
        return it->second;
      }
    }
    std::vector<std::string> expected;
    for (const auto& [name, _] : values) expected.push_back(name);
    fail(what, expected);
  }

  void check_duplicate(bool& seen, const std::string& field) {
    if (seen) {
      throw ParseError("duplicate field '" + field + "'", cur_.span.line,
                       cur_.span.column, {});
    }
    seen = true;
  }

  Environment parse_environment() {
    Environment env;
    env.span = cur_.span;
    expect_block_keyword("environment");
    expect(Tok::kLBrace, "'{'");
    bool saw_weather = false, saw_time = false;
    while (cur_.kind != Tok::kRBrace) {
      if (at_keyword("weather")) {
        check_duplicate(saw_weather, "weather");
        bump();
        expect(Tok::kColon, "':'");
        env.weather = expect_enum<Weather>({{"clear", Weather::kClear},
                                            {"rain", Weather::kRain},
                                            {"fog", Weather::kFog}},
                                           "weather value");
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("time_of_day")) {
        check_duplicate(saw_time, "time_of_day");
        bump();
        expect(Tok::kColon, "':'");
        env.time_of_day = expect_enum<TimeOfDay>(
            {{"day", TimeOfDay::kDay}, {"night", TimeOfDay::kNight}},
            "time_of_day value");
        expect(Tok::kSemi, "';'");
      } else {
        fail("environment field", {"weather", "time_of_day"});
      }
    }
    expect(Tok::kRBrace, "'}'");
    return env;
  }

  RoadNetwork parse_road() {
    RoadNetwork road;
    road.span = cur_.span;
    expect_block_keyword("road");
    expect(Tok::kLBrace, "'{'");
    bool saw_type = false, saw_markers = false, saw_signs = false;
    while (cur_.kind != Tok::kRBrace) {
      if (at_keyword("type")) {
        check_duplicate(saw_type, "type");
        bump();
        expect(Tok::kColon, "':'");
        road.road_type = expect_enum<RoadType>(
            {{"straight", RoadType::kStraight},
             {"intersection", RoadType::kIntersection}},
            "road type");
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("markers")) {
        check_duplicate(saw_markers, "markers");
        bump();
        expect(Tok::kColon, "':'");
        expect(Tok::kLBracket, "'['");
        while (cur_.kind != Tok::kRBracket) {
          road.markers.push_back(parse_marker());
          if (cur_.kind == Tok::kComma) bump();
          else break;
        }
        expect(Tok::kRBracket, "']'");
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("signs")) {
        check_duplicate(saw_signs, "signs");
        bump();
        expect(Tok::kColon, "':'");
        expect(Tok::kLBracket, "'['");
        while (cur_.kind != Tok::kRBracket) {
          road.signs.push_back(parse_sign());
          if (cur_.kind == Tok::kComma) bump();
          else break;
        }
        expect(Tok::kRBracket, "']'");
        expect(Tok::kSemi, "';'");
      } else {
        fail("road field", {"type", "markers", "signs"});
      }
    }
    expect(Tok::kRBrace, "'}'");
    return road;
  }

  Marker parse_marker() {
    Marker m;
    m.span = cur_.span;
    if (at_keyword("solid_center")) {
      bump();
      m.kind = MarkerKind::kSolidCenter;
    } else if (at_keyword("dashed_center")) {
      bump();
      m.kind = MarkerKind::kDashedCenter;
    } else if (at_keyword("crosswalk")) {
      bump();
      m.kind = MarkerKind::kCrosswalk;
      expect(Tok::kAt, "'@'");
      m.position = expect_number();
    } else {
      fail("road marker", {"solid_center", "dashed_center", "crosswalk"});
    }
    return m;
  }

  Sign parse_sign() {
    Sign s;
    s.span = cur_.span;
    if (at_keyword("stop")) {
      bump();
      s.kind = SignKind::kStop;
    } else if (at_keyword("speed_limit")) {
      bump();
      s.kind = SignKind::kSpeedLimit;
      expect(Tok::kLParen, "'('");
      s.limit = expect_number();
      expect(Tok::kRParen, "')'");
    } else {
      fail("traffic sign", {"stop", "speed_limit"});
    }
    expect(Tok::kAt, "'@'");
    s.position = expect_number();
    return s;
  }

  ActorSet parse_actors() {
    ActorSet actors;
    actors.span = cur_.span;
    expect_block_keyword("actors");
    expect(Tok::kLBrace, "'{'");
    bool saw_ego = false;
    while (cur_.kind != Tok::kRBrace) {
      if (at_keyword("ego")) {
        check_duplicate(saw_ego, "ego");
        actors.ego = parse_ego();
      } else if (at_keyword("vehicle")) {
        actors.vehicles.push_back(parse_vehicle());
      } else if (at_keyword("pedestrian")) {
        actors.pedestrians.push_back(parse_pedestrian());
      } else {
        fail("actor declaration", {"ego", "vehicle", "pedestrian"});
      }
    }
    expect(Tok::kRBrace, "'}'");
    return actors;
  }

  EgoSpec parse_ego() {
    EgoSpec ego;
    ego.span = cur_.span;
    expect_keyword("ego");
    expect(Tok::kLBrace, "'{'");
    bool saw_pos = false, saw_speed = false, saw_ctrl = false;
    while (cur_.kind != Tok::kRBrace) {
      if (at_keyword("start_position")) {
        check_duplicate(saw_pos, "start_position");
        bump();
        expect(Tok::kColon, "':'");
        ego.start_position = expect_number();
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("start_speed")) {
        check_duplicate(saw_speed, "start_speed");
        bump();
        expect(Tok::kColon, "':'");
        ego.start_speed = expect_number();
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("controller")) {
        check_duplicate(saw_ctrl, "controller");
        bump();
        expect(Tok::kColon, "':'");
        ego.fault = parse_controller();
        expect(Tok::kSemi, "';'");
      } else {
        fail("ego field", {"start_position", "start_speed", "controller"});
      }
    }
    expect(Tok::kRBrace, "'}'");
    return ego;
  }

  std::optional<FaultSpec> parse_controller() {
    if (at_keyword("rule_follower")) {
      bump();
      return std::nullopt;
    }
    if (!at_keyword("faulted")) {
      fail("controller", {"rule_follower", "faulted"});
    }
    bump();
    expect(Tok::kLParen, "'('");
    FaultSpec fault;
    fault.kind = expect_enum<FaultKind>(
        {{"ignore_stop_sign", FaultKind::kIgnoreStopSign},
         {"ignore_lead_vehicle", FaultKind::kIgnoreLeadVehicle},
         {"ignore_pedestrian", FaultKind::kIgnorePedestrian}},
        "fault kind");
    if (at_keyword("when")) {
      bump();
      FaultGuard guard;
      if (at_keyword("weather")) {
        bump();
        expect(Tok::kEquals, "'='");
        guard.field = FaultGuard::Field::kWeather;
        guard.weather_value = expect_enum<Weather>(
            {{"clear", Weather::kClear},
             {"rain", Weather::kRain},
             {"fog", Weather::kFog}},
            "weather value");
      } else if (at_keyword("time_of_day")) {
        bump();
        expect(Tok::kEquals, "'='");
        guard.field = FaultGuard::Field::kTimeOfDay;
        guard.time_value = expect_enum<TimeOfDay>(
            {{"day", TimeOfDay::kDay}, {"night", TimeOfDay::kNight}},
            "time_of_day value");
      } else {
        fail("guard field", {"weather", "time_of_day"});
      }
      fault.guard = guard;
    }
    expect(Tok::kRParen, "')'");
    return fault;
  }

  NpcVehicle parse_vehicle() {
    NpcVehicle v;
    v.span = cur_.span;
    expect_keyword("vehicle");
    v.id = expect(Tok::kIdent, "vehicle id").text;
    expect(Tok::kLBrace, "'{'");
    bool saw_pos = false, saw_speed = false, saw_behavior = false;
    while (cur_.kind != Tok::kRBrace) {
      if (at_keyword("start_position")) {
        check_duplicate(saw_pos, "start_position");
        bump();
        expect(Tok::kColon, "':'");
        v.start_position = expect_number();
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("start_speed")) {
        check_duplicate(saw_speed, "start_speed");
        bump();
        expect(Tok::kColon, "':'");
        v.start_speed = expect_number();
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("behavior")) {
        check_duplicate(saw_behavior, "behavior");
        bump();
        expect(Tok::kColon, "':'");
        if (at_keyword("cruise")) {
          bump();
          v.behavior = NpcBehaviorKind::kCruise;
        } else if (at_keyword("brake_at")) {
          bump();
          v.behavior = NpcBehaviorKind::kBrakeAt;
          expect(Tok::kLParen, "'('");
          v.behavior_step = expect_int();
          expect(Tok::kRParen, "')'");
        } else if (at_keyword("cut_in_at")) {
          bump();
          v.behavior = NpcBehaviorKind::kCutInAt;
          expect(Tok::kLParen, "'('");
          v.behavior_step = expect_int();
          expect(Tok::kRParen, "')'");
        } else {
          fail("behavior", {"cruise", "brake_at", "cut_in_at"});
        }
        expect(Tok::kSemi, "';'");
      } else {
        fail("vehicle field", {"start_position", "start_speed", "behavior"});
      }
    }
    expect(Tok::kRBrace, "'}'");
    return v;
  }

  Pedestrian parse_pedestrian() {
    Pedestrian p;
    p.span = cur_.span;
    expect_keyword("pedestrian");
    p.id = expect(Tok::kIdent, "pedestrian id").text;
    expect(Tok::kLBrace, "'{'");
    bool saw_pos = false, saw_trigger = false;
    while (cur_.kind != Tok::kRBrace) {
      if (at_keyword("crossing_position")) {
        check_duplicate(saw_pos, "crossing_position");
        bump();
        expect(Tok::kColon, "':'");
        p.crossing_position = expect_number();
        expect(Tok::kSemi, "';'");
      } else if (at_keyword("trigger_distance")) {
        check_duplicate(saw_trigger, "trigger_distance");
        bump();
        expect(Tok::kColon, "':'");
        p.trigger_distance = expect_number();
        expect(Tok::kSemi, "';'");
      } else {
        fail("pedestrian field", {"crossing_position", "trigger_distance"});
      }
    }
    expect(Tok::kRBrace, "'}'");
    return p;
  }

  OracleSpec parse_oracle() {
    OracleSpec oracle;
    oracle.span = cur_.span;
    expect_block_keyword("oracle");
    expect(Tok::kLBrace, "'{'");
    bool saw_long = false, saw_lat = false;
    bool any_field = false;
    while (cur_.kind != Tok::kRBrace) {
      any_field = true;
      bool longitudinal;
      if (at_keyword("longitudinal")) {
        check_duplicate(saw_long, "longitudinal");
        longitudinal = true;
      } else if (at_keyword("lateral")) {
        check_duplicate(saw_lat, "lateral");
        longitudinal = false;
      } else {
        fail("oracle field", {"longitudinal", "lateral"});
      }
      bump();
      expect(Tok::kColon, "':'");
      expect(Tok::kLBracket, "'['");
      auto& list = longitudinal ? oracle.longitudinal : oracle.lateral;
      while (cur_.kind != Tok::kRBracket) {
        list.push_back(parse_clause());
        if (cur_.kind == Tok::kComma) bump();
        else break;
      }
      expect(Tok::kRBracket, "']'");
      expect(Tok::kSemi, "';'");
    }
    expect(Tok::kRBrace, "'}'");
    if (!any_field) {
      // Empty oracle block defaults to the weakest useful requirement.
      OracleClause c;
      c.kind = OracleKind::kNoCollision;
      oracle.longitudinal.push_back(c);
    }
    return oracle;
  }

  OracleClause parse_clause() {
    OracleClause c;
    c.span = cur_.span;
    if (at_keyword("no_collision")) {
      bump();
      c.kind = OracleKind::kNoCollision;
    } else if (at_keyword("stop_at_sign")) {
      bump();
      c.kind = OracleKind::kStopAtSign;
      expect(Tok::kLParen, "'('");
      c.value = expect_number();
      expect(Tok::kRParen, "')'");
    } else if (at_keyword("yield_to_pedestrian")) {
      bump();
      c.kind = OracleKind::kYieldToPedestrian;
    } else if (at_keyword("speed_below")) {
      bump();
      c.kind = OracleKind::kSpeedBelow;
      expect(Tok::kLParen, "'('");
      c.value = expect_number();
      expect(Tok::kRParen, "')'");
    } else {
      fail("oracle clause", {"no_collision", "stop_at_sign",
                             "yield_to_pedestrian", "speed_below"});
    }
    return c;
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

Scenario parse_scenario(std::string_view text) {
  return Parser(text).parse();
}

}  // namespace cpstest::dsl
