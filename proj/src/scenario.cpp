#include "legibot/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "legibot/errors.hpp"
#include "legibot/numfmt.hpp"

namespace legibot {

double normalize_angle(double rad) {
  double a = std::fmod(rad, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

double segment_distance(Vec2 p, const Segment& s) {
  const Vec2 ab = s.b - s.a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - s.a);
  double t = dot(p - s.a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (s.a + t * ab));
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if (segment_distance(p, {a, b}) < 1e-12) return true;
    const bool crosses = (b.y > p.y) != (a.y > p.y);
    if (crosses) {
      const double x_at = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

double polygon_distance(Vec2 p, const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return std::numeric_limits<double>::infinity();
  if (point_in_polygon(p, poly)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    d = std::min(d, segment_distance(p, {poly[j], poly[i]}));
  }
  return d;
}

std::string movement_scenario_name(MovementScenario m) {
  return m == MovementScenario::Turn ? "turn" : "straight";
}

namespace {

bool polygon_convex(const std::vector<Vec2>& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  int sign = 0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 e1 = poly[(i + 1) % n] - poly[i];
    const Vec2 e2 = poly[(i + 2) % n] - poly[(i + 1) % n];
    const double c = cross(e1, e2);
    if (std::abs(c) < 1e-12) continue;
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

/// Free-space test used by scenario validation: clearance of at least the
/// robot half-width from every wall and from the obstacle.
bool pose_in_free_space(const ScenarioSpec& spec, const Pose2D& p) {
  const double clearance = 0.5 * std::min(spec.robot_length_m, spec.robot_width_m);
  const Vec2 pt = p.position();
  for (const auto& w : spec.walls) {
    if (segment_distance(pt, w) <= clearance) return false;
  }
  if (!spec.obstacle.empty() && polygon_distance(pt, spec.obstacle) <= clearance) return false;
  return true;
}

}  // namespace

void validate_scenario(const ScenarioSpec& spec) {
  if (spec.name.empty()) throw ValidationError("scenario: name must be nonempty");
  if (!(spec.robot_length_m > 0.0))
    throw ValidationError("scenario: robot.length_m must be > 0");
  if (!(spec.robot_width_m > 0.0))
    throw ValidationError("scenario: robot.width_m must be > 0");
  if (spec.pause_at_goal1_s < 0.0)
    throw ValidationError("scenario: pause_at_goal1_s must be >= 0");
  if (spec.walls.empty()) throw ValidationError("scenario: walls must be nonempty");
  if (!spec.obstacle.empty()) {
    if (spec.obstacle.size() < 3)
      throw ValidationError("scenario: obstacle needs at least 3 vertices");
    if (!polygon_convex(spec.obstacle))
      throw ValidationError("scenario: obstacle polygon must be convex");
  }
  struct Named { const char* field; const Pose2D& pose; };
  for (const Named& n : {Named{"start", spec.start}, Named{"goal1", spec.goal1},
                         Named{"goal2", spec.goal2}}) {
    if (!pose_in_free_space(spec, n.pose)) {
      throw ValidationError(std::string("scenario: ") + n.field +
                            " lies in collision with walls or obstacle");
    }
  }
}

// ---------------------------------------------------------------------------
// Scenario text format: `key = value` lines, values are numbers, quoted
// strings, nested [..] arrays, or a { k = v, ... } table. '#' starts a
// comment. Unknown keys are rejected.
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum Kind { Ident, Number, String, Punct, End } kind = End;
  std::string text;
  double num = 0.0;
  int line = 0;
};

class Lexer {
public:
  Lexer(const std::string& src, const std::string& origin)
      : src_(src), origin_(origin) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < src_.size() && src_[pos_] != '"') s.push_back(src_[pos_++]);
      if (pos_ >= src_.size()) fail("unterminated string", t.line);
      ++pos_;
      t.kind = Token::String;
      t.text = s;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        s.push_back(src_[pos_++]);
      t.kind = Token::Ident;
      t.text = s;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      const char* begin = src_.data() + pos_;
      const char* end = src_.data() + src_.size();
      double v = 0.0;
      auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc{}) fail("malformed number", t.line);
      pos_ += static_cast<size_t>(res.ptr - begin);
      t.kind = Token::Number;
      t.num = v;
      return t;
    }
    if (c == '[' || c == ']' || c == '{' || c == '}' || c == ',' || c == '=') {
      ++pos_;
      t.kind = Token::Punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(std::string("unexpected character '") + c + "'", t.line);
    return t;
  }

  [[noreturn]] void fail(const std::string& msg, int line) const {
    throw ValidationError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

private:
  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  std::string origin_;
  size_t pos_ = 0;
  int line_ = 1;
};

struct Value {
  enum Kind { Number, String, Array, Table } kind = Number;
  double num = 0.0;
  std::string str;
  std::vector<Value> items;
  std::map<std::string, Value> table;
  int line = 0;
};

class Parser {
public:
  Parser(const std::string& src, const std::string& origin)
      : lexer_(src, origin), origin_(origin) {
    advance();
  }

  std::map<std::string, Value> parse_document() {
    std::map<std::string, Value> doc;
    while (cur_.kind != Token::End) {
      if (cur_.kind != Token::Ident) fail("expected a key name");
      const std::string key = cur_.text;
      const int line = cur_.line;
      advance();
      expect_punct("=");
      Value v = parse_value();
      v.line = line;
      if (doc.count(key)) fail("duplicate key '" + key + "'", line);
      doc.emplace(key, std::move(v));
    }
    return doc;
  }

  [[noreturn]] void fail(const std::string& msg) const { fail(msg, cur_.line); }
  [[noreturn]] void fail(const std::string& msg, int line) const {
    throw ValidationError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

private:
  Value parse_value() {
    Value v;
    v.line = cur_.line;
    switch (cur_.kind) {
      case Token::Number:
        v.kind = Value::Number;
        v.num = cur_.num;
        advance();
        return v;
      case Token::String:
        v.kind = Value::String;
        v.str = cur_.text;
        advance();
        return v;
      case Token::Ident:
        // bare identifiers are accepted as strings (scenario names)
        v.kind = Value::String;
        v.str = cur_.text;
        advance();
        return v;
      case Token::Punct:
        if (cur_.text == "[") {
          advance();
          v.kind = Value::Array;
          while (!is_punct("]")) {
            v.items.push_back(parse_value());
            if (is_punct(",")) advance();
            else if (!is_punct("]")) fail("expected ',' or ']' in array");
          }
          advance();
          return v;
        }
        if (cur_.text == "{") {
          advance();
          v.kind = Value::Table;
          while (!is_punct("}")) {
            if (cur_.kind != Token::Ident) fail("expected a key in table");
            const std::string key = cur_.text;
            advance();
            expect_punct("=");
            v.table.emplace(key, parse_value());
            if (is_punct(",")) advance();
            else if (!is_punct("}")) fail("expected ',' or '}' in table");
          }
          advance();
          return v;
        }
        break;
      default:
        break;
    }
    fail("expected a value");
  }

  bool is_punct(const char* p) const {
    return cur_.kind == Token::Punct && cur_.text == p;
  }
  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    advance();
  }
  void advance() { cur_ = lexer_.next(); }

  Lexer lexer_;
  std::string origin_;
  Token cur_;
};

double require_number(const Value& v, const std::string& field, const std::string& origin) {
  if (v.kind != Value::Number)
    throw ValidationError(origin + ":" + std::to_string(v.line) + ": " + field +
                          " must be a number");
  return v.num;
}

std::vector<double> number_list(const Value& v, size_t count, const std::string& field,
                                const std::string& origin) {
  if (v.kind != Value::Array || v.items.size() != count)
    throw ValidationError(origin + ":" + std::to_string(v.line) + ": " + field +
                          " must be an array of " + std::to_string(count) + " numbers");
  std::vector<double> out;
  out.reserve(count);
  for (const auto& item : v.items) out.push_back(require_number(item, field, origin));
  return out;
}

Pose2D parse_pose(const Value& v, const std::string& field, const std::string& origin) {
  const auto nums = number_list(v, 3, field, origin);
  return Pose2D{nums[0], nums[1], normalize_angle(nums[2])};
}

}  // namespace

ScenarioSpec scenario_from_text(const std::string& text, const std::string& origin) {
  Parser parser(text, origin);
  auto doc = parser.parse_document();

  static const std::vector<std::string> known = {
      "name", "walls", "obstacle", "start", "goal1", "goal2",
      "observer", "pause_at_goal1_s", "robot"};
  for (const auto& [key, value] : doc) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError(origin + ":" + std::to_string(value.line) +
                            ": unknown key '" + key + "'");
    }
  }
  for (const auto& key : known) {
    if (!doc.count(key))
      throw ValidationError(origin + ": missing required key '" + key + "'");
  }

  ScenarioSpec spec;
  const Value& name = doc.at("name");
  if (name.kind != Value::String)
    throw ValidationError(origin + ":" + std::to_string(name.line) + ": name must be a string");
  spec.name = name.str;

  const Value& walls = doc.at("walls");
  if (walls.kind != Value::Array)
    throw ValidationError(origin + ":" + std::to_string(walls.line) + ": walls must be an array");
  for (const auto& w : walls.items) {
    const auto nums = number_list(w, 4, "walls entry", origin);
    spec.walls.push_back({{nums[0], nums[1]}, {nums[2], nums[3]}});
  }

  const Value& obstacle = doc.at("obstacle");
  if (obstacle.kind != Value::Array)
    throw ValidationError(origin + ":" + std::to_string(obstacle.line) +
                          ": obstacle must be an array");
  for (const auto& p : obstacle.items) {
    const auto nums = number_list(p, 2, "obstacle vertex", origin);
    spec.obstacle.push_back({nums[0], nums[1]});
  }

  spec.start = parse_pose(doc.at("start"), "start", origin);
  spec.goal1 = parse_pose(doc.at("goal1"), "goal1", origin);
  spec.goal2 = parse_pose(doc.at("goal2"), "goal2", origin);
  spec.observer = parse_pose(doc.at("observer"), "observer", origin);
  spec.pause_at_goal1_s = require_number(doc.at("pause_at_goal1_s"), "pause_at_goal1_s", origin);

  const Value& robot = doc.at("robot");
  if (robot.kind != Value::Table)
    throw ValidationError(origin + ":" + std::to_string(robot.line) + ": robot must be a table");
  for (const auto& [key, value] : robot.table) {
    if (key != "length_m" && key != "width_m")
      throw ValidationError(origin + ":" + std::to_string(value.line) +
                            ": unknown key 'robot." + key + "'");
  }
  if (!robot.table.count("length_m") || !robot.table.count("width_m"))
    throw ValidationError(origin + ": robot table needs length_m and width_m");
  spec.robot_length_m = require_number(robot.table.at("length_m"), "robot.length_m", origin);
  spec.robot_width_m = require_number(robot.table.at("width_m"), "robot.width_m", origin);

  validate_scenario(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_text(buf.str(), path);
}

std::string scenario_to_text(const ScenarioSpec& spec) {
  std::ostringstream out;
  out << "name = \"" << spec.name << "\"\n";
  out << "walls = [";
  for (size_t i = 0; i < spec.walls.size(); ++i) {
    const auto& w = spec.walls[i];
    out << (i ? ", " : "") << "[" << fmt_double(w.a.x) << ", " << fmt_double(w.a.y)
        << ", " << fmt_double(w.b.x) << ", " << fmt_double(w.b.y) << "]";
  }
  out << "]\n";
  out << "obstacle = [";
  for (size_t i = 0; i < spec.obstacle.size(); ++i) {
    const auto& p = spec.obstacle[i];
    out << (i ? ", " : "") << "[" << fmt_double(p.x) << ", " << fmt_double(p.y) << "]";
  }
  out << "]\n";
  auto pose_line = [&out](const char* key, const Pose2D& p) {
    out << key << " = [" << fmt_double(p.x) << ", " << fmt_double(p.y) << ", "
        << fmt_double(p.heading) << "]\n";
  };
  pose_line("start", spec.start);
  pose_line("goal1", spec.goal1);
  pose_line("goal2", spec.goal2);
  pose_line("observer", spec.observer);
  out << "pause_at_goal1_s = " << fmt_double(spec.pause_at_goal1_s) << "\n";
  out << "robot = { length_m = " << fmt_double(spec.robot_length_m)
      << ", width_m = " << fmt_double(spec.robot_width_m) << " }\n";
  return out.str();
}

void save_scenario(const ScenarioSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write scenario file: " + path);
  out << scenario_to_text(spec);
}

// ---------------------------------------------------------------------------
// Built-in scenarios: a T junction of 3 m wide corridor legs. The robot
// starts in the west leg, dodges a box obstacle, pauses at the junction
// (goal1), then continues east (Straight) or into the north leg (Turn). The
// observer stands south of the junction facing it.
// ---------------------------------------------------------------------------

namespace {

ScenarioSpec base_scenario() {
  ScenarioSpec spec;
  const double hw = 1.5;   // corridor half-width
  const double leg = 6.0;  // leg length from the junction center
  spec.walls = {
      {{-leg, -hw}, {leg, -hw}},    // south wall, continuous
      {{-leg, hw}, {-hw, hw}},      // north wall, west of the branch
      {{hw, hw}, {leg, hw}},        // north wall, east of the branch
      {{-hw, hw}, {-hw, leg}},      // north branch, west side
      {{hw, hw}, {hw, leg}},        // north branch, east side
      {{-leg, -hw}, {-leg, hw}},    // west cap
      {{leg, -hw}, {leg, hw}},      // east cap
      {{-hw, leg}, {hw, leg}},      // north cap
  };
  // Box obstacle in the first leg, offset south so the single route around
  // it passes its north side well before the junction approach.
  spec.obstacle = {{-4.4, -0.95}, {-3.6, -0.95}, {-3.6, -0.15}, {-4.4, -0.15}};
  spec.start = {-5.3, 0.0, 0.0};
  spec.goal1 = {0.0, 0.0, 0.0};
  spec.observer = {0.0, -4.0, M_PI / 2.0};
  spec.pause_at_goal1_s = 5.0;
  spec.robot_length_m = 0.83;
  spec.robot_width_m = 0.63;
  return spec;
}

}  // namespace

std::vector<std::pair<MovementScenario, ScenarioSpec>> builtin_scenarios() {
  ScenarioSpec turn = base_scenario();
  turn.name = "turn";
  turn.goal2 = {0.0, 5.0, M_PI / 2.0};
  ScenarioSpec straight = base_scenario();
  straight.name = "straight";
  straight.goal2 = {5.0, 0.0, 0.0};
  validate_scenario(turn);
  validate_scenario(straight);
  return {{MovementScenario::Turn, turn}, {MovementScenario::Straight, straight}};
}

std::optional<ScenarioSpec> find_builtin_scenario(const std::string& name) {
  for (const auto& [movement, spec] : builtin_scenarios()) {
    if (spec.name == name) return spec;
  }
  return std::nullopt;
}

std::optional<MovementScenario> classify_movement(const ScenarioSpec& spec) {
  const Vec2 v = spec.goal2.position() - spec.goal1.position();
  if (norm(v) < 1e-9) return std::nullopt;
  const double rel = normalize_angle(std::atan2(v.y, v.x) - spec.goal1.heading);
  const double deg = rel * 180.0 / M_PI;
  if (std::abs(deg) < 45.0) return MovementScenario::Straight;
  if (deg > 45.0 && deg < 135.0) return MovementScenario::Turn;
  return std::nullopt;
}

}  // namespace legibot
