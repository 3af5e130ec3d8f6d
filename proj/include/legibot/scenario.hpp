#ifndef LEGIBOT_SCENARIO_HPP
#define LEGIBOT_SCENARIO_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace legibot {

/// 2D point / vector, meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Normalize an angle into (-pi, pi].
double normalize_angle(double rad);

/// Pose in the world frame. Heading is kept normalized into (-pi, pi].
struct Pose2D {
  double x = 0.0;        // meters
  double y = 0.0;        // meters
  double heading = 0.0;  // radians, (-pi, pi]

  Vec2 position() const { return {x, y}; }

  bool operator==(const Pose2D&) const = default;
};

/// Wall segment, meters.
struct Segment {
  Vec2 a;
  Vec2 b;

  bool operator==(const Segment&) const = default;
};

/// Distance from a point to a segment.
double segment_distance(Vec2 p, const Segment& s);

/// True when the point lies inside the polygon (crossing test, boundary counts
/// as inside).
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly);

/// Distance from a point to a polygon boundary; 0 when inside.
double polygon_distance(Vec2 p, const std::vector<Vec2>& poly);

/// The two scripted robot movements: turn left at the junction, or continue
/// straight through it.
enum class MovementScenario { Turn, Straight };

std::string movement_scenario_name(MovementScenario m);

/// Structured environment: passage walls, one obstacle in the first leg, the
/// junction goal, the post-junction goal, a stationary observer, and the
/// robot footprint and pause policy.
struct ScenarioSpec {
  std::string name;
  std::vector<Segment> walls;
  std::vector<Vec2> obstacle;  // convex polygon
  Pose2D start;
  Pose2D goal1;
  Pose2D goal2;
  Pose2D observer;
  double pause_at_goal1_s = 5.0;
  double robot_length_m = 0.83;
  double robot_width_m = 0.63;

  /// Radius of the circle circumscribing the robot rectangle.
  double circumscribed_radius() const {
    return 0.5 * std::hypot(robot_length_m, robot_width_m);
  }

  bool operator==(const ScenarioSpec&) const = default;
};

/// Check all ScenarioSpec invariants; throws ValidationError with the
/// offending field named.
void validate_scenario(const ScenarioSpec& spec);

/// Parse and validate a scenario file. Throws ValidationError with
/// field-level diagnostics on malformed input or invariant violations.
ScenarioSpec load_scenario(const std::string& path);

/// Write a scenario file that load_scenario reads back to an identical value.
void save_scenario(const ScenarioSpec& spec, const std::string& path);

std::string scenario_to_text(const ScenarioSpec& spec);
ScenarioSpec scenario_from_text(const std::string& text, const std::string& origin = "<string>");

/// The two built-in specs. They share every field except goal2 and differ
/// only in where the robot goes after the junction pause.
std::vector<std::pair<MovementScenario, ScenarioSpec>> builtin_scenarios();

/// Look up a built-in spec by name ("turn" or "straight").
std::optional<ScenarioSpec> find_builtin_scenario(const std::string& name);

/// Classify a spec by the bearing of goal1->goal2 relative to goal1's
/// heading: near +90 deg is a left turn, near 0 deg is straight.
std::optional<MovementScenario> classify_movement(const ScenarioSpec& spec);

}  // namespace legibot

#endif  // LEGIBOT_SCENARIO_HPP
