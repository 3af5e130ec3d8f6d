#ifndef LEGIBOT_NAV_HPP
#define LEGIBOT_NAV_HPP

#include <cstddef>
#include <vector>

#include "legibot/scenario.hpp"

namespace legibot {

/// Boolean occupancy grid rasterized from scenario walls and the obstacle,
/// inflated so the robot can be treated as a point.
struct OccupancyGrid {
  double resolution = 0.05;  // meters per cell
  int width = 0;             // cells
  int height = 0;            // cells
  Pose2D origin;             // world pose of the (0,0) cell corner
  std::vector<bool> cells;   // row-major, true = occupied

  bool in_bounds(int cx, int cy) const {
    return cx >= 0 && cx < width && cy >= 0 && cy < height;
  }
  bool occupied(int cx, int cy) const {
    return !in_bounds(cx, cy) || cells[static_cast<size_t>(cy) * width + cx];
  }
  /// World point of a cell center.
  Vec2 cell_center(int cx, int cy) const {
    return {origin.x + (cx + 0.5) * resolution, origin.y + (cy + 0.5) * resolution};
  }
  /// Cell containing a world point (floor; no bounds check).
  void cell_of(Vec2 p, int& cx, int& cy) const;
};

/// Grid path densified to per-cell poses with headings along the segments.
struct PlannedPath {
  std::vector<Pose2D> poses;
  std::vector<double> cumulative_arclength;  // meters, one per pose, starts at 0

  bool empty() const { return poses.empty(); }
  double length() const { return empty() ? 0.0 : cumulative_arclength.back(); }

  bool operator==(const PlannedPath&) const = default;
};

/// Differential-drive command.
struct VelocityCommand {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s

  bool operator==(const VelocityCommand&) const = default;
};

/// Follower saturation limits and lookahead.
struct FollowLimits {
  double v_max = 0.6;       // m/s
  double omega_max = 1.0;   // rad/s
  double lookahead = 0.7;   // meters
};

/// Rasterize the scenario onto a grid covering all walls with a margin, with
/// every wall and obstacle cell inflated by `inflation_radius`.
OccupancyGrid build_occupancy_grid(const ScenarioSpec& spec, double resolution,
                                   double inflation_radius);

/// 8-connected shortest grid path from start to goal (octile heuristic,
/// deterministic tie-breaking). Throws RuntimeError when no path exists or a
/// terminal cell is occupied.
PlannedPath plan_path(const OccupancyGrid& grid, const Pose2D& start, const Pose2D& goal);

/// Point at arclength s beyond the path pose nearest `from`, interpolating
/// linearly between poses and clamping to the final pose. Throws
/// RuntimeError on an empty path.
Vec2 point_along_path(const PlannedPath& path, const Pose2D& from, double s);

/// Pure-pursuit step: steer toward the lookahead point, scale linear velocity
/// down with heading error, saturate to limits. Throws RuntimeError on an
/// empty path.
VelocityCommand follow_step(const Pose2D& pose, const PlannedPath& path,
                            const FollowLimits& limits);

/// Unicycle kinematics over one step: exact arc when |angular| exceeds a
/// small epsilon, straight-line chord otherwise.
Pose2D integrate(const Pose2D& pose, const VelocityCommand& cmd, double dt);

}  // namespace legibot

#endif  // LEGIBOT_NAV_HPP
