#include "legibot/nav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "legibot/errors.hpp"

namespace legibot {

void OccupancyGrid::cell_of(Vec2 p, int& cx, int& cy) const {
  cx = static_cast<int>(std::floor((p.x - origin.x) / resolution));
  cy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
}

OccupancyGrid build_occupancy_grid(const ScenarioSpec& spec, double resolution,
                                   double inflation_radius) {
  if (!(resolution > 0.0)) throw ValidationError("grid: resolution must be > 0");
  if (inflation_radius < 0.0) throw ValidationError("grid: inflation must be >= 0");

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  auto expand = [&](Vec2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  };
  for (const auto& w : spec.walls) {
    expand(w.a);
    expand(w.b);
  }
  for (const auto& p : spec.obstacle) expand(p);
  if (!(min_x < max_x) || !(min_y < max_y))
    throw ValidationError("grid: walls span an empty area");

  // One inflated cell of slack so occupied bands are fully representable.
  const double pad = inflation_radius + 2.0 * resolution;
  OccupancyGrid grid;
  grid.resolution = resolution;
  grid.origin = {min_x - pad, min_y - pad, 0.0};
  grid.width = static_cast<int>(std::ceil((max_x - min_x + 2.0 * pad) / resolution));
  grid.height = static_cast<int>(std::ceil((max_y - min_y + 2.0 * pad) / resolution));
  grid.cells.assign(static_cast<size_t>(grid.width) * grid.height, false);

  for (int cy = 0; cy < grid.height; ++cy) {
    for (int cx = 0; cx < grid.width; ++cx) {
      const Vec2 c = grid.cell_center(cx, cy);
      bool hit = false;
      for (const auto& w : spec.walls) {
        if (segment_distance(c, w) <= inflation_radius) {
          hit = true;
          break;
        }
      }
      if (!hit && !spec.obstacle.empty() &&
          polygon_distance(c, spec.obstacle) <= inflation_radius) {
        hit = true;
      }
      if (hit) grid.cells[static_cast<size_t>(cy) * grid.width + cx] = true;
    }
  }
  return grid;
}

namespace {

// Fixed neighbor order: E, NE, N, NW, W, SW, S, SE. The order is part of
// the planner's deterministic tie-breaking.
constexpr int kNeighborDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kNeighborDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

double octile(int dx, int dy) {
  dx = std::abs(dx);
  dy = std::abs(dy);
  return (dx + dy) + (M_SQRT2 - 2.0) * std::min(dx, dy);
}

struct OpenNode {
  double f = 0.0;
  double h = 0.0;
  int cell = 0;

  // Lowest f first; among equals, lowest h, then lowest cell index.
  bool operator>(const OpenNode& other) const {
    if (f != other.f) return f > other.f;
    if (h != other.h) return h > other.h;
    return cell > other.cell;
  }
};

}  // namespace

PlannedPath plan_path(const OccupancyGrid& grid, const Pose2D& start, const Pose2D& goal) {
  int sx = 0, sy = 0, gx = 0, gy = 0;
  grid.cell_of(start.position(), sx, sy);
  grid.cell_of(goal.position(), gx, gy);
  if (grid.occupied(sx, sy)) throw RuntimeError("plan: start cell is occupied");
  if (grid.occupied(gx, gy)) throw RuntimeError("plan: goal cell is occupied");

  const int w = grid.width;
  const auto index = [w](int x, int y) { return y * w + x; };
  const int start_idx = index(sx, sy);
  const int goal_idx = index(gx, gy);

  std::vector<double> g(grid.cells.size(), std::numeric_limits<double>::infinity());
  std::vector<int> parent(grid.cells.size(), -1);
  std::vector<bool> closed(grid.cells.size(), false);
  std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<OpenNode>> open;

  g[start_idx] = 0.0;
  open.push({octile(gx - sx, gy - sy), octile(gx - sx, gy - sy), start_idx});

  while (!open.empty()) {
    const OpenNode node = open.top();
    open.pop();
    if (closed[node.cell]) continue;
    closed[node.cell] = true;
    if (node.cell == goal_idx) break;

    const int cx = node.cell % w;
    const int cy = node.cell / w;
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + kNeighborDx[k];
      const int ny = cy + kNeighborDy[k];
      if (grid.occupied(nx, ny)) continue;
      const bool diagonal = kNeighborDx[k] != 0 && kNeighborDy[k] != 0;
      // No corner cutting: a diagonal step needs both adjacent cells free.
      if (diagonal &&
          (grid.occupied(cx + kNeighborDx[k], cy) || grid.occupied(cx, cy + kNeighborDy[k])))
        continue;
      const int nidx = index(nx, ny);
      if (closed[nidx]) continue;
      const double cost = g[node.cell] + (diagonal ? M_SQRT2 : 1.0);
      if (cost < g[nidx]) {
        g[nidx] = cost;
        parent[nidx] = node.cell;
        const double h = octile(gx - nx, gy - ny);
        open.push({cost + h, h, nidx});
      }
    }
  }

  if (!closed[goal_idx]) throw RuntimeError("plan: goal is unreachable");

  std::vector<int> cells;
  for (int at = goal_idx; at != -1; at = parent[at]) cells.push_back(at);
  std::reverse(cells.begin(), cells.end());

  PlannedPath path;
  path.poses.reserve(cells.size());
  path.cumulative_arclength.reserve(cells.size());
  double arclength = 0.0;
  for (size_t i = 0; i < cells.size(); ++i) {
    const Vec2 p = grid.cell_center(cells[i] % w, cells[i] / w);
    double heading;
    if (i + 1 < cells.size()) {
      const Vec2 q = grid.cell_center(cells[i + 1] % w, cells[i + 1] / w);
      heading = std::atan2(q.y - p.y, q.x - p.x);
    } else if (i > 0) {
      heading = path.poses.back().heading;  // keep the last segment direction
    } else {
      heading = start.heading;  // degenerate one-cell path
    }
    if (i > 0) arclength += norm(p - path.poses.back().position());
    path.poses.push_back({p.x, p.y, normalize_angle(heading)});
    path.cumulative_arclength.push_back(arclength);
  }
  return path;
}

Vec2 point_along_path(const PlannedPath& path, const Pose2D& from, double s) {
  if (path.empty()) throw RuntimeError("path: empty path");
  if (s < 0.0) throw RuntimeError("path: arclength must be >= 0");

  size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < path.poses.size(); ++i) {
    const double d = norm(path.poses[i].position() - from.position());
    if (d < best) {
      best = d;
      nearest = i;
    }
  }

  const double target = path.cumulative_arclength[nearest] + s;
  if (target >= path.length()) return path.poses.back().position();
  size_t j = nearest;
  while (path.cumulative_arclength[j + 1] < target) ++j;
  const double span = path.cumulative_arclength[j + 1] - path.cumulative_arclength[j];
  const double u = span > 0.0 ? (target - path.cumulative_arclength[j]) / span : 0.0;
  return path.poses[j].position() + u * (path.poses[j + 1].position() - path.poses[j].position());
}

VelocityCommand follow_step(const Pose2D& pose, const PlannedPath& path,
                            const FollowLimits& limits) {
  if (path.empty()) throw RuntimeError("follow: empty path");
  const Vec2 target = point_along_path(path, pose, limits.lookahead);
  const Vec2 to_target = target - pose.position();

  double bearing = 0.0;
  if (norm(to_target) > 1e-12) {
    bearing = normalize_angle(std::atan2(to_target.y, to_target.x) - pose.heading);
  }

  constexpr double kHeadingGain = 2.5;  // rad/s per rad of bearing error
  VelocityCommand cmd;
  cmd.angular = std::clamp(kHeadingGain * bearing, -limits.omega_max, limits.omega_max);
  cmd.linear = limits.v_max * std::max(0.0, std::cos(bearing));
  return cmd;
}

Pose2D integrate(const Pose2D& pose, const VelocityCommand& cmd, double dt) {
  constexpr double kOmegaEpsilon = 1e-6;  // rad/s, arc vs straight switch
  const double h0 = pose.heading;
  const double h1 = h0 + cmd.angular * dt;
  Pose2D out;
  if (std::abs(cmd.angular) > kOmegaEpsilon) {
    const double radius = cmd.linear / cmd.angular;
    out.x = pose.x + radius * (std::sin(h1) - std::sin(h0));
    out.y = pose.y - radius * (std::cos(h1) - std::cos(h0));
  } else {
    // Chord along the mean heading; exactly reversed by the negated command.
    const double mid = h0 + 0.5 * cmd.angular * dt;
    out.x = pose.x + cmd.linear * dt * std::cos(mid);
    out.y = pose.y + cmd.linear * dt * std::sin(mid);
  }
  out.heading = normalize_angle(h1);
  return out;
}

}  // namespace legibot
