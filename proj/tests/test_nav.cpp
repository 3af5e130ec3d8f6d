#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "legibot/errors.hpp"
#include "legibot/nav.hpp"
#include "oracles.hpp"

using namespace legibot;

namespace {

/// Small hand-built grid; all cells free unless listed.
OccupancyGrid make_grid(int w, int h, const std::vector<std::pair<int, int>>& occupied) {
  OccupancyGrid g;
  g.resolution = 1.0;
  g.width = w;
  g.height = h;
  g.origin = {0.0, 0.0, 0.0};
  g.cells.assign(static_cast<size_t>(w) * h, false);
  for (auto [cx, cy] : occupied) g.cells[static_cast<size_t>(cy) * w + cx] = true;
  return g;
}

Pose2D at_cell(const OccupancyGrid& g, int cx, int cy, double heading = 0.0) {
  const Vec2 c = g.cell_center(cx, cy);
  return {c.x, c.y, heading};
}

double octile_cells(int dx, int dy) {
  dx = std::abs(dx);
  dy = std::abs(dy);
  return (dx + dy) + (M_SQRT2 - 2.0) * std::min(dx, dy);
}

double angle_diff(double a, double b) { return std::abs(normalize_angle(a - b)); }

}  // namespace

TEST_CASE("occupancy grid covers the scenario with a margin") {
  const ScenarioSpec spec = find_builtin_scenario("turn").value();
  const double inflation = spec.circumscribed_radius() + 0.15;
  const OccupancyGrid grid = build_occupancy_grid(spec, 0.05, inflation);

  CHECK(grid.resolution == 0.05);
  CHECK(grid.origin.x < -6.0);
  CHECK(grid.origin.y < -1.5);
  CHECK(grid.origin.x + grid.width * grid.resolution > 6.0);
  CHECK(grid.origin.y + grid.height * grid.resolution > 6.0);

  int cx = 0, cy = 0;
  // a point on the south wall is occupied
  grid.cell_of({0.0, -1.5}, cx, cy);
  CHECK(grid.occupied(cx, cy));
  // within the inflation band, still occupied
  grid.cell_of({0.0, -1.5 + 0.9 * inflation}, cx, cy);
  CHECK(grid.occupied(cx, cy));
  // the obstacle interior is occupied
  grid.cell_of({-4.0, -0.55}, cx, cy);
  CHECK(grid.occupied(cx, cy));
  // the corridor center, past the obstacle, is free
  grid.cell_of({2.0, 0.3}, cx, cy);
  CHECK_FALSE(grid.occupied(cx, cy));
  // out of bounds reads as occupied
  CHECK(grid.occupied(-1, 0));
  CHECK(grid.occupied(grid.width, grid.height));

  // cell_of inverts cell_center
  for (int i : {0, 7, 131}) {
    const Vec2 c = grid.cell_center(i, i / 2);
    int rx = 0, ry = 0;
    grid.cell_of(c, rx, ry);
    CHECK(rx == i);
    CHECK(ry == i / 2);
  }
}

TEST_CASE("grid construction rejects bad arguments") {
  const ScenarioSpec spec = find_builtin_scenario("turn").value();
  CHECK_THROWS_AS(build_occupancy_grid(spec, 0.0, 0.1), ValidationError);
  CHECK_THROWS_AS(build_occupancy_grid(spec, 0.05, -0.1), ValidationError);
}

TEST_CASE("planner finds straight and diagonal shortest paths") {
  const OccupancyGrid g = make_grid(9, 9, {});

  SUBCASE("straight east") {
    const PlannedPath p = plan_path(g, at_cell(g, 1, 4), at_cell(g, 7, 4));
    REQUIRE(p.poses.size() == 7);
    CHECK(p.length() == doctest::Approx(6.0));
    for (const auto& pose : p.poses) {
      CHECK(pose.y == doctest::Approx(4.5));
      CHECK(pose.heading == doctest::Approx(0.0));
    }
    // arclength is cumulative and starts at zero
    CHECK(p.cumulative_arclength.front() == 0.0);
    for (size_t i = 1; i < p.cumulative_arclength.size(); ++i) {
      CHECK(p.cumulative_arclength[i] ==
            doctest::Approx(p.cumulative_arclength[i - 1] + 1.0));
    }
  }
  SUBCASE("pure diagonal") {
    const PlannedPath p = plan_path(g, at_cell(g, 1, 1), at_cell(g, 6, 6));
    REQUIRE(p.poses.size() == 6);
    CHECK(p.length() == doctest::Approx(5.0 * M_SQRT2));
    CHECK(p.poses.front().heading == doctest::Approx(M_PI / 4.0));
  }
  SUBCASE("octile-optimal mixed move") {
    const PlannedPath p = plan_path(g, at_cell(g, 0, 0), at_cell(g, 7, 3));
    CHECK(p.length() == doctest::Approx(octile_cells(7, 3)));
  }
  SUBCASE("degenerate single-cell path keeps the start heading") {
    const PlannedPath p = plan_path(g, at_cell(g, 3, 3, 1.0), at_cell(g, 3, 3));
    REQUIRE(p.poses.size() == 1);
    CHECK(p.poses[0].heading == doctest::Approx(1.0));
    CHECK(p.length() == 0.0);
  }
}

TEST_CASE("planner tie-break prefers the lower heuristic among equal f") {
  // Start (0,0), goal (2,1): stepping E and NE both give f = 1 + sqrt(2);
  // the NE node is closer to the goal, so the path takes the diagonal first.
  const OccupancyGrid g = make_grid(4, 3, {});
  const PlannedPath p = plan_path(g, at_cell(g, 0, 0), at_cell(g, 2, 1));
  REQUIRE(p.poses.size() == 3);
  CHECK(p.poses[1].x == doctest::Approx(1.5));
  CHECK(p.poses[1].y == doctest::Approx(1.5));
}

TEST_CASE("planner is deterministic") {
  const ScenarioSpec spec = find_builtin_scenario("turn").value();
  const OccupancyGrid grid =
      build_occupancy_grid(spec, 0.05, spec.circumscribed_radius() + 0.15);
  const PlannedPath a = plan_path(grid, spec.start, spec.goal1);
  const PlannedPath b = plan_path(grid, spec.start, spec.goal1);
  CHECK(a == b);
}

TEST_CASE("planner never cuts corners") {
  // One occupied cell between start and goal. A planner that allowed
  // diagonal moves past an occupied corner would slip by it for a cost of
  // 1 + sqrt(2) + 1; with corner cutting forbidden every route is axis-
  // aligned around the blocker, cost 4.
  const OccupancyGrid g = make_grid(6, 6, {{2, 2}});
  const PlannedPath p = plan_path(g, at_cell(g, 1, 1), at_cell(g, 3, 3));
  CHECK(p.length() == doctest::Approx(4.0));

  auto cell_at = [&](const Pose2D& pose) {
    int cx = 0, cy = 0;
    g.cell_of(pose.position(), cx, cy);
    return std::pair(cx, cy);
  };
  for (size_t i = 1; i < p.poses.size(); ++i) {
    auto [ax, ay] = cell_at(p.poses[i - 1]);
    auto [bx, by] = cell_at(p.poses[i]);
    CHECK(std::abs(bx - ax) <= 1);
    CHECK(std::abs(by - ay) <= 1);
    CHECK_FALSE(g.occupied(bx, by));
    if (bx != ax && by != ay) {
      // a diagonal move requires both adjacent orthogonal cells free
      CHECK_FALSE(g.occupied(ax, by));
      CHECK_FALSE(g.occupied(bx, ay));
    }
  }
}

TEST_CASE("planner failure modes") {
  SUBCASE("occupied endpoints") {
    const OccupancyGrid g = make_grid(5, 5, {{2, 2}});
    CHECK_THROWS_AS(plan_path(g, at_cell(g, 2, 2), at_cell(g, 4, 4)), RuntimeError);
    CHECK_THROWS_AS(plan_path(g, at_cell(g, 0, 0), at_cell(g, 2, 2)), RuntimeError);
  }
  SUBCASE("walled-off goal") {
    const OccupancyGrid g = make_grid(7, 7,
        {{3, 2}, {4, 2}, {5, 2}, {3, 3}, {5, 3}, {3, 4}, {4, 4}, {5, 4}});
    CHECK_THROWS_AS(plan_path(g, at_cell(g, 0, 0), at_cell(g, 4, 3)), RuntimeError);
  }
}

TEST_CASE("scenario-level plans stay clear of obstacles") {
  for (const char* name : {"turn", "straight"}) {
    const ScenarioSpec spec = find_builtin_scenario(name).value();
    const double inflation = spec.circumscribed_radius() + 0.15;
    const OccupancyGrid grid = build_occupancy_grid(spec, 0.05, inflation);
    for (const auto& [from, to] : {std::pair(spec.start, spec.goal1),
                                   std::pair(spec.goal1, spec.goal2)}) {
      const PlannedPath p = plan_path(grid, from, to);
      REQUIRE_FALSE(p.empty());
      for (const auto& pose : p.poses) {
        for (const auto& w : spec.walls) {
          CHECK(segment_distance(pose.position(), w) > inflation);
        }
        CHECK(polygon_distance(pose.position(), spec.obstacle) > inflation);
      }
      // path ends within a cell diagonal of the requested goal
      CHECK(norm(p.poses.back().position() - to.position()) < 0.05 * M_SQRT2);
    }
  }
}

TEST_CASE("point_along_path walks arclength from the nearest vertex") {
  PlannedPath path;
  path.poses = {{0, 0, 0}, {1, 0, 0}, {3, 0, 0}, {3, 2, M_PI / 2}};
  path.cumulative_arclength = {0.0, 1.0, 3.0, 5.0};

  const Pose2D at_start{0.1, 0.2, 0.0};
  CHECK(point_along_path(path, at_start, 0.0) == Vec2{0, 0});
  CHECK(point_along_path(path, at_start, 0.5) == Vec2{0.5, 0.0});
  CHECK(point_along_path(path, at_start, 2.0) == Vec2{2.0, 0.0});
  CHECK(point_along_path(path, at_start, 4.0) == Vec2{3.0, 1.0});
  // clamping past the end
  CHECK(point_along_path(path, at_start, 99.0) == Vec2{3.0, 2.0});
  // measured from the nearest vertex, not the start
  const Pose2D near_third{2.9, 0.1, 0.0};
  CHECK(point_along_path(path, near_third, 1.0) == Vec2{3.0, 1.0});
  // ties pick the earliest vertex
  PlannedPath loop;
  loop.poses = {{0, 0, 0}, {2, 0, 0}, {0, 0, 0}};
  loop.cumulative_arclength = {0.0, 2.0, 4.0};
  CHECK(point_along_path(loop, {0.0, 0.5, 0.0}, 1.0) == Vec2{1.0, 0.0});

  CHECK_THROWS_AS(point_along_path(PlannedPath{}, at_start, 1.0), RuntimeError);
  CHECK_THROWS_AS(point_along_path(path, at_start, -0.1), RuntimeError);
}

TEST_CASE("follow_step steering law") {
  PlannedPath east;
  east.poses = {{0, 0, 0}, {5, 0, 0}};
  east.cumulative_arclength = {0.0, 5.0};
  const FollowLimits limits;

  SUBCASE("aligned: full speed, no turn") {
    const VelocityCommand cmd = follow_step({0, 0, 0}, east, limits);
    CHECK(cmd.linear == doctest::Approx(limits.v_max));
    CHECK(cmd.angular == doctest::Approx(0.0));
  }
  SUBCASE("small heading error: proportional turn") {
    const VelocityCommand cmd = follow_step({0, 0, -0.1}, east, limits);
    CHECK(cmd.angular == doctest::Approx(2.5 * 0.1));
    CHECK(cmd.linear == doctest::Approx(limits.v_max * std::cos(0.1)));
  }
  SUBCASE("perpendicular: rotate in place at the rate limit") {
    const VelocityCommand cmd = follow_step({0, 0, M_PI / 2}, east, limits);
    CHECK(cmd.angular == doctest::Approx(-limits.omega_max));
    CHECK(cmd.linear == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("target behind: no reverse driving") {
    const VelocityCommand cmd = follow_step({6.0, 0.0, 0.0}, east, limits);
    CHECK(cmd.linear == doctest::Approx(0.0));
  }
  SUBCASE("empty path throws") {
    CHECK_THROWS_AS(follow_step({0, 0, 0}, PlannedPath{}, limits), RuntimeError);
  }
}

TEST_CASE("integrate matches fine substepping") {
  oracles::TinyRand rng(2024);
  for (int i = 0; i < 25; ++i) {
    const Pose2D start{rng.next_in(-2, 2), rng.next_in(-2, 2), rng.next_in(-3, 3)};
    const VelocityCommand cmd{rng.next_in(0.0, 0.6), rng.next_in(-1.0, 1.0)};
    const double dt = rng.next_in(0.01, 0.5);

    const Pose2D got = integrate(start, cmd, dt);
    const oracles::TinyPose ref = oracles::substep_integrate(
        {start.x, start.y, start.heading}, cmd.linear, cmd.angular, dt, 200000);
    CHECK(std::abs(got.x - ref.x) < 1e-6);
    CHECK(std::abs(got.y - ref.y) < 1e-6);
    CHECK(angle_diff(got.heading, ref.heading) < 1e-9);
  }
}

TEST_CASE("integrate closed-form cases") {
  SUBCASE("straight line") {
    const Pose2D out = integrate({1.0, 2.0, M_PI / 6}, {1.0, 0.0}, 0.5);
    CHECK(out.x == 1.0 + 0.5 * std::cos(M_PI / 6));
    CHECK(out.y == 2.0 + 0.5 * std::sin(M_PI / 6));
    CHECK(out.heading == doctest::Approx(M_PI / 6));
  }
  SUBCASE("quarter circle") {
    const Pose2D out = integrate({0.0, 0.0, 0.0}, {1.0, 1.0}, M_PI / 2);
    CHECK(out.x == doctest::Approx(1.0));
    CHECK(out.y == doctest::Approx(1.0));
    CHECK(out.heading == doctest::Approx(M_PI / 2));
  }
  SUBCASE("pure rotation holds position") {
    const Pose2D out = integrate({3.0, -1.0, 0.3}, {0.0, 0.8}, 0.25);
    CHECK(out.x == doctest::Approx(3.0));
    CHECK(out.y == doctest::Approx(-1.0));
    CHECK(out.heading == doctest::Approx(0.5));
  }
}

TEST_CASE("integrate reverses exactly under the negated command") {
  oracles::TinyRand rng(99);
  for (int i = 0; i < 400; ++i) {
    const Pose2D start{rng.next_in(-5, 5), rng.next_in(-5, 5), rng.next_in(-3.2, 3.2)};
    double omega = rng.next_in(-1.0, 1.0);
    if (i % 5 == 0) omega = 0.0;                      // straight branch
    if (i % 5 == 1) omega = rng.next_in(-1e-6, 1e-6); // chord branch, tiny turn
    const VelocityCommand fwd{rng.next_in(0.0, 0.6), omega};
    const double dt = rng.next_in(0.01, 0.2);

    const Pose2D mid = integrate(start, fwd, dt);
    const Pose2D back = integrate(mid, {-fwd.linear, -fwd.angular}, dt);
    CHECK(std::abs(back.x - start.x) < 1e-9);
    CHECK(std::abs(back.y - start.y) < 1e-9);
    CHECK(angle_diff(back.heading, start.heading) < 1e-9);
  }
}
