#include <doctest.h>

#include <cmath>

#include "lensar/errors.hpp"
#include "lensar/search_mission.hpp"
#include "support.hpp"

using namespace lensar;
using namespace lensar::testing;

namespace {

// Independent point-to-segment distance.
double seg_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? (wx * vx + wy * vy) / len2 : 0.0;
  t = std::max(0.0, std::min(1.0, t));
  return std::hypot(wx - t * vx, wy - t * vy);
}

double oracle_dist(const Vec2& p, const std::vector<Vec2>& path) {
  double best = 1e300;
  for (std::size_t k = 1; k < path.size(); ++k) best = std::min(best, seg_dist(p, path[k - 1], path[k]));
  return best;
}

DirectionEstimate world_estimate(const Vec3& drone, const Vec3& target, double score, double t = 0.0) {
  DirectionEstimate e;
  const Vec3 ned = enu_to_ned(target - drone);
  e.direction = Direction::from_vector(ned);
  e.angles = angles_unchecked(e.direction.vec());
  e.score = score;
  e.timestamp = t;
  return e;
}

}  // namespace

TEST_CASE("zigzag examples") {
  SearchConfig c;
  auto wp = plan_zigzag(c);
  REQUIRE(wp.size() == 4);
  CHECK(wp[0] == Vec2{100, 0});
  CHECK(wp[1] == Vec2{100, 400});
  CHECK(wp[2] == Vec2{300, 400});
  CHECK(wp[3] == Vec2{300, 0});
  CHECK(path_length(wp) == doctest::Approx(1000.0));

  c.legs = LegLayout::edge_to_edge;
  wp = plan_zigzag(c);
  REQUIRE(wp.size() == 6);
  CHECK(wp[0].x == 0.0);
  CHECK(wp[2].x == 200.0);
  CHECK(wp[4].x == 400.0);
  CHECK(path_length(wp) == doctest::Approx(1600.0));
  CHECK(path_length(wp) / c.speed_mps == doctest::Approx(800.0));

  SearchConfig narrow;
  narrow.aoi = {0, 0, 150, 600};
  wp = plan_zigzag(narrow);
  REQUIRE(wp.size() == 2);
  CHECK(wp[0].x == 75.0);
  CHECK(wp[1].x == 75.0);

  SearchConfig wide;
  wide.aoi = {10, 20, 810, 320};
  wp = plan_zigzag(wide);
  for (const auto& w : wp) CHECK((w.x == 10.0 || w.x == 810.0));  // legs run along x
}

TEST_CASE("coverage guarantee (property)") {
  Rng rng = make_rng(61, 0);
  for (int trial = 0; trial < 60; ++trial) {
    SearchConfig c;
    const double x0 = rand_uniform(rng, -500, 500), y0 = rand_uniform(rng, -500, 500);
    c.aoi = {x0, y0, x0 + rand_uniform(rng, 10, 1500), y0 + rand_uniform(rng, 10, 1500)};
    c.operational_range_m = rand_uniform(rng, 5, 400);
    c.legs = trial % 2 ? LegLayout::edge_to_edge : LegLayout::coverage_optimal;
    const auto wp = plan_zigzag(c);
    for (int k = 0; k < 2000; ++k) {
      const Vec2 p{rand_uniform(rng, c.aoi.x_min, c.aoi.x_max), rand_uniform(rng, c.aoi.y_min, c.aoi.y_max)};
      const double d = oracle_dist(p, wp);
      REQUIRE(d <= c.operational_range_m + 1e-9);
      CHECK(std::abs(distance_to_path(p, wp) - d) < 1e-9);
    }
  }
}

TEST_CASE("search config validation") {
  SearchConfig c;
  c.speed_mps = 20;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.stop_elevation_deg = 45;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.operational_range_m = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.aoi = {0, 0, 0, 100};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("stop check") {
  SearchConfig c;
  CHECK(stop_check(80.0, c));
  CHECK_FALSE(stop_check(79.9, c));
  CHECK(stop_radius_m(c) == doctest::Approx(60.0 / std::tan(deg2rad(80.0))));
  CHECK(stop_radius_m(c) == doctest::Approx(10.58).epsilon(1e-3));
}

TEST_CASE("smoothing") {
  std::deque<DirectionEstimate> h;
  CHECK_FALSE(smooth_direction(h, 5, 0.5).has_value());
  const Vec3 drone{0, 0, 60};
  const auto e = world_estimate(drone, {30, 40, 0}, 0.9);
  for (int i = 0; i < 5; ++i) h.push_back(e);
  auto s = smooth_direction(h, 5, 0.5);
  REQUIRE(s);
  CHECK(angular_distance(s->direction, e.direction) < 1e-12);

  h.clear();
  h.push_back(world_estimate(drone, {20, 0, 0}, 0.8));
  h.push_back(world_estimate(drone, {-20, 0, 0}, 0.8));
  s = smooth_direction(h, 5, 0.5);
  REQUIRE(s);
  CHECK(s->elevation_deg == doctest::Approx(90.0));

  h.clear();
  const auto a = world_estimate(drone, {50, 10, 0}, 1.0);
  h.push_back(a);
  h.push_back(world_estimate(drone, {-50, 10, 0}, 0.0));
  s = smooth_direction(h, 5, 0.0);
  REQUIRE(s);
  CHECK(angular_distance(s->direction, a.direction) < 1e-12);

  // Nothing passes the gate: the best single estimate wins.
  h.clear();
  h.push_back(world_estimate(drone, {50, 10, 0}, 0.2));
  const auto best = world_estimate(drone, {0, 50, 0}, 0.3);
  h.push_back(best);
  s = smooth_direction(h, 5, 0.5);
  REQUIRE(s);
  CHECK(angular_distance(s->direction, best.direction) < 1e-12);

  // Only the last `window` entries count.
  h.clear();
  for (int i = 0; i < 10; ++i) h.push_back(world_estimate(drone, {100, 0, 0}, 0.9));
  for (int i = 0; i < 3; ++i) h.push_back(world_estimate(drone, {0, 100, 0}, 0.9));
  s = smooth_direction(h, 3, 0.5);
  CHECK(angular_distance(s->direction, world_estimate(drone, {0, 100, 0}, 1).direction) < 1e-12);
}

TEST_CASE("ground-point smoothing compensates for drone motion") {
  const Vec3 target{30, -20, 0};
  std::deque<DirectionEstimate> h;
  std::deque<Vec3> origins;
  for (int k = 0; k < 5; ++k) {
    const Vec3 p{-100.0 + 10.0 * k, 15.0 * k, 60.0};
    h.push_back(world_estimate(p, target, 0.9));
    origins.push_back(p);
  }
  const Vec3 here{5, 5, 60};
  const auto g = smooth_ground_point(h, origins, here, 5, 0.5);
  REQUIRE(g);
  CHECK(g->ground_point.x == doctest::Approx(30.0));
  CHECK(g->ground_point.y == doctest::Approx(-20.0));
  CHECK(norm(g->from_here.direction.vec() - world_estimate(here, target, 1.0).direction.vec()) < 1e-12);
  // The plain mean of the same bearings is biased toward the older viewpoints.
  CHECK(angular_distance(smooth_direction(h, 5, 0.5)->direction, g->from_here.direction) > deg2rad(5.0));
  origins.pop_back();
  CHECK_THROWS_AS(smooth_ground_point(h, origins, here, 5, 0.5), DomainError);
}

TEST_CASE("apply_attitude") {
  DirectionEstimate raw;
  raw.direction = dir_from_angles({deg2rad(50), deg2rad(20)});
  raw.angles = angles_from_dir(raw.direction);
  raw.score = 0.7;
  raw.timestamp = 12.5;
  const auto level = apply_attitude(raw, {});
  CHECK(angular_distance(level.direction, raw.direction) < 1e-12);
  CHECK(level.score == 0.7);
  CHECK(level.timestamp == 12.5);

  DirectionEstimate fwd;
  fwd.direction = Direction::from_vector({1, 0, 0});
  const auto pitched = apply_attitude(fwd, {0, deg2rad(10), 0});
  CHECK(rad2deg(angular_distance(pitched.direction, fwd.direction)) == doctest::Approx(10.0));
  CHECK(pitched.direction.y() == doctest::Approx(0.0));
  CHECK(pitched.direction.z() < 0.0);  // nose up points the body x axis above the horizon

  Rng rng = make_rng(62, 0);
  for (int i = 0; i < 500; ++i) {
    const Attitude att = rand_attitude(rng);
    DirectionEstimate r;
    r.direction = Direction::from_vector(rand_unit(rng));
    const auto w = apply_attitude(r, att);
    CHECK(norm(world_to_body(w.direction, att).vec() - r.direction.vec()) < 1e-12);
  }
}

TEST_CASE("no estimates: the sweep ends without a fix") {
  SearchConfig c;
  const auto wp = plan_zigzag(c);
  auto st = start_mission(c, wp);
  CHECK(st.position.z == 60.0);
  int steps = 0;
  while (!st.sweep_complete && steps < 10000) {
    mission_step(st, c, {}, 1.0);
    ++steps;
  }
  CHECK(steps == 500);
  CHECK(st.phase == Phase::exploratory);
  CHECK_FALSE(st.final_fix.has_value());
  CHECK_THROWS(mission_step(st, c, {}, 0.0));
}

TEST_CASE("phase transition rules") {
  SearchConfig c;
  const auto wp = plan_zigzag(c);
  auto st = start_mission(c, wp);
  const Vec3 target{150, 120, 0};
  std::vector<TrackedEstimate> unverified{{world_estimate(st.position, target, 0.95), 0xAB, false}};
  mission_step(st, c, unverified, 1.0);
  CHECK(st.phase == Phase::exploratory);
  std::vector<TrackedEstimate> weak{{world_estimate(st.position, target, 0.3), 0xAB, true}};
  mission_step(st, c, weak, 1.0);
  CHECK(st.phase == Phase::exploratory);
  std::vector<TrackedEstimate> good{{world_estimate(st.position, target, 0.9), 0xAB, true}};
  mission_step(st, c, good, 1.0);
  CHECK(st.phase == Phase::guided);
  CHECK(st.locked_source == 0xAB);

  SearchConfig off = c;
  off.guided_enabled = false;
  auto s2 = start_mission(off, wp);
  mission_step(s2, off, good, 1.0);
  CHECK(s2.phase == Phase::exploratory);
}

TEST_CASE("noiseless closed-loop convergence (property)") {
  Rng rng = make_rng(63, 0);
  for (int trial = 0; trial < 200; ++trial) {
    SearchConfig c;
    c.altitude_m = rand_uniform(rng, 20, 120);
    c.speed_mps = rand_uniform(rng, 1, 8);
    c.stop_elevation_deg = rand_uniform(rng, 70, 88);
    const double dt = 1.0;
    MissionState st = start_mission(c, {{rand_uniform(rng, 0, 400), rand_uniform(rng, 0, 400)}});
    const Vec3 target{rand_uniform(rng, 0, 400), rand_uniform(rng, 0, 400), 0};
    Phase last = st.phase;
    double prev_range = 1e300;
    for (int k = 0; k < 5000 && st.phase != Phase::done; ++k) {
      std::vector<TrackedEstimate> est{{world_estimate(st.position, target, 1.0, st.clock), 7, true}};
      mission_step(st, c, est, dt);
      CHECK(static_cast<int>(st.phase) >= static_cast<int>(last));
      last = st.phase;
      const double range = std::hypot(st.position.x - target.x, st.position.y - target.y);
      // Away from the overflight the smoothed bearing points at the target.
      if (st.phase == Phase::guided && prev_range > stop_radius_m(c) + 2.0 * c.speed_mps * dt * c.smoothing_window) {
        CHECK(range <= prev_range);
      }
      prev_range = range;
      CHECK(st.position.z == c.altitude_m);
    }
    REQUIRE(st.phase == Phase::done);
    REQUIRE(st.final_fix.has_value());
    const double err = std::hypot(st.final_fix->x - target.x, st.final_fix->y - target.y);
    CHECK(err <= stop_radius_m(c) + c.speed_mps * dt + 1e-9);
  }
}
