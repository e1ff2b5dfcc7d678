#include "lensar/search_mission.hpp"

#include <algorithm>
#include <cmath>

#include "lensar/errors.hpp"

namespace lensar {

std::string to_string(LegLayout l) { return l == LegLayout::edge_to_edge ? "edge_to_edge" : "coverage_optimal"; }

LegLayout parse_leg_layout(const std::string& s) {
  if (s == "edge_to_edge") return LegLayout::edge_to_edge;
  if (s == "coverage_optimal") return LegLayout::coverage_optimal;
  throw ConfigError("unknown leg layout '" + s + "' (expected coverage_optimal or edge_to_edge)");
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::exploratory: return "exploratory";
    case Phase::guided: return "guided";
    case Phase::done: return "done";
  }
  return "?";
}

void SearchConfig::validate() const {
  if (!(aoi.width() > 0.0 && aoi.height() > 0.0)) throw ConfigError("search: degenerate AOI");
  if (!(operational_range_m > 0.0)) throw ConfigError("search: operational range must be > 0");
  if (!(altitude_m > 0.0)) throw ConfigError("search: altitude must be > 0");
  if (!(speed_mps > 0.0 && speed_mps <= 17.0)) throw ConfigError("search: speed must be in (0, 17] m/s");
  if (!(stop_elevation_deg > 45.0 && stop_elevation_deg < 90.0))
    throw ConfigError("search: stop elevation must be in (45, 90) degrees");
  if (smoothing_window == 0) throw ConfigError("search: smoothing window must be >= 1");
}

std::vector<Vec2> plan_zigzag(const SearchConfig& cfg) {
  cfg.validate();
  const Rect& a = cfg.aoi;
  const bool legs_along_y = a.height() >= a.width();
  const double across = legs_along_y ? a.width() : a.height();
  const double along = legs_along_y ? a.height() : a.width();
  const double r = cfg.operational_range_m;

  std::vector<double> offsets;
  if (cfg.legs == LegLayout::coverage_optimal) {
    if (2.0 * r >= across) {
      offsets.push_back(across / 2.0);
    } else {
      const double last = across - r;
      for (double o = r; o < last - 1e-9; o += 2.0 * r) offsets.push_back(o);
      offsets.push_back(last);
    }
  } else {
    const double s = std::min(2.0 * r, across);
    for (double o = 0.0; o < across - 1e-9; o += s) offsets.push_back(o);
    offsets.push_back(across);
  }

  std::vector<Vec2> wp;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const bool forward = k % 2 == 0;
    const double s0 = forward ? 0.0 : along, s1 = forward ? along : 0.0;
    for (double s : {s0, s1}) {
      if (legs_along_y)
        wp.push_back({a.x_min + offsets[k], a.y_min + s});
      else
        wp.push_back({a.x_min + s, a.y_min + offsets[k]});
    }
  }
  return wp;
}

double path_length(std::span<const Vec2> path) {
  double len = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k)
    len += std::hypot(path[k].x - path[k - 1].x, path[k].y - path[k - 1].y);
  return len;
}

double distance_to_path(const Vec2& p, std::span<const Vec2> path) {
  if (path.empty()) throw DomainError("distance_to_path: empty path");
  double best = std::hypot(p.x - path[0].x, p.y - path[0].y);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Vec2 a = path[k - 1], b = path[k];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double l2 = dx * dx + dy * dy;
    const double t = l2 > 0.0 ? std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / l2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy)));
  }
  return best;
}

MissionState start_mission(const SearchConfig& cfg, const std::vector<Vec2>& waypoints) {
  MissionState st;
  st.waypoints.assign(waypoints.begin(), waypoints.end());
  if (!st.waypoints.empty()) {
    st.position = {st.waypoints.front().x, st.waypoints.front().y, cfg.altitude_m};
    st.waypoints.pop_front();
  } else {
    st.position = {cfg.aoi.x_min, cfg.aoi.y_min, cfg.altitude_m};
  }
  if (st.waypoints.empty()) st.sweep_complete = true;
  return st;
}

std::optional<SmoothedDirection> smooth_direction(const std::deque<DirectionEstimate>& history, std::size_t window,
                                                  double score_gate) {
  if (history.empty() || window == 0) return std::nullopt;
  const std::size_t begin = history.size() > window ? history.size() - window : 0;
  Vec3 acc;
  double wsum = 0.0;
  const DirectionEstimate* best = nullptr;
  for (std::size_t k = begin; k < history.size(); ++k) {
    const auto& e = history[k];
    if (!best || e.score > best->score) best = &e;
    if (e.score >= score_gate && e.score > 0.0) {
      acc += e.direction.vec() * e.score;
      wsum += e.score;
    }
  }
  Direction d = best->direction;
  if (wsum > 0.0 && norm(acc) > 1e-12) d = Direction::from_vector(acc);
  const double elev = rad2deg(std::asin(std::clamp(d.z(), -1.0, 1.0)));
  return SmoothedDirection{d, elev};
}

std::optional<GroundSmoothed> smooth_ground_point(const std::deque<DirectionEstimate>& history,
                                                  const std::deque<Vec3>& origins, const Vec3& here,
                                                  std::size_t window, double score_gate) {
  if (history.empty() || window == 0) return std::nullopt;
  if (origins.size() != history.size()) throw DomainError("smooth_ground_point: origins and history differ in length");
  static const double kMinTan = std::tan(deg2rad(5.0));
  const auto project = [&](std::size_t k) {
    const Vec3 enu = ned_to_enu(history[k].direction.vec());
    const double h = std::hypot(enu.x, enu.y);
    if (h < 1e-12) return Vec2{origins[k].x, origins[k].y};
    const double down = std::max(-enu.z, h * kMinTan);
    const double reach = origins[k].z * h / down;
    return Vec2{origins[k].x + enu.x / h * reach, origins[k].y + enu.y / h * reach};
  };
  const std::size_t begin = history.size() > window ? history.size() - window : 0;
  double gx = 0.0, gy = 0.0, wsum = 0.0;
  std::size_t best = begin;
  for (std::size_t k = begin; k < history.size(); ++k) {
    const auto& e = history[k];
    if (e.score > history[best].score) best = k;
    if (e.score >= score_gate && e.score > 0.0) {
      const Vec2 g = project(k);
      gx += g.x * e.score;
      gy += g.y * e.score;
      wsum += e.score;
    }
  }
  Vec2 g = wsum > 0.0 ? Vec2{gx / wsum, gy / wsum} : project(best);
  const Vec3 ned = enu_to_ned(Vec3{g.x - here.x, g.y - here.y, -here.z});
  Direction d = norm(ned) > 1e-12 ? Direction::from_vector(ned) : Direction::from_vector({0, 0, 1});
  const double elev = rad2deg(std::asin(std::clamp(d.z(), -1.0, 1.0)));
  return GroundSmoothed{{d, elev}, g};
}

bool stop_check(double elevation_deg, const SearchConfig& cfg) { return elevation_deg >= cfg.stop_elevation_deg; }

double stop_radius_m(const SearchConfig& cfg) { return cfg.altitude_m / std::tan(deg2rad(cfg.stop_elevation_deg)); }

DirectionEstimate apply_attitude(const DirectionEstimate& raw, const Attitude& att) {
  DirectionEstimate w = raw;
  w.direction = body_to_world(raw.direction, att);
  w.angles = angles_unchecked(w.direction.vec());
  return w;
}

MotionCommand mission_step(MissionState& st, const SearchConfig& cfg, std::span<const TrackedEstimate> new_estimates,
                           double dt) {
  if (!(dt > 0.0)) throw DomainError("mission_step: dt must be > 0");
  MotionCommand cmd;
  if (st.phase == Phase::done) {
    st.clock += dt;
    return cmd;
  }

  for (const auto& te : new_estimates) {
    if (st.phase == Phase::exploratory) {
      if (cfg.guided_enabled && te.verified && te.estimate.score >= cfg.score_gate) {
        st.phase = Phase::guided;
        st.guided_since = st.clock;
        st.locked_source = te.source;
      }
    }
    if (st.phase == Phase::guided && st.locked_source == te.source) {
      st.history.push_back(te.estimate);
      st.history_origin.push_back(st.position);
      while (st.history.size() > std::max<std::size_t>(cfg.smoothing_window, 1) * 4) {
        st.history.pop_front();
        st.history_origin.pop_front();
      }
    }
  }

  if (st.phase == Phase::exploratory) {
    const Vec3 start = st.position;
    double remaining = cfg.speed_mps * dt;
    while (remaining > 0.0 && !st.waypoints.empty()) {
      const Vec2 wp = st.waypoints.front();
      const double dx = wp.x - st.position.x, dy = wp.y - st.position.y;
      const double dist = std::hypot(dx, dy);
      if (dist <= remaining) {
        st.position.x = wp.x;
        st.position.y = wp.y;
        remaining -= dist;
        st.waypoints.pop_front();
      } else {
        st.position.x += dx / dist * remaining;
        st.position.y += dy / dist * remaining;
        remaining = 0.0;
      }
    }
    if (st.waypoints.empty()) st.sweep_complete = true;
    cmd.velocity_enu = (st.position - start) * (1.0 / dt);
    cmd.hover = norm(cmd.velocity_enu) == 0.0;
  } else if (st.phase == Phase::guided) {
    // Bearings are smoothed as ground points so older ones, taken further back along the
    // track, do not drag the heading; the step stops at the smoothed point instead of passing it.
    const auto sm = smooth_ground_point(st.history, st.history_origin, st.position, cfg.smoothing_window,
                                        cfg.score_gate);
    if (sm && stop_check(sm->from_here.elevation_deg, cfg)) {
      st.phase = Phase::done;
      st.final_fix = Vec2{st.position.x, st.position.y};
      st.done_at = st.clock;
    } else if (sm) {
      const double dx = sm->ground_point.x - st.position.x, dy = sm->ground_point.y - st.position.y;
      const double h = std::hypot(dx, dy);
      if (h > 1e-9) {
        const double step = std::min(cfg.speed_mps * dt, h);
        cmd.velocity_enu = {dx / h * step / dt, dy / h * step / dt, 0.0};
        cmd.hover = false;
        st.position += cmd.velocity_enu * dt;
      }
    }
  }
  if (!cmd.hover) st.attitude.yaw = std::atan2(cmd.velocity_enu.x, cmd.velocity_enu.y);
  st.clock += dt;
  return cmd;
}

}  // namespace lensar
