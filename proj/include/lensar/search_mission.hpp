#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lensar/aoa_estimator.hpp"
#include "lensar/geometry.hpp"

namespace lensar {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  bool operator==(const Vec2&) const = default;
};

// Axis-aligned area of interest, meters ENU.
struct Rect {
  double x_min{0.0};
  double y_min{0.0};
  double x_max{0.0};
  double y_max{0.0};

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

enum class LegLayout {
  coverage_optimal,  // first and last legs inset by R_op
  edge_to_edge,      // outer legs on the AOI boundary
};

std::string to_string(LegLayout l);
LegLayout parse_leg_layout(const std::string& s);

struct SearchConfig {
  Rect aoi{0.0, 0.0, 400.0, 400.0};
  double operational_range_m{100.0};
  double altitude_m{60.0};
  double speed_mps{2.0};
  double stop_elevation_deg{80.0};
  std::size_t smoothing_window{5};
  double score_gate{0.5};
  LegLayout legs{LegLayout::coverage_optimal};
  // When false the mission only sweeps and records discoveries.
  bool guided_enabled{true};

  void validate() const;
};

// Boustrophedon waypoints; legs run parallel to the AOI's long axis (y on ties).
std::vector<Vec2> plan_zigzag(const SearchConfig& cfg);

double path_length(std::span<const Vec2> path);
double distance_to_path(const Vec2& p, std::span<const Vec2> path);

enum class Phase { exploratory, guided, done };
std::string to_string(Phase p);

// World-frame estimate tagged with its source and whether that source passed
// credential verification.
struct TrackedEstimate {
  DirectionEstimate estimate;
  MacAddress source{0};
  bool verified{false};
};

struct MissionState {
  Phase phase{Phase::exploratory};
  Vec3 position;  // ENU
  Attitude attitude;
  std::deque<Vec2> waypoints;
  std::deque<DirectionEstimate> history;
  std::deque<Vec3> history_origin;  // drone position when each history entry was taken
  std::optional<Vec2> final_fix;
  double clock{0.0};
  std::optional<double> guided_since;
  std::optional<double> done_at;
  std::optional<MacAddress> locked_source;
  bool sweep_complete{false};
};

// Drone placed at the first waypoint at cruise altitude.
MissionState start_mission(const SearchConfig& cfg, const std::vector<Vec2>& waypoints);

struct MotionCommand {
  Vec3 velocity_enu;
  bool hover{true};
};

// One control step. Estimates must already be world-frame (see apply_attitude).
MotionCommand mission_step(MissionState& st, const SearchConfig& cfg, std::span<const TrackedEstimate> new_estimates,
                           double dt);

struct SmoothedDirection {
  Direction direction;
  double elevation_deg;
};

// Score-weighted mean of the last `window` estimates scoring >= gate; falls back
// to the best-scoring estimate when none pass. Empty history yields nothing.
std::optional<SmoothedDirection> smooth_direction(const std::deque<DirectionEstimate>& history, std::size_t window,
                                                  double score_gate);

struct GroundSmoothed {
  SmoothedDirection from_here;
  Vec2 ground_point;
};

// Each bearing is intersected with the ground plane from the position it was taken at
// (elevations below 5 degrees are clamped there); the score-weighted mean ground point
// is then viewed from `here`. Same window and gate rules as smooth_direction.
std::optional<GroundSmoothed> smooth_ground_point(const std::deque<DirectionEstimate>& history,
                                                  const std::deque<Vec3>& origins, const Vec3& here,
                                                  std::size_t window, double score_gate);

bool stop_check(double elevation_deg, const SearchConfig& cfg);

// Horizontal offset bound implied by the stop threshold: altitude / tan(threshold).
double stop_radius_m(const SearchConfig& cfg);

// Body-frame estimate to world frame; score and timestamp unchanged.
DirectionEstimate apply_attitude(const DirectionEstimate& raw, const Attitude& att);

}  // namespace lensar
