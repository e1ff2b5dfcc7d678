#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lensar/metrics_report.hpp"
#include "lensar/scenario.hpp"
#include "lensar/trace.hpp"

namespace lensar {

inline constexpr const char* kVersion = "0.3.1";

// Template, layout and manifold built once and shared by repeated runs.
struct SimContext {
  BeamTemplate beam;
  AntennaLayout layout;
  Manifold manifold;
};

std::shared_ptr<const SimContext> make_context(const Scenario& s);

struct TrajectoryRow {
  double t;
  Vec3 position;
  Phase phase;
  std::optional<DirectionEstimate> estimate;  // world frame, latest consumed this step
};

enum class RunStatus { fix, sweep_complete, not_found, timeout };
std::string to_string(RunStatus s);

struct SimulationOutput {
  std::uint64_t seed{0};
  RunStatus status{RunStatus::timeout};
  std::vector<TraceEvent> trace;
  std::vector<TrajectoryRow> trajectory;
  std::vector<RssSnapshot> snapshots;
  std::vector<SnapshotKey> estimate_keys;
  std::vector<EstimateResult> estimates;  // body frame, parallel to `snapshots`
  std::vector<TargetSpec> targets;
  MetricsReport metrics;
  std::optional<Vec2> fix;
  std::optional<std::string> fix_target;
  std::optional<double> fix_error_m;
  double end_time{0.0};
  nlohmann::json report;
};

// One deterministic event loop. Identical scenario and seed give identical output.
SimulationOutput simulate(const Scenario& s, std::uint64_t seed, std::shared_ptr<const SimContext> ctx = nullptr);

// Feeds recorded NIC reports through a fresh aggregator in arrival order and
// returns the snapshots finalized at or before `end_time`, ordered by (finalized_at, key).
std::vector<RssSnapshot> replay_reports(std::vector<NicReport> reports, const AggregatorConfig& cfg, double end_time);

// Compact JSONL line for an estimate keyed by its snapshot; shared with `lensar estimate`.
std::string estimate_line(const SnapshotKey& key, const EstimateResult& r);

std::uint64_t fnv1a64(const std::string& bytes);
nlohmann::json run_manifest(const Scenario& s, std::uint64_t seed);

// trajectory.csv, trace.jsonl, snapshots.jsonl, estimates.jsonl, metrics.json,
// metrics.csv, report.json and manifest.json.
void write_outputs(const SimulationOutput& out, const Scenario& s, const std::filesystem::path& dir);

}  // namespace lensar
