#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lensar/geometry.hpp"
#include "lensar/search_mission.hpp"
#include "lensar/trace.hpp"

namespace lensar {

struct PrSample {
  Direction estimated;
  Direction truth;
};

struct PrStats {
  std::size_t n{0};
  double med_pr{0.0};           // lower median for even counts
  double med_pr_midpoint{0.0};  // mean of the two middle values, for comparison
  double median_error_deg{0.0};     // arccos of med_pr
  double median_of_errors_deg{0.0};  // lower median of the per-sample errors
  double p80_error_deg{0.0};    // nearest rank
  double mean_pr{0.0};
  double ambiguous_fraction{0.0};  // PR <= 0
  std::string median_convention{"lower"};
};

// Lower median (element n/2 - 1 for even n when sorted ascending). Throws on empty input.
double lower_median(std::vector<double> values);
double midpoint_median(std::vector<double> values);
// Nearest-rank percentile, q in (0, 100].
double percentile_nearest_rank(std::vector<double> values, double q);

PrStats compute_pr_stats(std::span<const double> prs);
PrStats compute_pr_stats(std::span<const PrSample> samples);

// Percentile bootstrap interval for the median.
std::pair<double, double> bootstrap_median_ci(std::span<const double> values, double level, std::size_t resamples,
                                              std::uint64_t seed);

struct TargetLatency {
  std::string target;
  std::optional<double> latency_s;
  std::string reason;  // "not-discovered" when latency is absent
  std::optional<double> range_entry_t;
  std::optional<double> association_t;
};

// Association time minus range-entry time per target. Targets come from the
// scenario header plus any target named in range_entry/associate events.
// An association without a preceding range entry is a TraceError.
std::vector<TargetLatency> discovery_latency(std::span<const TraceEvent> trace);

// Horizontal (2-D) distance, altitude ignored.
double localization_error(const Vec2& fix, const Vec3& truth);
double localization_error(const Vec3& fix, const Vec3& truth);

double success_rate(std::size_t discovered, std::size_t total);

struct SummaryStats {
  std::size_t n{0};
  double mean{0.0};
  double median{0.0};
  double min{0.0};
  double max{0.0};
};

SummaryStats summarize(std::span<const double> values);

struct MetricsReport {
  std::optional<PrStats> pr;
  std::size_t n_targets{0};
  std::size_t n_discovered{0};
  std::size_t n_discovered_exploratory{0};
  double exploratory_success_rate{0.0};
  std::optional<double> contour_range_m;
  std::optional<SummaryStats> discovery_range_m;
  std::optional<SummaryStats> discovery_latency_s;
  std::vector<TargetLatency> per_target_latency;
  std::optional<double> localization_error_m;
  std::optional<double> sweep_time_s;
  std::optional<double> mission_time_s;
  // Per-snapshot processing latency; filled by bench only so that simulation output stays reproducible.
  std::optional<SummaryStats> processing_latency_ms;
};

// Everything the report needs is carried by the trace, so a replayed trace
// yields the same report as the live run.
MetricsReport compute_metrics(std::span<const TraceEvent> trace);

nlohmann::json to_json(const PrStats& s);
nlohmann::json to_json(const SummaryStats& s);
nlohmann::json to_json(const MetricsReport& r);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& r);

}  // namespace lensar
