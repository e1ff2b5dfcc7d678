#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lensar/antenna_array.hpp"
#include "lensar/geometry.hpp"

namespace lensar {

using MacAddress = std::uint64_t;  // 48-bit

// MPDU identity: (source address, 12-bit sequence number).
struct SnapshotKey {
  MacAddress source{0};
  std::uint16_t sn{0};

  auto operator<=>(const SnapshotKey&) const = default;
};

// Per-packet RSS vector across all antennas, in dBm.
struct RssSnapshot {
  SnapshotKey key;
  std::vector<double> rss;
  std::vector<bool> valid;  // false: entry holds the placeholder value
  double capture_time{0.0};
  double finalized_at{0.0};
  bool complete{false};

  std::size_t n_valid() const;
};

struct DirectionEstimate {
  Direction direction;
  HemisphereAngles angles;
  double score{0.0};
  std::size_t n_valid{0};
  double timestamp{0.0};
  std::size_t grid_index{0};
};

// How placeholder entries reach the correlator.
enum class MaskPolicy {
  exclude,              // drop them and re-center/re-normalize the template over the same mask
  placeholder_as_data,  // correlate the placeholder values as if measured
};

struct EstimatorOptions {
  std::size_t k_min{4};
  MaskPolicy policy{MaskPolicy::exclude};
};

// Removes the mean of the valid entries; invalid entries come back as 0.
//
// Computed as (n * y_i - sum(y)) / n so that inputs sharing a dyadic quantum
// (integer dBm, quarter-dB, ...) yield bit-identical output after any constant
// offset on the same quantum. Throws InsufficientDataError with < 2 valid entries.
std::vector<double> demean(std::span<const double> values, const std::vector<bool>& mask);

// Grid direction maximizing the normalized correlation between the de-meaned
// snapshot and the de-meaned template. Ties go to the smallest grid index.
DirectionEstimate estimate(const Manifold& manifold, const RssSnapshot& snap, const EstimatorOptions& opts = {});

struct EstimateResult {
  std::optional<DirectionEstimate> estimate;
  std::string error;  // set when `estimate` is empty
};

// Order-preserving; per-snapshot failures are reported in place.
std::vector<EstimateResult> estimate_batch(const Manifold& manifold, std::span<const RssSnapshot> snaps,
                                           const EstimatorOptions& opts = {}, unsigned workers = 0);

// Grid directions whose own noiseless template vector does not estimate back
// within `tolerance_deg`.
struct IdentifiabilityFailure {
  std::size_t grid_index;
  HemisphereAngles truth;
  HemisphereAngles estimated;
  double error_deg;
};

struct IdentifiabilityReport {
  std::size_t checked{0};
  std::vector<IdentifiabilityFailure> failures;
};

IdentifiabilityReport identifiability(const Manifold& manifold, double max_theta_deg = 90.0,
                                      double tolerance_deg = 1.5);

// Compares argmin ||y~ - s~(u)||^2 with the normalized-correlation argmax on
// noisy observations drawn at every `stride`-th grid direction.
struct ObjectiveComparison {
  std::size_t trials{0};
  std::size_t disagreements{0};
  double max_disagreement_deg{0.0};
  double mean_disagreement_deg{0.0};
  double min_template_norm{0.0};
  double max_template_norm{0.0};
};

ObjectiveComparison compare_objectives(const Manifold& manifold, double sigma_db, std::uint64_t seed,
                                       std::size_t stride = 37);

}  // namespace lensar
