#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lensar/aoa_estimator.hpp"
#include "lensar/antenna_array.hpp"
#include "lensar/lens_model.hpp"
#include "lensar/link_protocol.hpp"
#include "lensar/rf_channel.hpp"
#include "lensar/search_mission.hpp"

namespace lensar {

struct TargetSpec {
  std::string id;
  Vec3 position;  // ENU meters
  DeviceMode mode{DeviceMode::idle};
  SavedNetwork saved;  // empty ssid: inherit the AP's network
  double tx_power_dbm{15.0};
  double antenna_gain_dbi{0.0};
  double sensitivity_dbm{-90.0};
};

// Seeded placement of `count` targets inside the AOI (optional margin from the edges).
struct RandomTargets {
  std::size_t count{0};
  std::vector<DeviceMode> modes{DeviceMode::idle};  // cycled over the generated targets
  double margin_m{0.0};
  double ground_z_m{0.0};
  double tx_power_dbm{15.0};
  double sensitivity_dbm{-90.0};
};

struct TemplateSpec {
  std::optional<std::filesystem::path> file;  // measured grid; synthetic lobe otherwise
  SynthParams synth;
};

struct LayoutSpec {
  std::optional<std::filesystem::path> file;
  double ring60_phase_deg{0.0};
  double ring30_phase_deg{0.0};
};

struct SimSettings {
  double mission_step_s{1.0};
  double max_duration_s{3600.0};
  double nic_jitter_s{0.004};
  double rss_resolution_db{1.0};  // 0 disables quantization
  double attitude_sigma_deg{0.0};
  double gps_sigma_m{0.0};
  bool trace_beacons{false};
  bool trace_nic_reports{true};
  // Start hovering here instead of sweeping (guided-only runs).
  std::optional<Vec2> start;
};

struct Scenario {
  std::optional<std::uint64_t> seed;
  SearchConfig search;
  ChannelParams channel;
  ApConfig ap;
  AggregatorConfig aggregator;
  DeviceTiming timing;
  TemplateSpec beam;
  LayoutSpec layout;
  double manifold_resolution_deg{1.0};
  EstimatorOptions estimator;
  std::vector<TargetSpec> targets;
  std::optional<RandomTargets> random_targets;
  SimSettings sim;
  nlohmann::json source;  // the document as read, for hashing into the run manifest

  // Cross-field checks; referenced files must exist.
  void validate() const;
};

// Unknown keys and type mismatches raise ConfigError naming the field path;
// JSON syntax errors raise ParseError with line and column.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Explicit targets followed by the seeded random ones.
std::vector<TargetSpec> resolve_targets(const Scenario& s, std::uint64_t seed);

BeamTemplate load_beam(const TemplateSpec& spec);
AntennaLayout load_layout(const LayoutSpec& spec);

}  // namespace lensar
