#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lensar/aoa_estimator.hpp"
#include "lensar/geometry.hpp"
#include "lensar/random.hpp"

namespace lensar {

std::string format_mac(MacAddress mac);
MacAddress parse_mac(const std::string& text);
// Random locally administered unicast address.
MacAddress random_mac(Rng& rng);

inline constexpr std::uint16_t kSequenceModulus = 4096;

// Beaconing ESS: one AP interface per NIC, shared SSID, distinct BSSIDs.
struct ApConfig {
  std::string ssid{"HomeNet"};
  std::string credential{"psk"};
  std::size_t n_nics{5};
  std::size_t antennas_per_nic{2};
  double beacon_interval_s{0.100};
  double tx_power_dbm{20.0};
  std::vector<MacAddress> bssids;

  // Fills `bssids` with consecutive addresses when empty.
  void assign_default_bssids();
  // Throws ConfigError unless n_nics * antennas_per_nic == layout_n and BSSIDs are distinct.
  void validate(std::size_t layout_n) const;
};

// Beacon transmit times k * interval for k * interval < horizon.
std::vector<double> beacon_times(const ApConfig& cfg, double horizon_s);

enum class DeviceMode { active, idle, power_saving };
enum class ScanPolicy { exponential, fixed };
enum class DeviceState { disconnected, connected, non_target };

std::string to_string(DeviceMode m);
DeviceMode parse_device_mode(const std::string& s);

struct DeviceTiming {
  double scan_median_active_s{9.0};
  double scan_median_idle_s{36.0};
  double scan_median_power_saving_s{165.0};
  ScanPolicy policy{ScanPolicy::exponential};
  std::size_t burst_frames{8};
  double burst_duration_s{0.200};
  double keepalive_hz{1.0};
  double loss_timeout_s{5.0};

  double scan_median(DeviceMode m) const;
};

struct SavedNetwork {
  std::string ssid;
  std::string credential;
};

// Victim or bystander Wi-Fi client. All stochastic choices come from `rng`.
struct DeviceModel {
  std::string id;
  Vec3 position;
  DeviceMode mode{DeviceMode::idle};
  DeviceTiming timing;
  double sensitivity_dbm{-90.0};
  SavedNetwork saved;
  std::uint16_t sn_counter{0};

  DeviceState state{DeviceState::disconnected};
  MacAddress session_address{0};
  double next_scan{0.0};
  double next_keepalive{0.0};
  double last_heard{0.0};
  double last_step{-1e300};
  std::size_t scans{0};
  Rng rng;

  // Seeds the stream and schedules the first scan after `start_time`.
  void reset(std::uint64_t seed, double start_time = 0.0);
  // Returns the current SN and advances the counter modulo 4096.
  std::uint16_t take_sn();
  double draw_scan_interval();
};

struct AudibleBeacon {
  double rx_dbm;
  const ApConfig* ap;
};

enum class DeviceEventKind { scan, associate, verify, mpdu, disconnect };

struct DeviceEvent {
  DeviceEventKind kind;
  double time;
  MacAddress address{0};
  std::uint16_t sn{0};
  bool ok{true};
};

std::string to_string(DeviceEventKind k);

// Abstract credential check standing in for the four-way handshake.
bool verify_credential(const DeviceModel& dev, const ApConfig& cfg);

// Advances the device to `now` (non-decreasing). `beacon` is the beacon heard at
// this instant, if any. Returns the events emitted, MPDU times may lie in the future.
std::vector<DeviceEvent> device_step(DeviceModel& dev, double now, const std::optional<AudibleBeacon>& beacon);

// RSS of one MPDU as reported by one monitor interface.
struct NicReport {
  std::size_t nic_id{0};
  SnapshotKey key;
  std::vector<double> rss;
  double arrival_time{0.0};
};

struct AggregatorConfig {
  std::size_t n_nics{5};
  std::size_t antennas_per_nic{2};
  double timeout_s{0.050};
  double placeholder_dbm{-100.0};
  // How long finalized keys are remembered to reject stragglers.
  double retention_s{2.0};
};

enum class AggregatorEventKind { duplicate_report, late_report };

struct AggregatorEvent {
  AggregatorEventKind kind;
  SnapshotKey key;
  std::size_t nic_id;
  double time;
};

// Keyed buffer assembling per-NIC reports into RSS snapshots.
//
// A key finalizes once: immediately when every NIC has reported, or on the
// first poll at or after first_arrival + timeout with placeholders for the
// missing NICs. Thread-safe; poll times must be non-decreasing.
class Aggregator {
 public:
  explicit Aggregator(AggregatorConfig cfg);

  std::optional<RssSnapshot> ingest(const NicReport& report);
  std::vector<RssSnapshot> poll(double now);
  std::optional<double> next_deadline() const;
  std::vector<AggregatorEvent> drain_events();
  std::size_t pending() const;
  const AggregatorConfig& config() const { return cfg_; }

 private:
  struct Entry {
    double first_arrival;
    double last_arrival;
    std::vector<std::optional<std::vector<double>>> per_nic;
    std::size_t received{0};
  };

  RssSnapshot finalize(const SnapshotKey& key, const Entry& e, bool complete) const;

  AggregatorConfig cfg_;
  mutable std::mutex mu_;
  std::map<SnapshotKey, Entry> buffer_;
  std::map<SnapshotKey, double> finalized_;
  std::vector<AggregatorEvent> events_;
  double last_poll_{-1e300};
};

}  // namespace lensar
