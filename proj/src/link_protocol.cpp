#include "lensar/link_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "lensar/errors.hpp"

namespace lensar {

std::string format_mac(MacAddress mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", static_cast<unsigned>((mac >> 40) & 0xff),
                static_cast<unsigned>((mac >> 32) & 0xff), static_cast<unsigned>((mac >> 24) & 0xff),
                static_cast<unsigned>((mac >> 16) & 0xff), static_cast<unsigned>((mac >> 8) & 0xff),
                static_cast<unsigned>(mac & 0xff));
  return buf;
}

MacAddress parse_mac(const std::string& text) {
  unsigned b[6];
  char tail = 0;
  if (std::sscanf(text.c_str(), "%2x:%2x:%2x:%2x:%2x:%2x%c", &b[0], &b[1], &b[2], &b[3], &b[4], &b[5], &tail) != 6)
    throw ParseError("bad MAC address '" + text + "'");
  MacAddress m = 0;
  for (unsigned v : b) m = (m << 8) | v;
  return m;
}

MacAddress random_mac(Rng& rng) {
  MacAddress m = rng() & 0xffffffffffffULL;
  // Locally administered, unicast.
  m |= 0x020000000000ULL;
  m &= ~0x010000000000ULL;
  return m;
}

void ApConfig::assign_default_bssids() {
  if (!bssids.empty()) return;
  for (std::size_t k = 0; k < n_nics; ++k) bssids.push_back(0x02a0c0de0000ULL + k);
}

void ApConfig::validate(std::size_t layout_n) const {
  if (ssid.empty()) throw ConfigError("ap: empty SSID");
  if (n_nics == 0 || antennas_per_nic == 0) throw ConfigError("ap: need at least one NIC and one antenna per NIC");
  if (n_nics * antennas_per_nic != layout_n)
    throw ConfigError("ap: n_nics * antennas_per_nic = " + std::to_string(n_nics * antennas_per_nic) +
                      " but the layout has " + std::to_string(layout_n) + " antennas");
  if (!(beacon_interval_s > 0.0)) throw ConfigError("ap: beacon interval must be > 0");
  if (bssids.size() != n_nics) throw ConfigError("ap: need one BSSID per NIC");
  const std::set<MacAddress> unique(bssids.begin(), bssids.end());
  if (unique.size() != bssids.size()) throw ConfigError("ap: BSSIDs must be distinct");
}

std::vector<double> beacon_times(const ApConfig& cfg, double horizon_s) {
  if (!(horizon_s > 0.0)) throw DomainError("beacon_times: horizon must be > 0");
  if (!(cfg.beacon_interval_s > 0.0)) throw ConfigError("beacon_times: interval must be > 0");
  std::vector<double> t;
  for (std::size_t k = 0;; ++k) {
    const double tk = static_cast<double>(k) * cfg.beacon_interval_s;
    if (tk >= horizon_s - 1e-12 * horizon_s) break;
    t.push_back(tk);
  }
  if (t.empty()) t.push_back(0.0);
  return t;
}

std::string to_string(DeviceMode m) {
  switch (m) {
    case DeviceMode::active: return "active";
    case DeviceMode::idle: return "idle";
    case DeviceMode::power_saving: return "power_saving";
  }
  return "?";
}

DeviceMode parse_device_mode(const std::string& s) {
  if (s == "active") return DeviceMode::active;
  if (s == "idle") return DeviceMode::idle;
  if (s == "power_saving") return DeviceMode::power_saving;
  throw ConfigError("unknown device mode '" + s + "' (expected active, idle or power_saving)");
}

double DeviceTiming::scan_median(DeviceMode m) const {
  switch (m) {
    case DeviceMode::active: return scan_median_active_s;
    case DeviceMode::idle: return scan_median_idle_s;
    case DeviceMode::power_saving: return scan_median_power_saving_s;
  }
  return scan_median_idle_s;
}

void DeviceModel::reset(std::uint64_t seed, double start_time) {
  rng.seed(seed);
  state = DeviceState::disconnected;
  session_address = 0;
  scans = 0;
  last_step = -1e300;
  last_heard = start_time;
  const double median = timing.scan_median(mode);
  if (timing.policy == ScanPolicy::fixed)
    next_scan = start_time + std::uniform_real_distribution<double>(0.0, median)(rng);
  else
    next_scan = start_time + draw_scan_interval();
}

std::uint16_t DeviceModel::take_sn() {
  const std::uint16_t sn = sn_counter;
  sn_counter = static_cast<std::uint16_t>((sn_counter + 1) % kSequenceModulus);
  return sn;
}

double DeviceModel::draw_scan_interval() {
  const double median = timing.scan_median(mode);
  if (timing.policy == ScanPolicy::fixed) return median;
  // Exponential with the given median: rate = ln 2 / median.
  double dt = 0.0;
  while (!(dt > 0.0)) dt = std::exponential_distribution<double>(std::log(2.0) / median)(rng);
  return dt;
}

std::string to_string(DeviceEventKind k) {
  switch (k) {
    case DeviceEventKind::scan: return "scan";
    case DeviceEventKind::associate: return "associate";
    case DeviceEventKind::verify: return "verify";
    case DeviceEventKind::mpdu: return "mpdu";
    case DeviceEventKind::disconnect: return "disconnect";
  }
  return "?";
}

bool verify_credential(const DeviceModel& dev, const ApConfig& cfg) {
  return dev.saved.ssid == cfg.ssid && dev.saved.credential == cfg.credential;
}

std::vector<DeviceEvent> device_step(DeviceModel& dev, double now, const std::optional<AudibleBeacon>& beacon) {
  if (now < dev.last_step) throw DomainError("device_step: time went backwards");
  dev.last_step = now;
  std::vector<DeviceEvent> ev;
  const bool heard = beacon && beacon->ap && beacon->rx_dbm >= dev.sensitivity_dbm && beacon->ap->ssid == dev.saved.ssid;

  if (dev.state == DeviceState::connected) {
    if (heard) dev.last_heard = now;
    if (now - dev.last_heard > dev.timing.loss_timeout_s) {
      ev.push_back({DeviceEventKind::disconnect, now, dev.session_address, 0, true});
      dev.state = DeviceState::disconnected;
      if (dev.next_scan <= now) dev.next_scan = now + dev.draw_scan_interval();
    } else if (dev.timing.keepalive_hz > 0.0) {
      while (dev.next_keepalive <= now) {
        ev.push_back({DeviceEventKind::mpdu, now, dev.session_address, dev.take_sn(), true});
        dev.next_keepalive += 1.0 / dev.timing.keepalive_hz;
      }
    }
  }

  if (dev.state == DeviceState::disconnected && now >= dev.next_scan) {
    ev.push_back({DeviceEventKind::scan, now, random_mac(dev.rng), 0, true});
    ++dev.scans;
    dev.next_scan = now + dev.draw_scan_interval();
    if (heard) {
      dev.session_address = random_mac(dev.rng);
      ev.push_back({DeviceEventKind::associate, now, dev.session_address, 0, true});
      const bool ok = verify_credential(dev, *beacon->ap);
      ev.push_back({DeviceEventKind::verify, now, dev.session_address, 0, ok});
      if (ok) {
        dev.state = DeviceState::connected;
        dev.last_heard = now;
        const std::size_t n = dev.timing.burst_frames;
        for (std::size_t k = 0; k < n; ++k) {
          const double t = now + dev.timing.burst_duration_s * static_cast<double>(k) / static_cast<double>(n);
          ev.push_back({DeviceEventKind::mpdu, t, dev.session_address, dev.take_sn(), true});
        }
        dev.next_keepalive = now + dev.timing.burst_duration_s +
                             (dev.timing.keepalive_hz > 0.0 ? 1.0 / dev.timing.keepalive_hz : 0.0);
      } else {
        dev.state = DeviceState::non_target;
      }
    }
  }
  return ev;
}

Aggregator::Aggregator(AggregatorConfig cfg) : cfg_(cfg) {
  if (cfg_.n_nics == 0 || cfg_.antennas_per_nic == 0) throw ConfigError("aggregator: need NICs and antennas");
  if (!(cfg_.timeout_s > 0.0)) throw ConfigError("aggregator: timeout must be > 0");
}

RssSnapshot Aggregator::finalize(const SnapshotKey& key, const Entry& e, bool complete) const {
  RssSnapshot s;
  s.key = key;
  s.capture_time = e.first_arrival;
  s.finalized_at = complete ? e.last_arrival : e.first_arrival + cfg_.timeout_s;
  s.complete = complete;
  const std::size_t n = cfg_.n_nics * cfg_.antennas_per_nic;
  s.rss.assign(n, cfg_.placeholder_dbm);
  s.valid.assign(n, false);
  for (std::size_t nic = 0; nic < cfg_.n_nics; ++nic) {
    if (!e.per_nic[nic]) continue;
    for (std::size_t a = 0; a < cfg_.antennas_per_nic; ++a) {
      s.rss[nic * cfg_.antennas_per_nic + a] = (*e.per_nic[nic])[a];
      s.valid[nic * cfg_.antennas_per_nic + a] = true;
    }
  }
  return s;
}

std::optional<RssSnapshot> Aggregator::ingest(const NicReport& r) {
  if (r.nic_id >= cfg_.n_nics) throw DomainError("aggregator: NIC id " + std::to_string(r.nic_id) + " out of range");
  if (r.rss.size() != cfg_.antennas_per_nic)
    throw DomainError("aggregator: report carries " + std::to_string(r.rss.size()) + " RSS values, expected " +
                      std::to_string(cfg_.antennas_per_nic));
  std::lock_guard lock(mu_);
  if (finalized_.count(r.key)) {
    events_.push_back({AggregatorEventKind::late_report, r.key, r.nic_id, r.arrival_time});
    return std::nullopt;
  }
  auto it = buffer_.find(r.key);
  if (it == buffer_.end()) {
    Entry e{r.arrival_time, r.arrival_time, std::vector<std::optional<std::vector<double>>>(cfg_.n_nics), 0};
    it = buffer_.emplace(r.key, std::move(e)).first;
  } else if (r.arrival_time > it->second.first_arrival + cfg_.timeout_s) {
    events_.push_back({AggregatorEventKind::late_report, r.key, r.nic_id, r.arrival_time});
    return std::nullopt;
  }
  Entry& e = it->second;
  if (e.per_nic[r.nic_id]) {
    events_.push_back({AggregatorEventKind::duplicate_report, r.key, r.nic_id, r.arrival_time});
    return std::nullopt;
  }
  e.per_nic[r.nic_id] = r.rss;
  e.last_arrival = std::max(e.last_arrival, r.arrival_time);
  ++e.received;
  if (e.received < cfg_.n_nics) return std::nullopt;
  RssSnapshot s = finalize(r.key, e, true);
  finalized_[r.key] = s.finalized_at;
  buffer_.erase(it);
  return s;
}

std::vector<RssSnapshot> Aggregator::poll(double now) {
  std::lock_guard lock(mu_);
  if (now < last_poll_) throw DomainError("aggregator: poll time went backwards");
  last_poll_ = now;
  std::vector<std::pair<double, SnapshotKey>> due;
  for (const auto& [key, e] : buffer_)
    if (e.first_arrival + cfg_.timeout_s <= now) due.emplace_back(e.first_arrival, key);
  std::sort(due.begin(), due.end());
  std::vector<RssSnapshot> out;
  out.reserve(due.size());
  for (const auto& [t, key] : due) {
    auto it = buffer_.find(key);
    out.push_back(finalize(key, it->second, false));
    finalized_[key] = out.back().finalized_at;
    buffer_.erase(it);
  }
  for (auto it = finalized_.begin(); it != finalized_.end();)
    it = it->second + cfg_.retention_s < now ? finalized_.erase(it) : std::next(it);
  return out;
}

std::optional<double> Aggregator::next_deadline() const {
  std::lock_guard lock(mu_);
  std::optional<double> best;
  for (const auto& [key, e] : buffer_) {
    const double d = e.first_arrival + cfg_.timeout_s;
    if (!best || d < *best) best = d;
  }
  return best;
}

std::vector<AggregatorEvent> Aggregator::drain_events() {
  std::lock_guard lock(mu_);
  return std::exchange(events_, {});
}

std::size_t Aggregator::pending() const {
  std::lock_guard lock(mu_);
  return buffer_.size();
}

}  // namespace lensar
