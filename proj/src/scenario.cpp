#include "lensar/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lensar/errors.hpp"
#include "lensar/random.hpp"

namespace lensar {

using json = nlohmann::json;

namespace {

// Object view that remembers which keys were read so leftovers can be reported.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }

  Node child(const std::string& key) {
    used_.insert(key);
    return Node(j_.at(key), field(key));
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(field(k) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Vec3 read_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3))
    throw ConfigError(path + ": expected [x, y] or [x, y, z]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
  } catch (const json::exception&) {
    throw ConfigError(path + ": coordinates must be numbers");
  }
}

DeviceMode read_mode(const std::string& s, const std::string& path) {
  try {
    return parse_device_mode(s);
  } catch (const Error&) {
    throw ConfigError(path + ": unknown device mode '" + s + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

void read_search(Node n, SearchConfig& c) {
  if (n.has("aoi")) {
    Node a = n.child("aoi");
    a.get("x_min", c.aoi.x_min);
    a.get("y_min", c.aoi.y_min);
    a.get("x_max", c.aoi.x_max);
    a.get("y_max", c.aoi.y_max);
    a.finish();
  }
  n.get("operational_range_m", c.operational_range_m);
  n.get("altitude_m", c.altitude_m);
  n.get("speed_mps", c.speed_mps);
  n.get("stop_elevation_deg", c.stop_elevation_deg);
  n.get("smoothing_window", c.smoothing_window);
  n.get("score_gate", c.score_gate);
  n.get("guided_enabled", c.guided_enabled);
  if (n.has("legs")) {
    std::string legs;
    n.get("legs", legs);
    try {
      c.legs = parse_leg_layout(legs);
    } catch (const Error&) {
      throw ConfigError(n.field("legs") + ": unknown leg layout '" + legs + "'");
    }
  }
  n.finish();
}

void read_channel(Node n, ChannelParams& c) {
  n.get("frequency_hz", c.frequency_hz);
  n.get("path_loss_exponent", c.path_loss_exponent);
  n.get("reference_distance_m", c.reference_distance_m);
  n.get("shadowing_sigma_db", c.shadowing_sigma_db);
  n.get("per_antenna_sigma_db", c.per_antenna_sigma_db);
  n.get("canopy_loss_db", c.canopy_loss_db);
  n.get("noise_floor_dbm", c.noise_floor_dbm);
  n.get("decode_sensitivity_dbm", c.decode_sensitivity_dbm);
  n.finish();
}

void read_ap(Node n, ApConfig& c) {
  n.get("ssid", c.ssid);
  n.get("credential", c.credential);
  n.get("n_nics", c.n_nics);
  n.get("antennas_per_nic", c.antennas_per_nic);
  n.get("beacon_interval_s", c.beacon_interval_s);
  n.get("tx_power_dbm", c.tx_power_dbm);
  if (n.has("bssids")) {
    std::vector<std::string> macs;
    n.get("bssids", macs);
    for (const auto& m : macs) {
      try {
        c.bssids.push_back(parse_mac(m));
      } catch (const Error&) {
        throw ConfigError(n.field("bssids") + ": bad address '" + m + "'");
      }
    }
  }
  n.finish();
}

void read_timing(Node n, DeviceTiming& t) {
  n.get("scan_median_active_s", t.scan_median_active_s);
  n.get("scan_median_idle_s", t.scan_median_idle_s);
  n.get("scan_median_power_saving_s", t.scan_median_power_saving_s);
  if (n.has("policy")) {
    std::string p;
    n.get("policy", p);
    if (p == "exponential") {
      t.policy = ScanPolicy::exponential;
    } else if (p == "fixed") {
      t.policy = ScanPolicy::fixed;
    } else {
      throw ConfigError(n.field("policy") + ": expected 'exponential' or 'fixed'");
    }
  }
  n.get("burst_frames", t.burst_frames);
  n.get("burst_duration_s", t.burst_duration_s);
  n.get("keepalive_hz", t.keepalive_hz);
  n.get("loss_timeout_s", t.loss_timeout_s);
  n.finish();
}

TargetSpec read_target(Node n, std::size_t idx) {
  TargetSpec t;
  t.id = "T" + std::to_string(idx + 1);
  n.get("id", t.id);
  if (!n.has("position")) throw ConfigError(n.field("position") + ": required");
  t.position = read_vec3(n.raw("position"), n.field("position"));
  if (n.has("mode")) {
    std::string m;
    n.get("mode", m);
    t.mode = read_mode(m, n.field("mode"));
  }
  if (n.has("saved_network")) {
    Node s = n.child("saved_network");
    s.get("ssid", t.saved.ssid);
    s.get("credential", t.saved.credential);
    s.finish();
  }
  n.get("tx_power_dbm", t.tx_power_dbm);
  n.get("antenna_gain_dbi", t.antenna_gain_dbi);
  n.get("sensitivity_dbm", t.sensitivity_dbm);
  n.finish();
  return t;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }

  Scenario s;
  s.source = doc;
  Node root(doc, "");
  root.get("seed", s.seed);
  if (root.has("search")) read_search(root.child("search"), s.search);
  if (root.has("channel")) read_channel(root.child("channel"), s.channel);
  if (root.has("ap")) read_ap(root.child("ap"), s.ap);
  if (root.has("device_timing")) read_timing(root.child("device_timing"), s.timing);
  if (root.has("aggregator")) {
    Node n = root.child("aggregator");
    n.get("timeout_s", s.aggregator.timeout_s);
    n.get("placeholder_dbm", s.aggregator.placeholder_dbm);
    n.get("retention_s", s.aggregator.retention_s);
    n.finish();
  }
  if (root.has("template")) {
    Node n = root.child("template");
    if (n.has("file")) {
      std::string f;
      n.get("file", f);
      s.beam.file = resolve(base_dir, f);
    }
    n.get("peak_dbi", s.beam.synth.peak_dbi);
    n.get("hpbw_deg", s.beam.synth.hpbw_deg);
    n.get("floor_dbi", s.beam.synth.floor_dbi);
    n.get("resolution_deg", s.beam.synth.resolution_deg);
    n.finish();
  }
  if (root.has("layout")) {
    Node n = root.child("layout");
    if (n.has("file")) {
      std::string f;
      n.get("file", f);
      s.layout.file = resolve(base_dir, f);
    }
    n.get("ring60_phase_deg", s.layout.ring60_phase_deg);
    n.get("ring30_phase_deg", s.layout.ring30_phase_deg);
    n.finish();
  }
  if (root.has("estimator")) {
    Node n = root.child("estimator");
    n.get("resolution_deg", s.manifold_resolution_deg);
    n.get("k_min", s.estimator.k_min);
    if (n.has("mask_policy")) {
      std::string p;
      n.get("mask_policy", p);
      if (p == "exclude") {
        s.estimator.policy = MaskPolicy::exclude;
      } else if (p == "placeholder_as_data") {
        s.estimator.policy = MaskPolicy::placeholder_as_data;
      } else {
        throw ConfigError(n.field("mask_policy") + ": expected 'exclude' or 'placeholder_as_data'");
      }
    }
    n.finish();
  }
  if (root.has("targets")) {
    const json& arr = root.raw("targets");
    if (!arr.is_array()) throw ConfigError("targets: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.targets.push_back(read_target(Node(arr[i], "targets[" + std::to_string(i) + "]"), i));
    }
  }
  if (root.has("random_targets")) {
    Node n = root.child("random_targets");
    RandomTargets r;
    n.get("count", r.count);
    if (n.has("modes")) {
      std::vector<std::string> modes;
      n.get("modes", modes);
      r.modes.clear();
      for (const auto& m : modes) r.modes.push_back(read_mode(m, n.field("modes")));
      if (r.modes.empty()) throw ConfigError(n.field("modes") + ": must not be empty");
    }
    n.get("margin_m", r.margin_m);
    n.get("ground_z_m", r.ground_z_m);
    n.get("tx_power_dbm", r.tx_power_dbm);
    n.get("sensitivity_dbm", r.sensitivity_dbm);
    n.finish();
    s.random_targets = r;
  }
  if (root.has("sim")) {
    Node n = root.child("sim");
    n.get("mission_step_s", s.sim.mission_step_s);
    n.get("max_duration_s", s.sim.max_duration_s);
    n.get("nic_jitter_s", s.sim.nic_jitter_s);
    n.get("rss_resolution_db", s.sim.rss_resolution_db);
    n.get("attitude_sigma_deg", s.sim.attitude_sigma_deg);
    n.get("gps_sigma_m", s.sim.gps_sigma_m);
    n.get("trace_beacons", s.sim.trace_beacons);
    n.get("trace_nic_reports", s.sim.trace_nic_reports);
    if (n.has("start")) {
      const Vec3 p = read_vec3(n.raw("start"), n.field("start"));
      s.sim.start = Vec2{p.x, p.y};
    }
    n.finish();
  }
  root.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

void Scenario::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    } catch (const DomainError& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    }
  };
  wrap("search", [&] { search.validate(); });
  wrap("channel", [&] { channel.validate(); });
  wrap("template", [&] {
    if (beam.file) {
      if (!std::filesystem::exists(*beam.file)) throw ConfigError("file does not exist: " + beam.file->string());
    } else {
      beam.synth.validate();
    }
  });
  wrap("layout", [&] {
    if (layout.file && !std::filesystem::exists(*layout.file))
      throw ConfigError("file does not exist: " + layout.file->string());
  });
  if (!(manifold_resolution_deg > 0.0)) throw ConfigError("estimator.resolution_deg: must be > 0");
  if (estimator.k_min < 2) throw ConfigError("estimator.k_min: must be >= 2");
  if (!(aggregator.timeout_s > 0.0)) throw ConfigError("aggregator.timeout_s: must be > 0");
  if (!(ap.beacon_interval_s > 0.0)) throw ConfigError("ap.beacon_interval_s: must be > 0");
  if (ap.n_nics == 0 || ap.antennas_per_nic == 0) throw ConfigError("ap: need at least one NIC and antenna");
  if (!(sim.mission_step_s > 0.0)) throw ConfigError("sim.mission_step_s: must be > 0");
  if (!(sim.max_duration_s > 0.0)) throw ConfigError("sim.max_duration_s: must be > 0");
  if (sim.nic_jitter_s < 0.0 || sim.nic_jitter_s >= aggregator.timeout_s)
    throw ConfigError("sim.nic_jitter_s: must lie in [0, aggregator.timeout_s)");
  if (sim.rss_resolution_db < 0.0) throw ConfigError("sim.rss_resolution_db: must be >= 0");
  if (sim.attitude_sigma_deg < 0.0 || sim.gps_sigma_m < 0.0) throw ConfigError("sim: sigmas must be >= 0");
  if (timing.burst_frames == 0 || timing.loss_timeout_s <= 0.0) throw ConfigError("device_timing: invalid burst/timeout");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!ids.insert(targets[i].id).second) throw ConfigError("targets[" + std::to_string(i) + "].id: duplicate");
    if (targets[i].tx_power_dbm < -10.0 || targets[i].tx_power_dbm > 30.0)
      throw ConfigError("targets[" + std::to_string(i) + "].tx_power_dbm: outside [-10, 30]");
  }
  if (random_targets && random_targets->margin_m * 2.0 > std::min(search.aoi.width(), search.aoi.height()))
    throw ConfigError("random_targets.margin_m: larger than the AOI");
}

std::vector<TargetSpec> resolve_targets(const Scenario& s, std::uint64_t seed) {
  std::vector<TargetSpec> out = s.targets;
  for (auto& t : out) {
    if (t.saved.ssid.empty()) t.saved = {s.ap.ssid, s.ap.credential};
  }
  if (s.random_targets) {
    const auto& r = *s.random_targets;
    Rng rng = make_rng(seed, 0x7A26);
    std::uniform_real_distribution<double> ux(s.search.aoi.x_min + r.margin_m, s.search.aoi.x_max - r.margin_m);
    std::uniform_real_distribution<double> uy(s.search.aoi.y_min + r.margin_m, s.search.aoi.y_max - r.margin_m);
    for (std::size_t i = 0; i < r.count; ++i) {
      TargetSpec t;
      t.id = "R" + std::to_string(i + 1);
      const double x = ux(rng);
      const double y = uy(rng);
      t.position = {x, y, r.ground_z_m};
      t.mode = r.modes[i % r.modes.size()];
      t.saved = {s.ap.ssid, s.ap.credential};
      t.tx_power_dbm = r.tx_power_dbm;
      t.sensitivity_dbm = r.sensitivity_dbm;
      out.push_back(std::move(t));
    }
  }
  return out;
}

BeamTemplate load_beam(const TemplateSpec& spec) {
  if (spec.file) return import_template_file(*spec.file, spec.synth.resolution_deg);
  return synth_template(spec.synth);
}

AntennaLayout load_layout(const LayoutSpec& spec) {
  if (spec.file) {
    std::ifstream in(*spec.file);
    if (!in) throw ConfigError("cannot open layout " + spec.file->string());
    return read_layout_csv(in);
  }
  return default_layout(spec.ring60_phase_deg, spec.ring30_phase_deg);
}

}  // namespace lensar
