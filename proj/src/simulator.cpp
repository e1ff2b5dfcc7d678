#include "lensar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "lensar/errors.hpp"
#include "lensar/random.hpp"

namespace lensar {

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

struct Device {
  TargetSpec spec;
  DeviceModel model;
  bool is_target{false};
  double contour_m{0.0};
  Rng downlink_rng;
  Rng uplink_rng;
  bool entered{false};
  bool discovered{false};
};

struct PendingMpdu {
  double time;
  std::size_t device;
  MacAddress address;
  std::uint16_t sn;
};

double quantize(double v, double q) { return q > 0.0 ? q * std::round(v / q) : v; }

// Unit vector from the drone to `p`, NED.
Vec3 los_ned(const Vec3& drone_enu, const Vec3& p_enu) { return enu_to_ned(p_enu - drone_enu); }

bool report_before(const NicReport& a, const NicReport& b) {
  if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
  if (a.nic_id != b.nic_id) return a.nic_id < b.nic_id;
  return a.key < b.key;
}

bool snapshot_before(const RssSnapshot& a, const RssSnapshot& b) {
  if (a.finalized_at != b.finalized_at) return a.finalized_at < b.finalized_at;
  return a.key < b.key;
}

}  // namespace

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::fix: return "fix";
    case RunStatus::sweep_complete: return "sweep_complete";
    case RunStatus::not_found: return "not_found";
    case RunStatus::timeout: return "timeout";
  }
  return "unknown";
}

std::shared_ptr<const SimContext> make_context(const Scenario& s) {
  BeamTemplate beam = load_beam(s.beam);
  AntennaLayout layout = load_layout(s.layout);
  Manifold m = build_manifold(beam, layout, s.manifold_resolution_deg);
  return std::make_shared<const SimContext>(SimContext{std::move(beam), std::move(layout), std::move(m)});
}

std::vector<RssSnapshot> replay_reports(std::vector<NicReport> reports, const AggregatorConfig& cfg, double end_time) {
  std::stable_sort(reports.begin(), reports.end(), report_before);
  Aggregator agg(cfg);
  std::vector<RssSnapshot> out;
  auto take = [&](std::vector<RssSnapshot> v) {
    for (auto& s : v) out.push_back(std::move(s));
  };
  for (const auto& r : reports) {
    if (r.arrival_time > end_time) break;
    take(agg.poll(r.arrival_time));
    if (auto s = agg.ingest(r)) out.push_back(std::move(*s));
  }
  take(agg.poll(end_time));
  std::stable_sort(out.begin(), out.end(), snapshot_before);
  return out;
}

std::string estimate_line(const SnapshotKey& key, const EstimateResult& r) {
  json j{{"key", to_json(key)}};
  if (r.estimate) {
    const auto& e = *r.estimate;
    j["theta_deg"] = rad2deg(e.angles.theta);
    j["phi_deg"] = rad2deg(e.angles.phi);
    j["score"] = e.score;
    j["n_valid"] = e.n_valid;
    j["time"] = e.timestamp;
    j["grid_index"] = e.grid_index;
  } else {
    j["error"] = r.error;
  }
  return j.dump();
}

SimulationOutput simulate(const Scenario& s, std::uint64_t seed, std::shared_ptr<const SimContext> ctx) {
  s.validate();
  if (!ctx) ctx = make_context(s);
  const Manifold& manifold = ctx->manifold;
  const BeamTemplate& beam = ctx->beam;
  const AntennaLayout& layout = ctx->layout;

  ApConfig ap = s.ap;
  ap.assign_default_bssids();
  ap.validate(layout.size());
  AggregatorConfig agg_cfg = s.aggregator;
  agg_cfg.n_nics = ap.n_nics;
  agg_cfg.antennas_per_nic = ap.antennas_per_nic;
  Aggregator agg(agg_cfg);
  const ChannelParams& ch = s.channel;

  const double tick = ap.beacon_interval_s;
  const double steps_per_mission = s.sim.mission_step_s / tick;
  const auto mission_every = static_cast<long>(std::llround(steps_per_mission));
  if (mission_every < 1 || std::abs(steps_per_mission - static_cast<double>(mission_every)) > 1e-9)
    throw ConfigError("sim.mission_step_s: must be a multiple of ap.beacon_interval_s");

  SimulationOutput out;
  out.seed = seed;
  out.targets = resolve_targets(s, seed);
  auto emit = [&](double t, const std::string& type, json data = json::object()) {
    out.trace.push_back({t, type, std::move(data)});
  };

  const double lens_peak = beam.peak_dbi();
  std::vector<Device> devices;
  devices.reserve(out.targets.size());
  for (std::size_t i = 0; i < out.targets.size(); ++i) {
    Device d;
    d.spec = out.targets[i];
    d.model.id = d.spec.id;
    d.model.position = d.spec.position;
    d.model.mode = d.spec.mode;
    d.model.timing = s.timing;
    d.model.sensitivity_dbm = d.spec.sensitivity_dbm;
    d.model.saved = d.spec.saved;
    d.model.reset(derive_seed(seed, 100 + i), 0.0);
    d.is_target = verify_credential(d.model, ap);
    d.downlink_rng = make_rng(seed, 1000 + i);
    d.uplink_rng = make_rng(seed, 2000 + i);
    const double up = iso_rss_range_m(d.spec.tx_power_dbm + d.spec.antenna_gain_dbi, lens_peak,
                                      ch.decode_sensitivity_dbm, ch);
    const double down = iso_rss_range_m(ap.tx_power_dbm + lens_peak, d.spec.antenna_gain_dbi, d.spec.sensitivity_dbm, ch);
    d.contour_m = std::min(up, down);
    devices.push_back(std::move(d));
  }

  Rng jitter_rng = make_rng(seed, 7);
  Rng attitude_rng = make_rng(seed, 8);
  Rng gps_rng = make_rng(seed, 9);
  std::uniform_real_distribution<double> jitter(0.0, s.sim.nic_jitter_s);

  std::vector<Vec2> waypoints = s.sim.start ? std::vector<Vec2>{*s.sim.start} : plan_zigzag(s.search);
  MissionState st = start_mission(s.search, waypoints);

  {
    json targets = json::array();
    double contour = 0.0;
    bool any = false;
    for (const auto& d : devices) {
      targets.push_back({{"id", d.spec.id},
                         {"role", d.is_target ? "target" : "bystander"},
                         {"mode", to_string(d.spec.mode)},
                         {"position", vec_json(d.spec.position)},
                         {"contour_m", d.contour_m}});
      if (d.is_target) {
        contour = any ? std::min(contour, d.contour_m) : d.contour_m;
        any = true;
      }
    }
    json h{{"seed", seed}, {"targets", targets}, {"waypoints", json::array()}, {"version", kVersion}};
    for (const auto& w : waypoints) h["waypoints"].push_back({w.x, w.y});
    if (any) h["contour_m"] = contour;
    h["sweep_length_m"] = path_length(waypoints);
    emit(0.0, "scenario", std::move(h));
    emit(0.0, "phase", {{"phase", to_string(st.phase)}});
  }

  std::map<MacAddress, std::size_t> session_owner;
  std::vector<PendingMpdu> mpdus;
  std::vector<NicReport> reports;
  std::map<SnapshotKey, Vec3> truth_by_key;  // world NED line of sight at transmit time
  std::vector<TrackedEstimate> pending;
  std::optional<DirectionEstimate> last_world;

  out.trajectory.push_back({0.0, st.position, st.phase, std::nullopt});

  auto body_dir = [&](const Vec3& ned) { return world_to_body(Direction::from_vector(ned), st.attitude); };

  const long max_ticks = static_cast<long>(std::floor(s.sim.max_duration_s / tick + 1e-9));
  bool finished = false;
  double t = 0.0;
  for (long k = 0; k <= max_ticks && !finished; ++k) {
    t = static_cast<double>(k) * tick;

    // Beacons and client state machines.
    if (s.sim.trace_beacons) emit(t, "beacon", {{"ssid", ap.ssid}, {"n_bssids", ap.bssids.size()}});
    for (std::size_t i = 0; i < devices.size(); ++i) {
      Device& d = devices[i];
      const Vec3 los = los_ned(st.position, d.spec.position);
      const double dist = norm(los);
      if (!d.entered && dist <= d.contour_m && d.is_target) {
        d.entered = true;
        emit(t, "range_entry", {{"target", d.spec.id}, {"distance_m", dist}});
      }
      const auto resp = array_response(beam, layout, body_dir(los).vec());
      const double lens_gain = *std::max_element(resp.begin(), resp.end());
      RadioEndpoint apx{st.position, ap.tx_power_dbm, lens_gain};
      const double mean = mean_rx_dbm(apx, d.spec.antenna_gain_dbi, dist, ch).dbm;
      const double rx = sample_rx_dbm(mean, ch, d.downlink_rng);
      std::optional<AudibleBeacon> heard;
      if (rx >= d.spec.sensitivity_dbm) heard = AudibleBeacon{rx, &ap};

      for (const auto& ev : device_step(d.model, t, heard)) {
        switch (ev.kind) {
          case DeviceEventKind::scan:
            emit(ev.time, "scan", {{"target", d.spec.id}, {"address", format_mac(ev.address)}});
            break;
          case DeviceEventKind::associate:
            if (!d.is_target) {
              emit(ev.time, "associate",
                   {{"target", d.spec.id}, {"role", "bystander"}, {"address", format_mac(ev.address)},
                    {"phase", to_string(st.phase)}, {"distance_m", dist}});
              break;
            }
            if (!d.entered) {
              // Decoded beyond the mean contour; the entry is the association itself.
              d.entered = true;
              emit(ev.time, "range_entry", {{"target", d.spec.id}, {"distance_m", dist}});
            }
            session_owner[ev.address] = i;
            emit(ev.time, "associate",
                 {{"target", d.spec.id}, {"role", "target"}, {"address", format_mac(ev.address)},
                  {"phase", to_string(st.phase)}, {"distance_m", dist}});
            d.discovered = true;
            break;
          case DeviceEventKind::verify:
            emit(ev.time, "verify", {{"target", d.spec.id}, {"address", format_mac(ev.address)}, {"ok", ev.ok}});
            break;
          case DeviceEventKind::mpdu:
            mpdus.push_back({ev.time, i, ev.address, ev.sn});
            break;
          case DeviceEventKind::disconnect:
            emit(ev.time, "disconnect", {{"target", d.spec.id}, {"address", format_mac(ev.address)}});
            break;
        }
      }
    }

    // Uplink frames due by now, heard by every monitor interface that decodes them.
    std::stable_sort(mpdus.begin(), mpdus.end(), [](const PendingMpdu& a, const PendingMpdu& b) { return a.time < b.time; });
    std::size_t used = 0;
    for (; used < mpdus.size() && mpdus[used].time <= t + 1e-12; ++used) {
      const PendingMpdu& m = mpdus[used];
      Device& d = devices[m.device];
      const Vec3 los = los_ned(st.position, d.spec.position);
      const double dist = norm(los);
      const auto resp = array_response(beam, layout, body_dir(los).vec());
      RadioEndpoint tx{d.spec.position, d.spec.tx_power_dbm, d.spec.antenna_gain_dbi};
      std::vector<double> means(resp.size());
      for (std::size_t a = 0; a < resp.size(); ++a) means[a] = mean_rx_dbm(tx, resp[a], dist, ch).dbm;
      const auto rx = sample_rx_vector(means, ch, d.uplink_rng);
      const SnapshotKey key{m.address, m.sn};
      emit(m.time, "mpdu", {{"target", d.spec.id}, {"key", to_json(key)}});
      bool any = false;
      for (std::size_t nic = 0; nic < ap.n_nics; ++nic) {
        NicReport r;
        r.nic_id = nic;
        r.key = key;
        double best = -1e300;
        for (std::size_t a = 0; a < ap.antennas_per_nic; ++a) {
          const double v = rx[nic * ap.antennas_per_nic + a];
          best = std::max(best, v);
          r.rss.push_back(quantize(v, s.sim.rss_resolution_db));
        }
        const double j = jitter(jitter_rng);
        if (!decode(best, ch)) continue;
        r.arrival_time = m.time + j;
        reports.push_back(std::move(r));
        any = true;
      }
      if (any) truth_by_key[key] = los;
    }
    mpdus.erase(mpdus.begin(), mpdus.begin() + static_cast<std::ptrdiff_t>(used));

    // Aggregation.
    std::stable_sort(reports.begin(), reports.end(), report_before);
    std::vector<RssSnapshot> snaps;
    std::size_t consumed = 0;
    for (; consumed < reports.size() && reports[consumed].arrival_time <= t; ++consumed) {
      const NicReport& r = reports[consumed];
      for (auto& sn : agg.poll(r.arrival_time)) snaps.push_back(std::move(sn));
      if (s.sim.trace_nic_reports) emit(r.arrival_time, "nic_report", to_json(r));
      if (auto sn = agg.ingest(r)) snaps.push_back(std::move(*sn));
    }
    reports.erase(reports.begin(), reports.begin() + static_cast<std::ptrdiff_t>(consumed));
    for (auto& sn : agg.poll(t)) snaps.push_back(std::move(sn));
    for (const auto& ev : agg.drain_events()) {
      emit(ev.time, ev.kind == AggregatorEventKind::duplicate_report ? "duplicate_report" : "late_report",
           {{"key", to_json(ev.key)}, {"nic", ev.nic_id}});
    }
    std::stable_sort(snaps.begin(), snaps.end(), snapshot_before);

    // Direction finding.
    for (auto& snap : snaps) {
      emit(snap.finalized_at, "snapshot", to_json(snap));
      EstimateResult res;
      try {
        res.estimate = estimate(manifold, snap, s.estimator);
      } catch (const Error& e) {
        res.error = e.what();
      }
      out.snapshots.push_back(snap);
      out.estimates.push_back(res);
      const auto owner = session_owner.find(snap.key.source);
      const auto truth = truth_by_key.find(snap.key);
      if (!res.estimate) {
        emit(snap.finalized_at, "estimate_error", {{"key", to_json(snap.key)}, {"error", res.error}});
      } else {
        Attitude believed = st.attitude;
        if (s.sim.attitude_sigma_deg > 0.0) {
          std::normal_distribution<double> n(0.0, deg2rad(s.sim.attitude_sigma_deg));
          believed.roll += n(attitude_rng);
          believed.pitch += n(attitude_rng);
          believed.yaw += n(attitude_rng);
        }
        const DirectionEstimate world = apply_attitude(*res.estimate, believed);
        json e = to_json(world);
        e["key"] = to_json(snap.key);
        e["body_theta_deg"] = rad2deg(res.estimate->angles.theta);
        e["body_phi_deg"] = rad2deg(res.estimate->angles.phi);
        if (owner != session_owner.end()) e["target"] = devices[owner->second].spec.id;
        if (truth != truth_by_key.end()) e["truth"] = vec_json(Direction::from_vector(truth->second).vec());
        emit(snap.finalized_at, "estimate", std::move(e));
        const bool verified =
            owner != session_owner.end() && devices[owner->second].model.state == DeviceState::connected;
        pending.push_back({world, snap.key.source, verified});
      }
      if (truth != truth_by_key.end()) truth_by_key.erase(truth);
    }

    // Mission control at its own cadence.
    if (k > 0 && k % mission_every == 0) {
      const Phase before = st.phase;
      const bool swept_before = st.sweep_complete;
      if (!pending.empty()) last_world = pending.back().estimate;
      mission_step(st, s.search, pending, s.sim.mission_step_s);
      pending.clear();
      out.trajectory.push_back({t, st.position, st.phase, last_world});
      if (st.phase != before) {
        json p{{"phase", to_string(st.phase)}, {"from", to_string(before)}};
        if (st.locked_source) {
          p["source"] = format_mac(*st.locked_source);
          if (auto o = session_owner.find(*st.locked_source); o != session_owner.end())
            p["target"] = devices[o->second].spec.id;
        }
        emit(t, "phase", std::move(p));
      }
      if (st.sweep_complete && !swept_before) emit(t, "sweep_complete", {{"path_m", path_length(waypoints)}});

      if (st.phase == Phase::done) {
        Vec2 fix = *st.final_fix;
        if (s.sim.gps_sigma_m > 0.0) {
          std::normal_distribution<double> n(0.0, s.sim.gps_sigma_m);
          fix.x += n(gps_rng);
          fix.y += n(gps_rng);
        }
        out.fix = fix;
        json f{{"fix", {fix.x, fix.y}}};
        if (auto o = session_owner.find(*st.locked_source); o != session_owner.end()) {
          const auto& d = devices[o->second];
          out.fix_target = d.spec.id;
          out.fix_error_m = localization_error(fix, d.spec.position);
          f["target"] = d.spec.id;
          f["truth"] = vec_json(d.spec.position);
          f["error_m"] = *out.fix_error_m;
        }
        emit(t, "fix", std::move(f));
        out.status = RunStatus::fix;
        finished = true;
      } else if (st.sweep_complete && st.phase == Phase::exploratory && !s.sim.start) {
        out.status = s.search.guided_enabled ? RunStatus::not_found : RunStatus::sweep_complete;
        finished = true;
      }
    }
  }
  out.end_time = t;
  emit(t, "mission_end", {{"status", to_string(out.status)}});
  std::stable_sort(out.trace.begin(), out.trace.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.t < b.t; });

  out.metrics = compute_metrics(out.trace);

  json rep{{"status", to_string(out.status)}, {"seed", seed}, {"end_time_s", out.end_time}};
  rep["fix"] = out.fix ? json{out.fix->x, out.fix->y} : json(nullptr);
  rep["fix_target"] = out.fix_target ? json(*out.fix_target) : json(nullptr);
  rep["fix_error_m"] = out.fix_error_m ? json(*out.fix_error_m) : json(nullptr);
  const double guided_start = st.guided_since.value_or(out.end_time);
  rep["phase_elapsed_s"] = {{"exploratory", guided_start},
                            {"guided", st.guided_since ? st.done_at.value_or(out.end_time) - *st.guided_since : 0.0}};
  json disc = json::object();
  for (const auto& l : out.metrics.per_target_latency) {
    disc[l.target] = l.association_t ? json(*l.association_t) : json(nullptr);
  }
  rep["discovered_at_s"] = std::move(disc);
  out.report = std::move(rep);
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json run_manifest(const Scenario& s, std::uint64_t seed) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(s.source.dump());
  return json{{"config_hash", "fnv1a64:" + hash.str()},
              {"seed", seed},
              {"lensar_version", kVersion},
              {"compiler", __VERSION__},
              {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"config", s.source}};
}

void write_outputs(const SimulationOutput& out, const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(std::string("cannot write ") + (dir / name).string());
    return f;
  };
  {
    auto f = open("trajectory.csv");
    f << "t_s,x_m,y_m,z_m,phase,est_theta_deg,est_phi_deg,score\n" << std::setprecision(10);
    for (const auto& r : out.trajectory) {
      f << r.t << ',' << r.position.x << ',' << r.position.y << ',' << r.position.z << ',' << to_string(r.phase) << ',';
      if (r.estimate) {
        f << rad2deg(r.estimate->angles.theta) << ',' << rad2deg(r.estimate->angles.phi) << ',' << r.estimate->score;
      } else {
        f << ",,";
      }
      f << '\n';
    }
  }
  {
    auto f = open("trace.jsonl");
    write_trace(f, out.trace);
  }
  {
    auto f = open("snapshots.jsonl");
    for (const auto& sn : out.snapshots) f << snapshot_line(sn) << '\n';
  }
  {
    auto f = open("estimates.jsonl");
    for (std::size_t i = 0; i < out.snapshots.size(); ++i) f << estimate_line(out.snapshots[i].key, out.estimates[i]) << '\n';
  }
  {
    auto f = open("metrics.json");
    f << to_json(out.metrics).dump(2) << '\n';
  }
  {
    auto f = open("metrics.csv");
    f << metrics_csv_header() << '\n' << metrics_csv_row(out.metrics) << '\n';
  }
  {
    auto f = open("report.json");
    f << out.report.dump(2) << '\n';
  }
  {
    auto f = open("manifest.json");
    f << run_manifest(s, out.seed).dump(2) << '\n';
  }
}

}  // namespace lensar
