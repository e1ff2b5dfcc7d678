#include "lensar/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "lensar/errors.hpp"

namespace lensar {

json to_json(const TraceEvent& e) {
  json j = e.data.is_object() ? e.data : json::object();
  j["t"] = e.t;
  j["type"] = e.type;
  return j;
}

TraceEvent trace_event_from_json(const json& j) {
  if (!j.is_object() || !j.contains("t") || !j.contains("type")) throw ParseError("trace event needs 't' and 'type'");
  TraceEvent e;
  e.t = j.at("t").get<double>();
  e.type = j.at("type").get<std::string>();
  e.data = j;
  e.data.erase("t");
  e.data.erase("type");
  return e;
}

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events) {
  for (const auto& e : events) os << to_json(e).dump() << '\n';
}

std::vector<TraceEvent> read_trace(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trace_event_from_json(json::parse(line)));
    } catch (const std::exception& ex) {
      throw ParseError("trace line " + std::to_string(n) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<TraceEvent> read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace " + path.string());
  return read_trace(in);
}

json to_json(const SnapshotKey& k) { return json{{"src", format_mac(k.source)}, {"sn", k.sn}}; }

SnapshotKey snapshot_key_from_json(const json& j) {
  SnapshotKey k;
  k.source = parse_mac(j.at("src").get<std::string>());
  const int sn = j.at("sn").get<int>();
  if (sn < 0 || sn >= kSequenceModulus) throw ParseError("sequence number out of range");
  k.sn = static_cast<std::uint16_t>(sn);
  return k;
}

json to_json(const RssSnapshot& s) {
  json mask = json::array();
  for (bool b : s.valid) mask.push_back(b);
  return json{{"key", to_json(s.key)}, {"rss", s.rss},   {"mask", mask},
              {"time", s.capture_time}, {"finalized_at", s.finalized_at}, {"complete", s.complete}};
}

RssSnapshot snapshot_from_json(const json& j) {
  RssSnapshot s;
  s.key = snapshot_key_from_json(j.at("key"));
  s.rss = j.at("rss").get<std::vector<double>>();
  if (j.contains("mask")) {
    for (const auto& b : j.at("mask")) s.valid.push_back(b.get<bool>());
  } else {
    s.valid.assign(s.rss.size(), true);
  }
  if (s.valid.size() != s.rss.size()) throw ParseError("snapshot: mask length differs from rss length");
  s.capture_time = j.at("time").get<double>();
  s.finalized_at = j.value("finalized_at", s.capture_time);
  s.complete = j.value("complete", s.n_valid() == s.rss.size());
  return s;
}

json to_json(const NicReport& r) {
  return json{{"nic", r.nic_id}, {"key", to_json(r.key)}, {"rss", r.rss}, {"arrival", r.arrival_time}};
}

NicReport nic_report_from_json(const json& j) {
  NicReport r;
  r.nic_id = j.at("nic").get<std::size_t>();
  r.key = snapshot_key_from_json(j.at("key"));
  r.rss = j.at("rss").get<std::vector<double>>();
  r.arrival_time = j.at("arrival").get<double>();
  return r;
}

json to_json(const DirectionEstimate& e) {
  return json{{"theta_deg", rad2deg(e.angles.theta)},
              {"phi_deg", rad2deg(e.angles.phi)},
              {"dir", {e.direction.x(), e.direction.y(), e.direction.z()}},
              {"score", e.score},
              {"n_valid", e.n_valid},
              {"time", e.timestamp},
              {"grid_index", e.grid_index}};
}

std::string snapshot_line(const RssSnapshot& s) { return to_json(s).dump(); }

std::vector<RssSnapshot> read_snapshots(std::istream& is) {
  std::vector<RssSnapshot> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(snapshot_from_json(json::parse(line)));
    } catch (const std::exception& ex) {
      throw ParseError("snapshot line " + std::to_string(n) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace lensar
