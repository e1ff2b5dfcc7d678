#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lensar/aoa_estimator.hpp"
#include "lensar/link_protocol.hpp"

namespace lensar {

using json = nlohmann::json;

// One line of the JSONL event trace: {"t": seconds, "type": ..., ...payload}.
struct TraceEvent {
  double t{0.0};
  std::string type;
  json data = json::object();
};

json to_json(const TraceEvent& e);
TraceEvent trace_event_from_json(const json& j);

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_trace(std::istream& is);
std::vector<TraceEvent> read_trace_file(const std::filesystem::path& path);

json to_json(const SnapshotKey& k);
SnapshotKey snapshot_key_from_json(const json& j);

// {"key":{"src":..,"sn":..},"rss":[..],"mask":[..],"time":..,"finalized_at":..,"complete":..}
json to_json(const RssSnapshot& s);
RssSnapshot snapshot_from_json(const json& j);

json to_json(const NicReport& r);
NicReport nic_report_from_json(const json& j);

json to_json(const DirectionEstimate& e);

// Compact one-line serialization; equal snapshots give equal strings.
std::string snapshot_line(const RssSnapshot& s);

// Reads snapshots from JSONL, one object per line; errors name the line.
std::vector<RssSnapshot> read_snapshots(std::istream& is);

}  // namespace lensar
