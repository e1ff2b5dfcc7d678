#include <doctest.h>

#include <sstream>

#include "lensar/errors.hpp"
#include "lensar/simulator.hpp"

using namespace lensar;

namespace {

std::string message_of(const std::string& text) {
  try {
    (void)parse_scenario(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"({
  "seed": 5,
  "search": {"aoi": {"x_min": 0, "y_min": 0, "x_max": 200, "y_max": 200}, "operational_range_m": 60},
  "channel": {"path_loss_exponent": 2.8, "per_antenna_sigma_db": 1.0},
  "targets": [{"id": "V", "position": [120, 90, 0], "mode": "active"},
              {"id": "B", "position": [40, 150], "mode": "active",
               "saved_network": {"ssid": "HomeNet", "credential": "wrong"}}],
  "estimator": {"resolution_deg": 2},
  "sim": {"max_duration_s": 900}
})";

}  // namespace

TEST_CASE("config diagnostics") {
  CHECK(message_of("{\n  \"seed\": 1,\n  \"search\": {\n    \"speed_mps\": ,\n  }\n}").find("line 4") != std::string::npos);
  CHECK(message_of(R"({"search": {"sped_mps": 2}})").find("search.sped_mps") != std::string::npos);
  CHECK(message_of(R"({"channel": {"path_loss_exponent": "high"}})").find("channel.path_loss_exponent") !=
        std::string::npos);
  CHECK(message_of(R"({"targets": [{"id": "a", "position": [1, 2, 0], "mode": "sleepy"}]})").find("targets[0].mode") !=
        std::string::npos);
  CHECK(message_of(R"({"targets": [{"id": "a"}]})").find("targets[0].position") != std::string::npos);
  CHECK(message_of(R"({"template": {"file": "/nonexistent/beam.csv"}})").find("does not exist") != std::string::npos);
  CHECK(message_of(R"({"channel": {"path_loss_exponent": 9}})").find("channel") != std::string::npos);
  CHECK_THROWS_AS(parse_scenario(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("{"), ParseError);
  CHECK_NOTHROW(parse_scenario("{}"));
  CHECK_FALSE(parse_scenario("{}").seed.has_value());
  CHECK_THROWS_AS(load_scenario("/nonexistent.json"), ConfigError);
}

TEST_CASE("random target placement is seeded") {
  const auto s = parse_scenario(R"({"random_targets": {"count": 6, "modes": ["active", "idle"], "margin_m": 10}})");
  const auto a = resolve_targets(s, 1), b = resolve_targets(s, 1), c = resolve_targets(s, 2);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].position.x >= 10.0);
    CHECK(a[i].position.x <= 390.0);
    CHECK(a[i].mode == (i % 2 ? DeviceMode::idle : DeviceMode::active));
  }
  CHECK_FALSE(a[0].position == c[0].position);
}

TEST_CASE("simulation is deterministic and replayable") {
  const auto s = parse_scenario(kSmall);
  const auto ctx = make_context(s);
  const auto a = simulate(s, 5, ctx);
  const auto b = simulate(s, 5, ctx);
  std::ostringstream ta, tb;
  write_trace(ta, a.trace);
  write_trace(tb, b.trace);
  CHECK(ta.str() == tb.str());
  REQUIRE(a.status == RunStatus::fix);
  CHECK(a.fix_target == std::optional<std::string>("V"));
  CHECK(*a.fix_error_m < 15.0);
  CHECK(a.metrics.n_targets == 1);  // the bystander is not a target

  // Bystander associated but never verified.
  bool bystander_failed = false;
  for (const auto& e : a.trace)
    if (e.type == "verify" && e.data["target"] == "B") bystander_failed = !e.data["ok"].get<bool>();
  CHECK(bystander_failed);

  // Re-aggregating the recorded NIC reports reproduces the snapshot stream byte for byte.
  std::vector<NicReport> reports;
  std::vector<std::string> recorded;
  for (const auto& e : a.trace) {
    if (e.type == "nic_report") reports.push_back(nic_report_from_json(e.data));
    if (e.type == "snapshot") recorded.push_back(snapshot_line(snapshot_from_json(e.data)));
  }
  const auto replayed = replay_reports(reports, s.aggregator, a.end_time);
  REQUIRE(replayed.size() == recorded.size());
  for (std::size_t i = 0; i < replayed.size(); ++i) CHECK(snapshot_line(replayed[i]) == recorded[i]);

  // Offline estimation of the extracted snapshots matches the in-run estimates.
  std::ostringstream snaps;
  for (const auto& sn : a.snapshots) snaps << snapshot_line(sn) << '\n';
  std::istringstream in(snaps.str());
  const auto parsed = read_snapshots(in);
  const auto offline = estimate_batch(ctx->manifold, parsed, s.estimator);
  REQUIRE(offline.size() == a.estimates.size());
  for (std::size_t i = 0; i < offline.size(); ++i)
    CHECK(estimate_line(parsed[i].key, offline[i]) == estimate_line(a.snapshots[i].key, a.estimates[i]));

  // Metrics from the serialized trace equal the live metrics.
  std::istringstream tin(ta.str());
  CHECK(to_json(compute_metrics(read_trace(tin))) == to_json(a.metrics));
}

TEST_CASE("guided-only run starting in range") {
  auto s = parse_scenario(kSmall);
  s.sim.start = Vec2{150, 60};
  s.targets.pop_back();
  const auto out = simulate(s, 9);
  CHECK(out.status == RunStatus::fix);
  REQUIRE(out.fix_error_m.has_value());
  CHECK(*out.fix_error_m <= 60.0 / std::tan(deg2rad(80.0)) + 2.0);
}

TEST_CASE("unreachable target ends as not found") {
  auto s = parse_scenario(kSmall);
  s.targets.pop_back();
  s.targets[0].position = {5000, 5000, 0};
  const auto out = simulate(s, 3);
  CHECK(out.status == RunStatus::not_found);
  CHECK_FALSE(out.fix.has_value());
  CHECK(out.metrics.n_discovered == 0);
  REQUIRE(out.metrics.per_target_latency.size() == 1);
  CHECK(out.metrics.per_target_latency[0].reason == "not-discovered");
}

TEST_CASE("manifest hash follows the config") {
  const auto a = parse_scenario(kSmall);
  const auto b = parse_scenario(R"({"seed": 6})");
  CHECK(run_manifest(a, 1)["config_hash"] == run_manifest(a, 1)["config_hash"]);
  CHECK(run_manifest(a, 1)["config_hash"] != run_manifest(b, 1)["config_hash"]);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
