#include "lensar/bench.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "lensar/aoa_estimator.hpp"
#include "lensar/link_protocol.hpp"
#include "lensar/metrics_report.hpp"
#include "lensar/random.hpp"

namespace lensar {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<double> noisy_snapshot(const BeamTemplate& beam, const AntennaLayout& layout, Rng& rng) {
  std::uniform_real_distribution<double> th(5.0, 85.0), ph(-180.0, 180.0);
  std::normal_distribution<double> noise(0.0, 2.0);
  const auto dir = dir_from_angles({deg2rad(th(rng)), deg2rad(ph(rng))});
  auto v = sample_template(beam, layout, dir);
  for (auto& x : v) x = std::round(x - 70.0 + noise(rng));
  return v;
}

}  // namespace

BenchResult run_bench(const BeamTemplate& beam, const AntennaLayout& layout, const BenchConfig& cfg) {
  BenchResult r;
  const auto t_build = Clock::now();
  const Manifold m = build_manifold(beam, layout, cfg.resolution_deg);
  r.build_ms = ms_since(t_build);
  r.n_directions = m.n_directions();

  Rng rng = make_rng(cfg.seed, 42);
  std::vector<double> lat;
  lat.reserve(cfg.snapshots);
  for (std::size_t i = 0; i < cfg.warmup + cfg.snapshots; ++i) {
    RssSnapshot s;
    s.rss = noisy_snapshot(beam, layout, rng);
    s.valid.assign(s.rss.size(), true);
    s.complete = true;
    const auto t0 = Clock::now();
    const auto e = estimate(m, s);
    const double dt = ms_since(t0);
    r.last_score = e.score;
    if (i >= cfg.warmup) lat.push_back(dt);
  }
  if (!lat.empty()) {
    r.samples = lat.size();
    r.median_ms = lower_median(lat);
    r.p95_ms = percentile_nearest_rank(lat, 95.0);
    r.mean_ms = summarize(lat).mean;
  }

  if (cfg.streams == 0 || cfg.per_stream == 0) return r;

  // Interleaved reports: every stream sends one MPDU per round, every NIC reports it.
  const std::size_t n_nics = layout.size() / 2;
  AggregatorConfig ac;
  ac.n_nics = n_nics;
  ac.antennas_per_nic = 2;
  Aggregator agg(ac);
  std::vector<NicReport> reports;
  for (std::size_t round = 0; round < cfg.per_stream; ++round) {
    for (std::size_t sidx = 0; sidx < cfg.streams; ++sidx) {
      const auto v = noisy_snapshot(beam, layout, rng);
      const SnapshotKey key{0x020000000000ULL + sidx, static_cast<std::uint16_t>(round)};
      for (std::size_t nic = 0; nic < n_nics; ++nic) {
        reports.push_back({nic, key, {v[2 * nic], v[2 * nic + 1]}, static_cast<double>(round) * 0.01});
      }
    }
  }

  std::mutex mu;
  std::condition_variable cv;
  std::deque<RssSnapshot> queue;
  bool closed = false;
  std::size_t done = 0;
  const unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());

  const auto t0 = Clock::now();
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        RssSnapshot s;
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] { return closed || !queue.empty(); });
          if (queue.empty()) return;
          s = std::move(queue.front());
          queue.pop_front();
        }
        (void)estimate(m, s);
        std::lock_guard lock(mu);
        ++done;
      }
    });
  }
  for (const auto& rep : reports) {
    if (auto s = agg.ingest(rep)) {
      std::lock_guard lock(mu);
      queue.push_back(std::move(*s));
      cv.notify_one();
    }
  }
  {
    std::lock_guard lock(mu);
    closed = true;
  }
  cv.notify_all();
  for (auto& th : pool) th.join();
  const double secs = ms_since(t0) / 1000.0;
  r.throughput_snapshots = done;
  r.throughput_hz = secs > 0.0 ? static_cast<double>(done) / secs : 0.0;
  return r;
}

nlohmann::json to_json(const BenchResult& r) {
  return nlohmann::json{{"n_directions", r.n_directions}, {"samples", r.samples},
                        {"median_ms", r.median_ms},       {"p95_ms", r.p95_ms},
                        {"mean_ms", r.mean_ms},           {"manifold_build_ms", r.build_ms},
                        {"throughput_snapshots", r.throughput_snapshots},
                        {"throughput_hz", r.throughput_hz}};
}

}  // namespace lensar
