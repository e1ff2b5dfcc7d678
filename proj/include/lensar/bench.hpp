#pragma once

#include <cstdint>
#include <cstddef>

#include <json.hpp>

#include "lensar/antenna_array.hpp"
#include "lensar/lens_model.hpp"

namespace lensar {

struct BenchConfig {
  double resolution_deg{1.0};
  std::size_t snapshots{200};
  std::size_t warmup{10};
  std::size_t streams{7};
  // Snapshots per stream in the throughput run.
  std::size_t per_stream{20};
  unsigned workers{0};  // estimator threads in the throughput run; 0 = hardware concurrency
  std::uint64_t seed{1};
};

struct BenchResult {
  std::size_t n_directions{0};
  std::size_t samples{0};
  double median_ms{0.0};
  double p95_ms{0.0};
  double mean_ms{0.0};
  double build_ms{0.0};
  std::size_t throughput_snapshots{0};
  double throughput_hz{0.0};
  double last_score{0.0};
};

// Times estimate() on a warm manifold, then pushes interleaved NIC reports for
// `streams` sources through an aggregator and a pool of estimator threads.
BenchResult run_bench(const BeamTemplate& beam, const AntennaLayout& layout, const BenchConfig& cfg);

nlohmann::json to_json(const BenchResult& r);

}  // namespace lensar
