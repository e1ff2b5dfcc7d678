#include "lensar/aoa_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "lensar/errors.hpp"
#include "lensar/random.hpp"

namespace lensar {

std::size_t RssSnapshot::n_valid() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

std::vector<double> demean(std::span<const double> values, const std::vector<bool>& mask) {
  if (mask.size() != values.size()) throw DomainError("demean: mask length differs from value length");
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (mask[i]) {
      ++n;
      sum += values[i];
    }
  if (n < 2) throw InsufficientDataError("demean: need at least 2 valid entries");
  const double dn = static_cast<double>(n);
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (mask[i]) out[i] = (dn * values[i] - sum) / dn;
  return out;
}

DirectionEstimate estimate(const Manifold& manifold, const RssSnapshot& snap, const EstimatorOptions& opts) {
  const std::size_t n_ant = manifold.n_antennas();
  if (snap.rss.size() != n_ant || snap.valid.size() != n_ant)
    throw DomainError("estimate: snapshot has " + std::to_string(snap.rss.size()) + " entries, manifold expects " +
                      std::to_string(n_ant));
  const std::size_t n_valid = snap.n_valid();
  if (n_valid < std::max<std::size_t>(opts.k_min, 2))
    throw InsufficientDataError("estimate: " + std::to_string(n_valid) + " valid entries, need " +
                                std::to_string(std::max<std::size_t>(opts.k_min, 2)));

  const bool use_all = opts.policy == MaskPolicy::placeholder_as_data || n_valid == n_ant;
  const std::vector<bool> mask = use_all ? std::vector<bool>(n_ant, true) : snap.valid;
  const std::vector<double> y = demean(snap.rss, mask);
  double yy = 0.0;
  for (double v : y) yy += v * v;
  const double y_norm = std::sqrt(yy);
  if (!(y_norm > 0.0)) throw NoSignalError("estimate: observation is flat across antennas");

  const std::size_t n_dir = manifold.n_directions();
  std::size_t best = n_dir;
  double best_score = -std::numeric_limits<double>::infinity();

  if (use_all) {
    for (std::size_t idx = 0; idx < n_dir; ++idx) {
      if (manifold.degenerate(idx)) continue;
      const auto s = manifold.unit(idx);
      double acc = 0.0;
      for (std::size_t k = 0; k < n_ant; ++k) acc += s[k] * y[k];
      if (acc > best_score) {
        best_score = acc;
        best = idx;
      }
    }
  } else {
    const double dn = static_cast<double>(n_valid);
    for (std::size_t idx = 0; idx < n_dir; ++idx) {
      const auto s = manifold.raw(idx);
      double sum = 0.0;
      for (std::size_t k = 0; k < n_ant; ++k)
        if (mask[k]) sum += s[k];
      double dotv = 0.0, ss = 0.0;
      for (std::size_t k = 0; k < n_ant; ++k)
        if (mask[k]) {
          const double c = (dn * s[k] - sum) / dn;
          dotv += c * y[k];
          ss += c * c;
        }
      const double nrm = std::sqrt(ss);
      if (nrm < Manifold::kDegenerateNorm) continue;
      const double score = dotv / nrm;
      if (score > best_score) {
        best_score = score;
        best = idx;
      }
    }
  }
  if (best == n_dir) throw NoSignalError("estimate: masked template is degenerate over the whole grid");

  DirectionEstimate e;
  e.grid_index = best;
  e.angles = manifold.angles(best);
  e.direction = dir_from_angles(e.angles);
  e.score = std::clamp(best_score / y_norm, -1.0, 1.0);
  e.n_valid = n_valid;
  e.timestamp = snap.capture_time;
  return e;
}

std::vector<EstimateResult> estimate_batch(const Manifold& manifold, std::span<const RssSnapshot> snaps,
                                           const EstimatorOptions& opts, unsigned workers) {
  std::vector<EstimateResult> out(snaps.size());
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      try {
        out[k].estimate = estimate(manifold, snaps[k], opts);
      } catch (const Error& ex) {
        out[k].error = ex.what();
      }
    }
  };
  unsigned w = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  w = static_cast<unsigned>(std::min<std::size_t>(w, snaps.size()));
  if (w <= 1) {
    run(0, snaps.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (snaps.size() + w - 1) / w;
  for (unsigned k = 0; k < w; ++k) {
    const std::size_t b = k * chunk, e = std::min(snaps.size(), b + chunk);
    if (b < e) pool.emplace_back(run, b, e);
  }
  for (auto& th : pool) th.join();
  return out;
}

namespace {

RssSnapshot noiseless_snapshot(const Manifold& m, std::size_t idx) {
  RssSnapshot s;
  const auto raw = m.raw(idx);
  s.rss.assign(raw.begin(), raw.end());
  s.valid.assign(raw.size(), true);
  s.complete = true;
  return s;
}

}  // namespace

IdentifiabilityReport identifiability(const Manifold& manifold, double max_theta_deg, double tolerance_deg) {
  IdentifiabilityReport r;
  for (std::size_t idx = 0; idx < manifold.n_directions(); ++idx) {
    const HemisphereAngles truth = manifold.angles(idx);
    if (rad2deg(truth.theta) > max_theta_deg + 1e-9) continue;
    ++r.checked;
    const Direction td = manifold.direction(idx);
    try {
      const DirectionEstimate e = estimate(manifold, noiseless_snapshot(manifold, idx));
      const double err = rad2deg(angular_distance(e.direction, td));
      if (err > tolerance_deg) r.failures.push_back({idx, truth, e.angles, err});
    } catch (const Error&) {
      r.failures.push_back({idx, truth, {}, 180.0});
    }
  }
  return r;
}

ObjectiveComparison compare_objectives(const Manifold& manifold, double sigma_db, std::uint64_t seed,
                                       std::size_t stride) {
  ObjectiveComparison c;
  const std::size_t n_ant = manifold.n_antennas();
  c.min_template_norm = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < manifold.n_directions(); ++idx) {
    if (manifold.degenerate(idx)) continue;
    c.min_template_norm = std::min(c.min_template_norm, manifold.centered_norm(idx));
    c.max_template_norm = std::max(c.max_template_norm, manifold.centered_norm(idx));
  }
  Rng rng = make_rng(seed, 0x0b1ec7);
  std::normal_distribution<double> noise(0.0, sigma_db);
  double total = 0.0;
  for (std::size_t truth = 0; truth < manifold.n_directions(); truth += std::max<std::size_t>(stride, 1)) {
    RssSnapshot snap = noiseless_snapshot(manifold, truth);
    for (auto& v : snap.rss) v += sigma_db > 0.0 ? noise(rng) : 0.0;
    std::vector<double> y;
    try {
      y = demean(snap.rss, snap.valid);
    } catch (const Error&) {
      continue;
    }
    double yy = 0.0;
    for (double v : y) yy += v * v;
    if (!(yy > 0.0)) continue;
    std::size_t best_ls = 0, best_corr = 0;
    double ls_min = std::numeric_limits<double>::infinity(), corr_max = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < manifold.n_directions(); ++idx) {
      if (manifold.degenerate(idx)) continue;
      const auto unit = manifold.unit(idx);
      const double nrm = manifold.centered_norm(idx);
      double resid = 0.0, dotv = 0.0;
      for (std::size_t k = 0; k < n_ant; ++k) {
        const double s = unit[k] * nrm;
        resid += (y[k] - s) * (y[k] - s);
        dotv += unit[k] * y[k];
      }
      if (resid < ls_min) {
        ls_min = resid;
        best_ls = idx;
      }
      if (dotv > corr_max) {
        corr_max = dotv;
        best_corr = idx;
      }
    }
    ++c.trials;
    const double d = rad2deg(angular_distance(manifold.direction(best_ls), manifold.direction(best_corr)));
    if (best_ls != best_corr && d > 0.0) ++c.disagreements;
    c.max_disagreement_deg = std::max(c.max_disagreement_deg, d);
    total += d;
  }
  c.mean_disagreement_deg = c.trials ? total / static_cast<double>(c.trials) : 0.0;
  if (!std::isfinite(c.min_template_norm)) c.min_template_norm = 0.0;
  return c;
}

}  // namespace lensar
