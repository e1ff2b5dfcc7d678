#include "lensar/metrics_report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "lensar/errors.hpp"
#include "lensar/random.hpp"

namespace lensar {

namespace {

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw TraceError("expected a 3-element vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw InsufficientDataError(std::string(what) + ": empty input");
}

}  // namespace

double lower_median(std::vector<double> values) {
  require_nonempty(values.size(), "median");
  const std::size_t k = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

double midpoint_median(std::vector<double> values) {
  require_nonempty(values.size(), "median");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double percentile_nearest_rank(std::vector<double> values, double q) {
  require_nonempty(values.size(), "percentile");
  if (!(q > 0.0 && q <= 100.0)) throw DomainError("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

PrStats compute_pr_stats(std::span<const double> prs) {
  require_nonempty(prs.size(), "compute_pr_stats");
  std::vector<double> pr(prs.begin(), prs.end());
  std::vector<double> err;
  err.reserve(pr.size());
  std::size_t ambiguous = 0;
  for (double& p : pr) {
    if (!std::isfinite(p)) throw DomainError("projection rate is not finite");
    p = std::clamp(p, -1.0, 1.0);
    err.push_back(rad2deg(std::acos(p)));
    if (p <= 0.0) ++ambiguous;
  }
  PrStats s;
  s.n = pr.size();
  s.med_pr = lower_median(pr);
  s.med_pr_midpoint = midpoint_median(pr);
  s.median_error_deg = rad2deg(std::acos(s.med_pr));
  s.median_of_errors_deg = lower_median(err);
  s.p80_error_deg = percentile_nearest_rank(err, 80.0);
  // Sorted sum keeps the mean independent of sample order.
  std::sort(pr.begin(), pr.end());
  s.mean_pr = std::accumulate(pr.begin(), pr.end(), 0.0) / static_cast<double>(pr.size());
  s.ambiguous_fraction = static_cast<double>(ambiguous) / static_cast<double>(pr.size());
  return s;
}

PrStats compute_pr_stats(std::span<const PrSample> samples) {
  std::vector<double> pr;
  pr.reserve(samples.size());
  for (const auto& s : samples) pr.push_back(projection_rate(s.estimated, s.truth));
  return compute_pr_stats(std::span<const double>(pr));
}

std::pair<double, double> bootstrap_median_ci(std::span<const double> values, double level, std::size_t resamples,
                                              std::uint64_t seed) {
  require_nonempty(values.size(), "bootstrap");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (resamples == 0) throw DomainError("bootstrap needs at least one resample");
  Rng rng = make_rng(seed, 0xB007);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> medians;
  medians.reserve(resamples);
  std::vector<double> draw(values.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& d : draw) d = values[pick(rng)];
    medians.push_back(lower_median(draw));
  }
  const double tail = 50.0 * (1.0 - level);
  const double lo = tail <= 0.0 ? *std::min_element(medians.begin(), medians.end())
                                : percentile_nearest_rank(medians, std::max(tail, 1e-9));
  return {lo, percentile_nearest_rank(medians, 100.0 - tail)};
}

std::vector<TargetLatency> discovery_latency(std::span<const TraceEvent> trace) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  auto note = [&](const std::string& id) {
    if (seen.insert(id).second) order.push_back(id);
  };
  std::map<std::string, double> entry;
  std::map<std::string, double> assoc;

  for (const auto& e : trace) {
    if (e.type == "scenario" && e.data.contains("targets")) {
      for (const auto& t : e.data.at("targets")) {
        if (t.value("role", std::string("target")) == "target") note(t.at("id").get<std::string>());
      }
    } else if (e.type == "range_entry") {
      const auto id = e.data.at("target").get<std::string>();
      note(id);
      entry.emplace(id, e.t);
    } else if (e.type == "associate") {
      const auto id = e.data.at("target").get<std::string>();
      if (e.data.value("role", std::string("target")) != "target") continue;
      note(id);
      if (!entry.count(id)) throw TraceError("target " + id + " associated without a range-entry event");
      assoc.emplace(id, e.t);
    }
  }

  std::vector<TargetLatency> out;
  for (const auto& id : order) {
    TargetLatency l;
    l.target = id;
    if (auto it = entry.find(id); it != entry.end()) l.range_entry_t = it->second;
    if (auto it = assoc.find(id); it != assoc.end()) {
      l.association_t = it->second;
      l.latency_s = it->second - *l.range_entry_t;
    } else {
      l.reason = "not-discovered";
    }
    out.push_back(std::move(l));
  }
  return out;
}

double localization_error(const Vec2& fix, const Vec3& truth) { return std::hypot(fix.x - truth.x, fix.y - truth.y); }

double localization_error(const Vec3& fix, const Vec3& truth) { return std::hypot(fix.x - truth.x, fix.y - truth.y); }

double success_rate(std::size_t discovered, std::size_t total) {
  if (total == 0) throw InsufficientDataError("success rate over zero runs");
  if (discovered > total) throw DomainError("discovered count exceeds total");
  return static_cast<double>(discovered) / static_cast<double>(total);
}

SummaryStats summarize(std::span<const double> values) {
  require_nonempty(values.size(), "summarize");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  SummaryStats s;
  s.n = v.size();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.median = lower_median(v);
  s.min = v.front();
  s.max = v.back();
  return s;
}

MetricsReport compute_metrics(std::span<const TraceEvent> trace) {
  MetricsReport r;
  std::vector<PrSample> samples;
  std::vector<double> ranges;
  std::set<std::string> exploratory;

  for (const auto& e : trace) {
    if (e.type == "scenario") {
      if (e.data.contains("contour_m")) r.contour_range_m = e.data.at("contour_m").get<double>();
    } else if (e.type == "estimate" && e.data.contains("truth")) {
      samples.push_back({Direction::from_vector(vec_from_json(e.data.at("dir"))),
                         Direction::from_vector(vec_from_json(e.data.at("truth")))});
    } else if (e.type == "associate") {
      if (e.data.value("role", std::string("target")) != "target") continue;
      const auto id = e.data.at("target").get<std::string>();
      if (e.data.contains("distance_m")) ranges.push_back(e.data.at("distance_m").get<double>());
      if (e.data.value("phase", std::string()) == "exploratory") exploratory.insert(id);
    } else if (e.type == "fix") {
      const auto& f = e.data.at("fix");
      r.localization_error_m =
          localization_error(Vec2{f.at(0).get<double>(), f.at(1).get<double>()}, vec_from_json(e.data.at("truth")));
    } else if (e.type == "sweep_complete") {
      r.sweep_time_s = e.t;
    } else if (e.type == "mission_end") {
      r.mission_time_s = e.t;
    }
  }

  if (!samples.empty()) r.pr = compute_pr_stats(std::span<const PrSample>(samples));
  if (!ranges.empty()) r.discovery_range_m = summarize(ranges);

  r.per_target_latency = discovery_latency(trace);
  r.n_targets = r.per_target_latency.size();
  std::vector<double> lat;
  for (const auto& l : r.per_target_latency) {
    if (l.latency_s) lat.push_back(*l.latency_s);
  }
  r.n_discovered = lat.size();
  if (!lat.empty()) r.discovery_latency_s = summarize(lat);
  for (const auto& l : r.per_target_latency) {
    if (exploratory.count(l.target)) ++r.n_discovered_exploratory;
  }
  if (r.n_targets > 0) r.exploratory_success_rate = success_rate(r.n_discovered_exploratory, r.n_targets);
  return r;
}

json to_json(const PrStats& s) {
  return json{{"n", s.n},
              {"med_pr", s.med_pr},
              {"med_pr_midpoint", s.med_pr_midpoint},
              {"median_error_deg", s.median_error_deg},
              {"median_of_errors_deg", s.median_of_errors_deg},
              {"p80_error_deg", s.p80_error_deg},
              {"mean_pr", s.mean_pr},
              {"ambiguous_fraction", s.ambiguous_fraction},
              {"median_convention", s.median_convention}};
}

json to_json(const SummaryStats& s) {
  return json{{"n", s.n}, {"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, double>) {
    return *v;
  } else {
    return to_json(*v);
  }
}

}  // namespace

json to_json(const MetricsReport& r) {
  json per = json::array();
  for (const auto& l : r.per_target_latency) {
    json j{{"target", l.target}};
    j["latency_s"] = opt(l.latency_s);
    j["range_entry_t"] = opt(l.range_entry_t);
    j["association_t"] = opt(l.association_t);
    if (!l.reason.empty()) j["reason"] = l.reason;
    per.push_back(std::move(j));
  }
  json j;
  j["pr"] = opt(r.pr);
  j["n_targets"] = r.n_targets;
  j["n_discovered"] = r.n_discovered;
  j["n_discovered_exploratory"] = r.n_discovered_exploratory;
  j["exploratory_success_rate"] = r.exploratory_success_rate;
  j["contour_range_m"] = opt(r.contour_range_m);
  j["discovery_range_m"] = opt(r.discovery_range_m);
  j["discovery_latency_s"] = opt(r.discovery_latency_s);
  j["per_target_latency"] = std::move(per);
  j["localization_error_m"] = opt(r.localization_error_m);
  j["sweep_time_s"] = opt(r.sweep_time_s);
  j["mission_time_s"] = opt(r.mission_time_s);
  j["processing_latency_ms"] = opt(r.processing_latency_ms);
  j["meta"] = {{"median_convention", "lower"}, {"angles", "degrees"}, {"distances", "meters"}};
  return j;
}

std::string metrics_csv_header() {
  return "n_estimates,med_pr,med_pr_midpoint,median_error_deg,median_of_errors_deg,p80_error_deg,ambiguous_fraction,"
         "n_targets,n_discovered,exploratory_success_rate,contour_range_m,median_discovery_range_m,"
         "mean_discovery_latency_s,median_discovery_latency_s,localization_error_m,sweep_time_s,mission_time_s";
}

std::string metrics_csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  auto put = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  os << (r.pr ? r.pr->n : 0) << ',';
  put(r.pr ? std::optional(r.pr->med_pr) : std::nullopt);
  os << ',';
  put(r.pr ? std::optional(r.pr->med_pr_midpoint) : std::nullopt);
  os << ',';
  put(r.pr ? std::optional(r.pr->median_error_deg) : std::nullopt);
  os << ',';
  put(r.pr ? std::optional(r.pr->median_of_errors_deg) : std::nullopt);
  os << ',';
  put(r.pr ? std::optional(r.pr->p80_error_deg) : std::nullopt);
  os << ',';
  put(r.pr ? std::optional(r.pr->ambiguous_fraction) : std::nullopt);
  os << ',' << r.n_targets << ',' << r.n_discovered << ',' << r.exploratory_success_rate << ',';
  put(r.contour_range_m);
  os << ',';
  put(r.discovery_range_m ? std::optional(r.discovery_range_m->median) : std::nullopt);
  os << ',';
  put(r.discovery_latency_s ? std::optional(r.discovery_latency_s->mean) : std::nullopt);
  os << ',';
  put(r.discovery_latency_s ? std::optional(r.discovery_latency_s->median) : std::nullopt);
  os << ',';
  put(r.localization_error_m);
  os << ',';
  put(r.sweep_time_s);
  os << ',';
  put(r.mission_time_s);
  return os.str();
}

}  // namespace lensar
