#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lensar/bench.hpp"
#include "lensar/errors.hpp"
#include "lensar/simulator.hpp"

namespace {

using namespace lensar;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNotFound = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string template_file;
  std::string layout_file;
  std::optional<double> resolution_deg;
  bool quiet{false};
};

void add_beam_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Scenario file (JSON)");
  cmd->add_option("--template", c.template_file, "Beam template CSV (theta_deg,phi_deg,gain_db)");
  cmd->add_option("--layout", c.layout_file, "Antenna layout CSV (theta_deg,phi_deg)");
  cmd->add_option("--resolution-deg", c.resolution_deg, "Manifold grid resolution");
}

Scenario scenario_from(const Common& c) {
  Scenario s = c.config.empty() ? parse_scenario("{}") : load_scenario(c.config);
  if (!c.template_file.empty()) s.beam.file = c.template_file;
  if (!c.layout_file.empty()) s.layout.file = c.layout_file;
  if (c.resolution_deg) s.manifold_resolution_deg = *c.resolution_deg;
  if (c.seed) s.seed = *c.seed;
  s.validate();
  return s;
}

std::ostream& output_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error("cannot write " + path);
  return file;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

int cmd_simulate(const Common& c) {
  if (c.config.empty()) throw ConfigError("simulate: --config is required");
  const Scenario s = scenario_from(c);
  if (!s.seed) throw ConfigError("seed: required (set it in the config or pass --seed)");
  const auto out = simulate(s, *s.seed);
  const std::string dir = c.out_dir.empty() ? "out" : c.out_dir;
  write_outputs(out, s, dir);
  if (!c.quiet) {
    std::cout << "status: " << to_string(out.status) << "\n";
    std::cout << "end time: " << out.end_time << " s\n";
    std::cout << "discovered: " << out.metrics.n_discovered << "/" << out.metrics.n_targets << "\n";
    if (out.fix) std::cout << "fix: " << out.fix->x << ", " << out.fix->y << "\n";
    if (out.fix_error_m) std::cout << "fix error: " << *out.fix_error_m << " m\n";
    std::cout << "outputs: " << dir << "\n";
  }
  return (out.status == RunStatus::fix || out.status == RunStatus::sweep_complete) ? kExitOk : kExitNotFound;
}

int cmd_estimate(const Common& c, const std::string& input, const std::string& output) {
  const Scenario s = scenario_from(c);
  const auto ctx = make_context(s);
  auto in = open_input(input);
  const auto snaps = read_snapshots(in);
  const auto results = estimate_batch(ctx->manifold, snaps, s.estimator);
  std::ofstream file;
  auto& os = output_stream(output, file);
  for (std::size_t i = 0; i < snaps.size(); ++i) os << estimate_line(snaps[i].key, results[i]) << '\n';
  return kExitOk;
}

int cmd_template_gen(const SynthParams& p, const std::string& output) {
  p.validate();
  std::ofstream file;
  export_template(output_stream(output, file), synth_template(p));
  return kExitOk;
}

int cmd_template_import(const std::string& input, double res, const std::string& output) {
  auto in = open_input(input);
  const auto t = import_template(in, res);
  std::ofstream file;
  export_template(output_stream(output, file), t);
  return kExitOk;
}

int cmd_template_export(const Common& c, double step, const std::string& output) {
  const Scenario s = scenario_from(c);
  std::ofstream file;
  export_template(output_stream(output, file), load_beam(s.beam), step);
  return kExitOk;
}

int cmd_lens_profile(const LensDesign& d, std::size_t steps, const std::string& output) {
  d.validate();
  std::ofstream file;
  write_profile_csv(output_stream(output, file), profile_table(d, steps));
  return kExitOk;
}

int cmd_replay(const Common& c, const std::string& trace_path) {
  const auto trace = read_trace_file(trace_path);
  AggregatorConfig cfg;
  if (!c.config.empty()) {
    const Scenario s = scenario_from(c);
    cfg = s.aggregator;
    cfg.n_nics = s.ap.n_nics;
    cfg.antennas_per_nic = s.ap.antennas_per_nic;
  }
  std::vector<NicReport> reports;
  std::vector<std::string> recorded;
  double end = 0.0;
  for (const auto& e : trace) {
    if (e.type == "nic_report") reports.push_back(nic_report_from_json(e.data));
    if (e.type == "snapshot") recorded.push_back(snapshot_line(snapshot_from_json(e.data)));
    end = std::max(end, e.t);
  }
  const auto replayed = replay_reports(reports, cfg, end);
  std::size_t mismatches = recorded.size() == replayed.size() ? 0 : 1;
  for (std::size_t i = 0; i < std::min(recorded.size(), replayed.size()); ++i) {
    if (recorded[i] != snapshot_line(replayed[i])) ++mismatches;
  }
  const auto live = compute_metrics(trace);
  if (!c.out_dir.empty()) {
    std::filesystem::create_directories(c.out_dir);
    std::ofstream snaps(std::filesystem::path(c.out_dir) / "snapshots.jsonl");
    for (const auto& s : replayed) snaps << snapshot_line(s) << '\n';
    std::ofstream m(std::filesystem::path(c.out_dir) / "metrics.json");
    m << to_json(live).dump(2) << '\n';
  }
  if (!c.quiet) {
    std::cout << "reports: " << reports.size() << "\n";
    std::cout << "snapshots recorded: " << recorded.size() << ", replayed: " << replayed.size() << "\n";
    std::cout << (mismatches == 0 ? "snapshot stream identical" : "snapshot stream differs") << "\n";
  }
  return mismatches == 0 ? kExitOk : kExitFailure;
}

int cmd_metrics(const std::string& trace_path, const std::string& format) {
  const auto trace = read_trace_file(trace_path);
  const auto m = compute_metrics(trace);
  if (format == "csv") {
    std::cout << metrics_csv_header() << '\n' << metrics_csv_row(m) << '\n';
  } else {
    std::cout << to_json(m).dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_layout_show(const Common& c) {
  const Scenario s = scenario_from(c);
  const auto layout = load_layout(s.layout);
  std::cout << "index,theta_deg,phi_deg,x,y,z\n";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& a = layout.elements[i];
    const auto d = dir_from_angles(a).vec();
    std::cout << i << ',' << rad2deg(a.theta) << ',' << rad2deg(a.phi) << ',' << d.x << ',' << d.y << ',' << d.z << '\n';
  }
  return kExitOk;
}

int cmd_bench(const Common& c, BenchConfig cfg) {
  const Scenario s = scenario_from(c);
  if (c.resolution_deg) cfg.resolution_deg = *c.resolution_deg;
  if (c.seed) cfg.seed = *c.seed;
  const auto r = run_bench(load_beam(s.beam), load_layout(s.layout), cfg);
  std::cout << to_json(r).dump(2) << '\n';
  return kExitOk;
}

int cmd_diagnose(const Common& c, double sigma) {
  const Scenario s = scenario_from(c);
  const auto ctx = make_context(s);
  const auto& m = ctx->manifold;
  const auto id = identifiability(m);
  const auto cmp = compare_objectives(m, sigma, s.seed.value_or(1));
  nlohmann::json j{{"directions", m.n_directions()},
                   {"degenerate", m.degenerate_count()},
                   {"identifiability", {{"checked", id.checked}, {"failures", id.failures.size()}}},
                   {"objective_comparison",
                    {{"sigma_db", sigma},
                     {"trials", cmp.trials},
                     {"disagreements", cmp.disagreements},
                     {"max_disagreement_deg", cmp.max_disagreement_deg},
                     {"mean_disagreement_deg", cmp.mean_disagreement_deg},
                     {"min_template_norm", cmp.min_template_norm},
                     {"max_template_norm", cmp.max_template_norm}}}};
  nlohmann::json worst = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(id.failures.size(), 10); ++i) {
    const auto& f = id.failures[i];
    worst.push_back({{"theta_deg", rad2deg(f.truth.theta)}, {"phi_deg", rad2deg(f.truth.phi)},
                     {"error_deg", f.error_deg}});
  }
  j["identifiability"]["examples"] = worst;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lens-array Wi-Fi direction finding and search simulator"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* cmd) {
    add_beam_flags(cmd, c);
    cmd->add_option("--seed", c.seed, "Run seed");
    cmd->add_option("--out-dir", c.out_dir, "Output directory");
    cmd->add_flag("--quiet", c.quiet, "Suppress progress output");
  };

  auto* sim = app.add_subcommand("simulate", "Run one seeded mission");
  common(sim);

  std::string input, output;
  auto* est = app.add_subcommand("estimate", "Estimate directions for JSONL snapshots");
  common(est);
  est->add_option("--input", input, "Snapshot JSONL")->required();
  est->add_option("--output", output, "Estimate JSONL (default stdout)");

  auto* tmpl = app.add_subcommand("template", "Beam template utilities");
  tmpl->require_subcommand(1);
  SynthParams synth;
  auto* tgen = tmpl->add_subcommand("gen", "Write the synthetic lobe");
  tgen->add_option("--peak-dbi", synth.peak_dbi);
  tgen->add_option("--hpbw-deg", synth.hpbw_deg);
  tgen->add_option("--floor-dbi", synth.floor_dbi);
  tgen->add_option("--resolution-deg", synth.resolution_deg);
  tgen->add_option("--output", output);
  double import_res = 1.0;
  auto* timp = tmpl->add_subcommand("import", "Interpolate a coarse measured grid");
  timp->add_option("--input", input)->required();
  timp->add_option("--resolution-deg", import_res);
  timp->add_option("--output", output);
  double export_step = 0.0;
  auto* texp = tmpl->add_subcommand("export", "Export the configured template");
  texp->add_option("--config", c.config);
  texp->add_option("--template", c.template_file);
  texp->add_option("--step-deg", export_step);
  texp->add_option("--output", output);

  auto* lens = app.add_subcommand("lens", "Lens design utilities");
  lens->require_subcommand(1);
  LensDesign design;
  std::size_t steps = 16;
  auto* prof = lens->add_subcommand("profile", "Permittivity and fill-fraction profile");
  prof->add_option("--radius-m", design.radius_m);
  prof->add_option("--eps-material", design.eps_material);
  prof->add_option("--eps-truncation", design.eps_truncation);
  prof->add_option("--steps", steps);
  prof->add_option("--output", output);

  std::string trace_path;
  auto* rep = app.add_subcommand("replay", "Re-aggregate a recorded trace and compare snapshots");
  common(rep);
  rep->add_option("trace", trace_path)->required();

  std::string format = "json";
  auto* met = app.add_subcommand("metrics", "Compute metrics from a trace");
  met->add_option("trace", trace_path)->required();
  met->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* lay = app.add_subcommand("layout", "Antenna layout utilities");
  lay->require_subcommand(1);
  auto* lshow = lay->add_subcommand("show", "Print element angles and unit vectors");
  lshow->add_option("--config", c.config);
  lshow->add_option("--layout", c.layout_file);

  BenchConfig bench_cfg;
  auto* bench = app.add_subcommand("bench", "Estimator latency and throughput");
  common(bench);
  bench->add_option("--snapshots", bench_cfg.snapshots);
  bench->add_option("--streams", bench_cfg.streams);
  bench->add_option("--per-stream", bench_cfg.per_stream);
  bench->add_option("--workers", bench_cfg.workers);

  double sigma = 2.0;
  auto* diag = app.add_subcommand("diagnose", "Manifold identifiability and objective comparison");
  common(diag);
  diag->add_option("--sigma-db", sigma);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(c);
    if (*est) return cmd_estimate(c, input, output);
    if (*tgen) return cmd_template_gen(synth, output);
    if (*timp) return cmd_template_import(input, import_res, output);
    if (*texp) return cmd_template_export(c, export_step, output);
    if (*prof) return cmd_lens_profile(design, steps, output);
    if (*rep) return cmd_replay(c, trace_path);
    if (*met) return cmd_metrics(trace_path, format);
    if (*lshow) return cmd_layout_show(c);
    if (*bench) return cmd_bench(c, bench_cfg);
    if (*diag) return cmd_diagnose(c, sigma);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
