#include "lensar/lens_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "lensar/errors.hpp"

namespace lensar {

namespace {

constexpr double kGridTol = 1e-6;

void check_radius(double r_m, const LensDesign& d) {
  d.validate();
  if (!(r_m >= -1e-12 * d.radius_m && r_m <= d.radius_m * (1.0 + 1e-12)))
    throw DomainError("lens: radius " + std::to_string(r_m) + " m outside [0, R]");
}

// Number of whole `step`s in `value`, or -1 if `value` is not on the lattice.
long lattice_index(double value, double step) {
  const double q = value / step;
  const double r = std::round(q);
  if (std::abs(q - r) * step > kGridTol) return -1;
  return static_cast<long>(r);
}

std::size_t grid_count(double span_deg, double res_deg, const char* what) {
  if (!(res_deg > 0.0) || !std::isfinite(res_deg)) throw ConfigError(std::string(what) + ": resolution must be > 0");
  const long n = lattice_index(span_deg, res_deg);
  if (n <= 0) throw ConfigError(std::string(what) + ": resolution must divide " + std::to_string(span_deg) + " degrees");
  return static_cast<std::size_t>(n);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_field(const std::string& text, std::size_t row, const char* column) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ParseError("template row " + std::to_string(row) + ": bad " + column + " value '" + t + "'");
  return v;
}

// Cubic convolution weights (Keys, a = -0.5) for offsets -1, 0, 1, 2.
std::array<double, 4> cubic_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
          0.5 * (t3 - t2)};
}

struct Knot {
  double theta;
  double phi;
  double gain;
  std::size_t row;
};

}  // namespace

void LensDesign::validate() const {
  if (!(radius_m > 0.0)) throw ConfigError("lens: radius must be > 0");
  if (!(eps_truncation >= 1.0)) throw ConfigError("lens: truncation permittivity must be >= 1");
  if (!(eps_material > eps_truncation)) throw ConfigError("lens: material permittivity must exceed the truncation value");
  if (!(frequency_hz > 0.0)) throw ConfigError("lens: frequency must be > 0");
}

double permittivity(double r_m, const LensDesign& design) {
  check_radius(r_m, design);
  const double rho = std::clamp(r_m / design.radius_m, 0.0, 1.0);
  return std::max(2.0 - rho * rho, design.eps_truncation);
}

double refractive_index(double r_m, const LensDesign& design) { return std::sqrt(permittivity(r_m, design)); }

double volume_fraction(double r_m, const LensDesign& design) {
  if (!(design.eps_material > 1.0)) throw ConfigError("lens: material permittivity must exceed 1 (air)");
  const double eps = permittivity(r_m, design);
  if (eps > design.eps_material)
    throw ConfigError("lens: material permittivity too low to realize eps = " + std::to_string(eps));
  return (eps - 1.0) / (design.eps_material - 1.0);
}

std::vector<ProfileRow> profile_table(const LensDesign& design, std::size_t steps) {
  if (steps < 2) throw ConfigError("lens profile: need at least 2 steps");
  design.validate();
  std::vector<ProfileRow> rows;
  rows.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double r = k + 1 == steps ? design.radius_m
                                    : design.radius_m * static_cast<double>(k) / static_cast<double>(steps - 1);
    const double eps = permittivity(r, design);
    rows.push_back({r, eps, std::sqrt(eps), volume_fraction(r, design)});
  }
  return rows;
}

void write_profile_csv(std::ostream& os, const std::vector<ProfileRow>& rows) {
  os << "r_m,eps,n,alpha\n";
  os.precision(10);
  for (const auto& r : rows) os << r.r_m << ',' << r.eps << ',' << r.n << ',' << r.alpha << '\n';
}

BeamTemplate::BeamTemplate(double resolution_deg, std::vector<double> gains_db, TemplateSource source)
    : res_deg_(resolution_deg),
      n_theta_(grid_count(90.0, resolution_deg, "template") + 1),
      n_phi_(grid_count(360.0, resolution_deg, "template")),
      gains_(std::move(gains_db)),
      source_(source),
      peak_(0.0) {
  if (gains_.size() != n_theta_ * n_phi_)
    throw ConfigError("template: expected " + std::to_string(n_theta_ * n_phi_) + " values, got " +
                      std::to_string(gains_.size()));
  for (double g : gains_)
    if (!std::isfinite(g)) throw ConfigError("template: non-finite gain value");
  peak_ = *std::max_element(gains_.begin(), gains_.end());
}

double BeamTemplate::gain_deg(double theta_deg, double phi_deg) const {
  const double u = std::clamp(theta_deg, 0.0, 90.0) / res_deg_;
  std::size_t i = static_cast<std::size_t>(std::floor(u));
  double t = u - static_cast<double>(i);
  if (t < 1e-9) t = 0.0;
  if (t > 1.0 - 1e-9) {
    ++i;
    t = 0.0;
  }
  if (i >= n_theta_ - 1) {
    i = n_theta_ - 1;
    t = 0.0;
  }

  const double v = (wrap_deg(phi_deg) + 180.0) / res_deg_ - 1.0;
  double jf = std::floor(v);
  double s = v - jf;
  if (s < 1e-9) s = 0.0;
  if (s > 1.0 - 1e-9) {
    jf += 1.0;
    s = 0.0;
  }
  const long n = static_cast<long>(n_phi_);
  const auto j0 = static_cast<std::size_t>(((static_cast<long>(jf) % n) + n) % n);
  const std::size_t j1 = (j0 + 1) % n_phi_;

  const double row0 = (1.0 - s) * at(i, j0) + (s > 0.0 ? s * at(i, j1) : 0.0);
  if (t == 0.0) return row0;
  const double row1 = (1.0 - s) * at(i + 1, j0) + (s > 0.0 ? s * at(i + 1, j1) : 0.0);
  return (1.0 - t) * row0 + t * row1;
}

void SynthParams::validate() const {
  if (!(peak_dbi > floor_dbi)) throw ConfigError("synthetic template: peak must exceed floor");
  if (!(hpbw_deg > 0.0 && hpbw_deg < 180.0)) throw ConfigError("synthetic template: hpbw must be in (0, 180) degrees");
  grid_count(90.0, resolution_deg, "synthetic template");
}

double synth_gain(const SynthParams& p, double psi_deg) {
  const double x = 2.0 * psi_deg / p.hpbw_deg;
  return std::max(p.peak_dbi - 3.0 * x * x, p.floor_dbi);
}

BeamTemplate synth_template(const SynthParams& p) {
  p.validate();
  const std::size_t n_theta = grid_count(90.0, p.resolution_deg, "synthetic template") + 1;
  const std::size_t n_phi = grid_count(360.0, p.resolution_deg, "synthetic template");
  std::vector<double> g;
  g.reserve(n_theta * n_phi);
  for (std::size_t i = 0; i < n_theta; ++i) {
    // Off-boresight angle of a point at elevation theta is 90 - theta.
    const double value = synth_gain(p, 90.0 - static_cast<double>(i) * p.resolution_deg);
    g.insert(g.end(), n_phi, value);
  }
  return BeamTemplate(p.resolution_deg, std::move(g), TemplateSource::synthetic);
}

BeamTemplate import_template(std::istream& is, double fine_res) {
  const std::size_t n_theta = grid_count(90.0, fine_res, "template import") + 1;
  const std::size_t n_phi = grid_count(360.0, fine_res, "template import");

  std::vector<Knot> knots;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      std::string h;
      for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) h.push_back(c);
      if (h != "theta_deg,phi_deg,gain_db")
        throw ParseError("template row " + std::to_string(row) + ": expected header theta_deg,phi_deg,gain_db");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 3)
      throw ParseError("template row " + std::to_string(row) + ": expected 3 columns, got " + std::to_string(cols.size()));
    Knot k{parse_field(cols[0], row, "theta_deg"), wrap_deg(parse_field(cols[1], row, "phi_deg")),
           parse_field(cols[2], row, "gain_db"), row};
    if (k.theta < -kGridTol || k.theta > 90.0 + kGridTol)
      throw ParseError("template row " + std::to_string(row) + ": theta outside [0, 90]");
    knots.push_back(k);
  }
  if (!header_seen) throw ParseError("template: empty file");
  if (knots.empty()) throw ParseError("template: no data rows");

  // Knots must sit on the fine lattice.
  struct Placed {
    long i;
    long j;
    const Knot* knot;
  };
  std::vector<Placed> placed;
  std::map<std::pair<long, long>, std::size_t> seen;
  for (const auto& k : knots) {
    const long i = lattice_index(k.theta, fine_res);
    const long jj = lattice_index(k.phi + 180.0, fine_res);
    if (i < 0 || jj < 0)
      throw ParseError("template row " + std::to_string(k.row) + ": knot not on the " + std::to_string(fine_res) +
                       "-degree output lattice (non-uniform spacing)");
    const long j = (jj - 1 + static_cast<long>(n_phi)) % static_cast<long>(n_phi);
    auto [it, inserted] = seen.emplace(std::make_pair(i, j), k.row);
    if (!inserted)
      throw ParseError("template row " + std::to_string(k.row) + ": duplicate knot (also at row " +
                       std::to_string(it->second) + ")");
    placed.push_back({i, j, &k});
  }

  // A stray knot off the common grid shows up as a sparsely populated row or column.
  {
    std::map<long, std::size_t> per_theta, per_phi;
    for (const auto& p : placed) {
      ++per_theta[p.i];
      ++per_phi[p.j];
    }
    const auto flag_sparse = [&](const std::map<long, std::size_t>& counts, bool by_theta, const char* what) {
      std::size_t most = 0;
      for (const auto& [k, n] : counts) most = std::max(most, n);
      for (const auto& p : placed) {
        const std::size_t n = counts.at(by_theta ? p.i : p.j);
        if (most > 2 && 2 * n < most)
          throw ParseError("template row " + std::to_string(p.knot->row) + ": non-uniform " + what + " spacing");
      }
    };
    flag_sparse(per_phi, false, "azimuth");
    flag_sparse(per_theta, true, "elevation");
  }

  std::vector<long> thetas, phis;
  for (const auto& p : placed) {
    thetas.push_back(p.i);
    phis.push_back(p.j);
  }
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
  std::sort(phis.begin(), phis.end());
  phis.erase(std::unique(phis.begin(), phis.end()), phis.end());
  if (thetas.size() < 2 || phis.size() < 2) throw ParseError("template: grid needs at least 2 elevations and 2 azimuths");

  long step_t = thetas[1] - thetas[0];
  for (std::size_t k = 1; k < thetas.size(); ++k) step_t = std::min(step_t, thetas[k] - thetas[k - 1]);
  long step_p = static_cast<long>(n_phi) - phis.back() + phis.front();
  for (std::size_t k = 1; k < phis.size(); ++k) step_p = std::min(step_p, phis[k] - phis[k - 1]);

  const auto first_row_with = [&](auto pred) {
    for (const auto& p : placed)
      if (pred(p)) return p.knot->row;
    return std::size_t{0};
  };
  for (long t : thetas)
    if (t % step_t != 0)
      throw ParseError("template row " + std::to_string(first_row_with([&](const Placed& p) { return p.i == t; })) +
                       ": non-uniform elevation spacing");
  for (long p : phis)
    if ((p - phis.front()) % step_p != 0)
      throw ParseError("template row " + std::to_string(first_row_with([&](const Placed& q) { return q.j == p; })) +
                       ": non-uniform azimuth spacing");
  if (static_cast<long>(n_phi) % step_p != 0) throw ParseError("template: azimuth spacing does not divide 360 degrees");
  if ((static_cast<long>(n_theta) - 1) % step_t != 0)
    throw ParseError("template: elevation spacing does not divide 90 degrees");

  const long kt = (static_cast<long>(n_theta) - 1) / step_t + 1;
  const long kp = static_cast<long>(n_phi) / step_p;
  const long j0 = phis.front();
  std::vector<double> coarse(static_cast<std::size_t>(kt * kp), 0.0);
  std::vector<char> filled(coarse.size(), 0);
  for (const auto& p : placed) {
    const long ci = p.i / step_t;
    const long cj = (p.j - j0) / step_p;
    coarse[static_cast<std::size_t>(ci * kp + cj)] = p.knot->gain;
    filled[static_cast<std::size_t>(ci * kp + cj)] = 1;
  }
  for (long ci = 0; ci < kt; ++ci)
    for (long cj = 0; cj < kp; ++cj)
      if (!filled[static_cast<std::size_t>(ci * kp + cj)]) {
        const double th = static_cast<double>(ci * step_t) * fine_res;
        const double ph = -180.0 + static_cast<double>((j0 + cj * step_p) % static_cast<long>(n_phi) + 1) * fine_res;
        const std::size_t near_row =
            first_row_with([&](const Placed& q) { return q.i == ci * step_t; });
        throw ParseError("template: incomplete grid, missing knot theta=" + std::to_string(th) +
                         " phi=" + std::to_string(ph) +
                         (near_row ? " (elevation row starting at row " + std::to_string(near_row) + ")"
                                   : std::string(" (elevation absent)")));
      }

  const auto c = [&](long ci, long cj) {
    ci = std::clamp(ci, 0L, kt - 1);
    cj = ((cj % kp) + kp) % kp;
    return coarse[static_cast<std::size_t>(ci * kp + cj)];
  };
  std::vector<double> fine(n_theta * n_phi);
  for (std::size_t i = 0; i < n_theta; ++i) {
    const long ci = static_cast<long>(i) / step_t;
    const auto wt = cubic_weights(static_cast<double>(static_cast<long>(i) % step_t) / static_cast<double>(step_t));
    for (std::size_t j = 0; j < n_phi; ++j) {
      const long d = ((static_cast<long>(j) - j0) % static_cast<long>(n_phi) + static_cast<long>(n_phi)) %
                     static_cast<long>(n_phi);
      const long cj = d / step_p;
      const auto wp = cubic_weights(static_cast<double>(d % step_p) / static_cast<double>(step_p));
      double acc = 0.0;
      for (int a = 0; a < 4; ++a) {
        if (wt[static_cast<std::size_t>(a)] == 0.0) continue;
        double rowv = 0.0;
        for (int b = 0; b < 4; ++b) {
          if (wp[static_cast<std::size_t>(b)] == 0.0) continue;
          rowv += wp[static_cast<std::size_t>(b)] * c(ci + a - 1, cj + b - 1);
        }
        acc += wt[static_cast<std::size_t>(a)] * rowv;
      }
      fine[i * n_phi + j] = acc;
    }
  }
  return BeamTemplate(fine_res, std::move(fine), TemplateSource::measured);
}

BeamTemplate import_template_file(const std::filesystem::path& path, double fine_res) {
  std::ifstream in(path);
  if (!in) throw ParseError("template: cannot open " + path.string());
  return import_template(in, fine_res);
}

void export_template(std::ostream& os, const BeamTemplate& t, double step_deg) {
  long m = 1;
  if (step_deg > 0.0) {
    m = lattice_index(step_deg, t.resolution_deg());
    if (m <= 0) throw ConfigError("template export: step must be a multiple of the template resolution");
    if ((static_cast<long>(t.n_theta()) - 1) % m != 0 || static_cast<long>(t.n_phi()) % m != 0)
      throw ConfigError("template export: step must divide 90 degrees");
  }
  os << "theta_deg,phi_deg,gain_db\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.n_theta(); i += static_cast<std::size_t>(m))
    for (std::size_t j = static_cast<std::size_t>(m) - 1; j < t.n_phi(); j += static_cast<std::size_t>(m))
      os << t.theta_deg(i) << ',' << t.phi_deg(j) << ',' << t.at(i, j) << '\n';
}

double template_gain(const BeamTemplate& t, const HemisphereAngles& at) {
  return t.gain_deg(rad2deg(at.theta), rad2deg(at.phi));
}

}  // namespace lensar
