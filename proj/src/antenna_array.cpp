#include "lensar/antenna_array.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "lensar/errors.hpp"

namespace lensar {

namespace {

double layout_value(const std::string& cell, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError("layout row " + std::to_string(row) + ": bad number '" + cell + "'");
  }
}

// Template gain at a rotated surface point; points below the lens horizon are
// folded onto theta = 0 keeping their azimuth.
double folded_gain(const BeamTemplate& t, const Vec3& p) {
  const double horiz = std::hypot(p.x, p.y);
  const double phi = horiz < 1e-12 ? 0.0 : rad2deg(std::atan2(p.y, p.x));
  const double theta = p.z <= 0.0 ? 0.0 : rad2deg(std::atan2(p.z, horiz));
  return t.gain_deg(theta, phi);
}

std::vector<Vec3> element_vectors(const AntennaLayout& layout) {
  std::vector<Vec3> v;
  v.reserve(layout.size());
  for (const auto& e : layout.elements) v.push_back(dir_from_angles(e).vec());
  return v;
}

void fill_response(const BeamTemplate& t, const std::vector<Vec3>& elems, const Rotation& inv, double* out) {
  for (std::size_t i = 0; i < elems.size(); ++i) out[i] = folded_gain(t, inv.apply(elems[i]));
}

}  // namespace

void AntennaLayout::validate() const {
  if (elements.size() < 2) throw ConfigError("layout: need at least 2 antennas");
  std::vector<Direction> dirs;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!elements[i].in_domain(1e-9))
      throw ConfigError("layout: antenna " + std::to_string(i) + " outside the upper hemisphere");
    dirs.push_back(dir_from_angles(elements[i]));
  }
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j)
      if (angular_distance(dirs[i], dirs[j]) <= deg2rad(1.0))
        throw ConfigError("layout: antennas " + std::to_string(i) + " and " + std::to_string(j) +
                          " are within 1 degree of each other");
}

AntennaLayout default_layout(double ring60_phase_deg, double ring30_phase_deg) {
  AntennaLayout l;
  l.elements.push_back({kPi / 2, 0.0});
  for (int k = 0; k < 3; ++k)
    l.elements.push_back({deg2rad(60.0), deg2rad(wrap_deg(ring60_phase_deg + 120.0 * k))});
  for (int k = 0; k < 6; ++k)
    l.elements.push_back({deg2rad(30.0), deg2rad(wrap_deg(ring30_phase_deg + 60.0 * k))});
  return l;
}

AntennaLayout read_layout_csv(std::istream& is) {
  AntennaLayout l;
  std::string line;
  std::size_t row = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header) {
      std::string h;
      for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) h.push_back(c);
      if (h != "theta_deg,phi_deg") throw ParseError("layout row " + std::to_string(row) + ": expected header theta_deg,phi_deg");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || std::getline(ss, extra, ','))
      throw ParseError("layout row " + std::to_string(row) + ": expected 2 columns");
    l.elements.push_back({deg2rad(layout_value(a, row)), deg2rad(wrap_deg(layout_value(b, row)))});
  }
  l.validate();
  return l;
}

void write_layout_csv(std::ostream& os, const AntennaLayout& layout) {
  os << "theta_deg,phi_deg\n";
  os.precision(12);
  for (const auto& e : layout.elements) os << rad2deg(e.theta) << ',' << rad2deg(e.phi) << '\n';
}

std::vector<double> array_response(const BeamTemplate& t, const AntennaLayout& layout, const Vec3& u) {
  const auto elems = element_vectors(layout);
  std::vector<double> s(elems.size());
  fill_response(t, elems, boresight_rotation(u).transpose(), s.data());
  return s;
}

std::vector<double> sample_template(const BeamTemplate& t, const AntennaLayout& layout, const Direction& u) {
  const auto elems = element_vectors(layout);
  std::vector<double> s(elems.size());
  fill_response(t, elems, rotation_to(u).transpose(), s.data());
  return s;
}

HemisphereAngles Manifold::angles(std::size_t idx) const {
  const std::size_t i = idx / n_phi_, j = idx % n_phi_;
  if (static_cast<double>(i) * res_deg_ >= 90.0) return {kPi / 2, 0.0};
  return {deg2rad(static_cast<double>(i) * res_deg_), deg2rad(-180.0 + static_cast<double>(j + 1) * res_deg_)};
}

Direction Manifold::direction(std::size_t idx) const { return dir_from_angles(angles(idx)); }

std::size_t Manifold::degenerate_count() const {
  return static_cast<std::size_t>(std::count_if(norms_.begin(), norms_.end(), [](double n) { return n < kDegenerateNorm; }));
}

Manifold build_manifold(const BeamTemplate& t, const AntennaLayout& layout, double resolution_deg, unsigned workers) {
  layout.validate();
  const double ratio = resolution_deg / t.resolution_deg();
  if (!(resolution_deg > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
    throw ConfigError("manifold: resolution must be a multiple of the template resolution");
  const double per90 = 90.0 / resolution_deg;
  if (std::abs(per90 - std::round(per90)) > 1e-9) throw ConfigError("manifold: resolution must divide 90 degrees");

  Manifold m;
  m.res_deg_ = resolution_deg;
  m.n_theta_ = static_cast<std::size_t>(std::lround(per90)) + 1;
  m.n_phi_ = static_cast<std::size_t>(std::lround(360.0 / resolution_deg));
  m.n_ant_ = layout.size();
  m.layout_ = layout;
  const std::size_t n_dir = m.n_directions();
  m.raw_.assign(n_dir * m.n_ant_, 0.0);
  m.unit_.assign(n_dir * m.n_ant_, 0.0);
  m.norms_.assign(n_dir, 0.0);

  const auto elems = element_vectors(layout);
  const double n = static_cast<double>(m.n_ant_);
  const auto fill_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      double* raw = m.raw_.data() + idx * m.n_ant_;
      fill_response(t, elems, rotation_to(m.direction(idx)).transpose(), raw);
      double sum = 0.0;
      for (std::size_t k = 0; k < m.n_ant_; ++k) sum += raw[k];
      double* unit = m.unit_.data() + idx * m.n_ant_;
      double ss = 0.0;
      for (std::size_t k = 0; k < m.n_ant_; ++k) {
        unit[k] = (n * raw[k] - sum) / n;
        ss += unit[k] * unit[k];
      }
      const double nrm = std::sqrt(ss);
      m.norms_[idx] = nrm;
      for (std::size_t k = 0; k < m.n_ant_; ++k) unit[k] = nrm < Manifold::kDegenerateNorm ? 0.0 : unit[k] / nrm;
    }
  };

  unsigned w = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  w = static_cast<unsigned>(std::min<std::size_t>(w, n_dir));
  if (w <= 1) {
    fill_range(0, n_dir);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_dir + w - 1) / w;
    for (unsigned k = 0; k < w; ++k) {
      const std::size_t b = k * chunk, e = std::min(n_dir, b + chunk);
      if (b < e) pool.emplace_back(fill_range, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return m;
}

}  // namespace lensar
