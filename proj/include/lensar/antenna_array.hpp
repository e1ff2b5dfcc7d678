#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lensar/geometry.hpp"
#include "lensar/lens_model.hpp"

namespace lensar {

// Antenna positions on the lens surface. Element order defines the RSS-vector index.
struct AntennaLayout {
  std::vector<HemisphereAngles> elements;

  std::size_t size() const { return elements.size(); }
  // Throws ConfigError unless N >= 2, all elements lie in the hemisphere and are
  // pairwise separated by more than 1 degree.
  void validate() const;
};

// Zenith element, a 3-element ring at 60 deg elevation and a 6-element ring at 30 deg.
AntennaLayout default_layout(double ring60_phase_deg = 0.0, double ring30_phase_deg = 0.0);

// CSV `theta_deg,phi_deg`, one antenna per row.
AntennaLayout read_layout_csv(std::istream& is);
void write_layout_csv(std::ostream& os, const AntennaLayout& layout);

// Template vector s(u): gain of every element for a plane wave from `u`.
std::vector<double> sample_template(const BeamTemplate& t, const AntennaLayout& layout, const Direction& u);

// Same as sample_template but accepts directions below the lens horizon; used by
// the forward simulator when attitude tilts the target above the lens equator.
std::vector<double> array_response(const BeamTemplate& t, const AntennaLayout& layout, const Vec3& u);

// Precomputed template vectors over a uniform hemisphere grid.
//
// Grid layout matches BeamTemplate: theta_i = i * res (i = 0..90/res),
// phi_j = -180 + (j + 1) * res (j = 0..360/res - 1), flattened as i * n_phi + j.
class Manifold {
 public:
  std::size_t n_theta() const { return n_theta_; }
  std::size_t n_phi() const { return n_phi_; }
  std::size_t n_directions() const { return n_theta_ * n_phi_; }
  std::size_t n_antennas() const { return n_ant_; }
  double resolution_deg() const { return res_deg_; }

  HemisphereAngles angles(std::size_t idx) const;
  Direction direction(std::size_t idx) const;
  std::size_t index(std::size_t i_theta, std::size_t j_phi) const { return i_theta * n_phi_ + j_phi; }

  // s(u) as sampled, in dB.
  std::span<const double> raw(std::size_t idx) const { return {raw_.data() + idx * n_ant_, n_ant_}; }
  // De-meaned, unit-norm template; all zeros when degenerate.
  std::span<const double> unit(std::size_t idx) const { return {unit_.data() + idx * n_ant_, n_ant_}; }
  // Norm of the de-meaned template before normalization.
  double centered_norm(std::size_t idx) const { return norms_[idx]; }
  bool degenerate(std::size_t idx) const { return norms_[idx] < kDegenerateNorm; }
  std::size_t degenerate_count() const;

  const AntennaLayout& layout() const { return layout_; }

  static constexpr double kDegenerateNorm = 1e-9;

 private:
  friend Manifold build_manifold(const BeamTemplate&, const AntennaLayout&, double, unsigned);
  double res_deg_{1.0};
  std::size_t n_theta_{0};
  std::size_t n_phi_{0};
  std::size_t n_ant_{0};
  AntennaLayout layout_;
  std::vector<double> raw_;
  std::vector<double> unit_;
  std::vector<double> norms_;
};

// `resolution_deg` must be a multiple of the template resolution and divide 90.
// `workers` = 0 picks hardware concurrency; output does not depend on it.
Manifold build_manifold(const BeamTemplate& t, const AntennaLayout& layout, double resolution_deg = 1.0,
                        unsigned workers = 0);

}  // namespace lensar
