#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lensar/geometry.hpp"

namespace lensar {

// Spherical gradient-index lens. Permittivities are relative (air = 1).
struct LensDesign {
  double radius_m{0.075};
  double eps_material{2.7};
  double eps_truncation{1.25};
  double frequency_hz{5.745e9};

  // Throws ConfigError unless R > 0, eps_material > eps_truncation >= 1, f > 0.
  void validate() const;
};

// eps(r) = max(2 - (r/R)^2, eps_truncation).
double permittivity(double r_m, const LensDesign& design);
double refractive_index(double r_m, const LensDesign& design);
// Polymer fill fraction realizing eps(r) in an air/polymer mixture:
// eps = alpha * eps_m + (1 - alpha) * 1.
double volume_fraction(double r_m, const LensDesign& design);

struct ProfileRow {
  double r_m;
  double eps;
  double n;
  double alpha;
};

std::vector<ProfileRow> profile_table(const LensDesign& design, std::size_t steps);
// Header `r_m,eps,n,alpha`.
void write_profile_csv(std::ostream& os, const std::vector<ProfileRow>& rows);

enum class TemplateSource { synthetic, measured };

// Gain in dB over the upper hemisphere on a uniform (theta, phi) grid.
//
// Rows are elevations theta_i = i * res for i = 0..90/res; columns are azimuths
// phi_j = -180 + (j + 1) * res for j = 0..360/res - 1, i.e. phi in (-180, 180].
// Values are stored row-major. Immutable after construction.
class BeamTemplate {
 public:
  BeamTemplate(double resolution_deg, std::vector<double> gains_db, TemplateSource source);

  double resolution_deg() const { return res_deg_; }
  std::size_t n_theta() const { return n_theta_; }
  std::size_t n_phi() const { return n_phi_; }
  TemplateSource source() const { return source_; }
  double peak_dbi() const { return peak_; }

  double theta_deg(std::size_t i) const { return static_cast<double>(i) * res_deg_; }
  double phi_deg(std::size_t j) const { return -180.0 + static_cast<double>(j + 1) * res_deg_; }
  double at(std::size_t i, std::size_t j) const { return gains_[i * n_phi_ + j]; }
  const std::vector<double>& values() const { return gains_; }

  // Bilinear lookup in degrees; phi is wrapped, theta clamped to [0, 90].
  double gain_deg(double theta_deg, double phi_deg) const;

 private:
  double res_deg_;
  std::size_t n_theta_;
  std::size_t n_phi_;
  std::vector<double> gains_;
  TemplateSource source_;
  double peak_;
};

struct SynthParams {
  double peak_dbi{14.0};
  double hpbw_deg{60.0};
  double floor_dbi{-10.0};
  double resolution_deg{1.0};

  void validate() const;
};

// Closed-form lobe: max(peak - 3 * (2 psi / hpbw)^2, floor), psi = off-boresight angle.
double synth_gain(const SynthParams& p, double psi_deg);

// Axially symmetric lobe about the zenith boresight.
BeamTemplate synth_template(const SynthParams& p);

// Reads a coarse `theta_deg,phi_deg,gain_db` grid and interpolates it to
// `fine_resolution_deg` (bicubic, periodic in phi, edge-clamped in theta).
BeamTemplate import_template(std::istream& is, double fine_resolution_deg = 1.0);
BeamTemplate import_template_file(const std::filesystem::path& path, double fine_resolution_deg = 1.0);

// Writes grid nodes every `step_deg` (a multiple of the template resolution;
// 0 means the native resolution), row-major theta-then-phi.
void export_template(std::ostream& os, const BeamTemplate& t, double step_deg = 0.0);

double template_gain(const BeamTemplate& t, const HemisphereAngles& at);

}  // namespace lensar
