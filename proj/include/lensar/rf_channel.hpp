#pragma once

#include <span>
#include <vector>

#include "lensar/geometry.hpp"
#include "lensar/random.hpp"

namespace lensar {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct ChannelParams {
  double frequency_hz{5.745e9};
  double path_loss_exponent{3.2};
  double reference_distance_m{1.0};
  double shadowing_sigma_db{0.0};   // common to all antennas of one packet
  double per_antenna_sigma_db{2.0};  // independent per antenna
  double canopy_loss_db{0.0};
  double noise_floor_dbm{-100.0};
  double decode_sensitivity_dbm{-94.0};

  void validate() const;
};

struct RadioEndpoint {
  Vec3 position;
  double tx_power_dbm{20.0};
  double antenna_gain_dbi{0.0};

  void validate() const;
};

double wavelength_m(double frequency_hz);

// 20 log10(4 pi d / lambda).
double fspl_db(double d_m, double frequency_hz);

// Log-distance loss anchored at free space: FSPL(d0) + 10 n log10(d / d0).
// Distances below d0 are evaluated at d0.
double path_loss_db(double d_m, const ChannelParams& p);

struct MeanRx {
  double dbm;
  bool clamped;  // d was below the reference distance and evaluated at d0
};

MeanRx mean_rx_dbm(const RadioEndpoint& tx, double rx_gain_dbi, double d_m, const ChannelParams& p);

// mean + shadowing draw + per-antenna draw.
double sample_rx_dbm(double mean_dbm, const ChannelParams& p, Rng& rng);

// One packet across antennas: a single shadowing draw shared by every entry plus
// an independent per-antenna draw.
std::vector<double> sample_rx_vector(std::span<const double> means_dbm, const ChannelParams& p, Rng& rng);

bool decode(double rx_dbm, const ChannelParams& p);

// Distance at which the mean link budget equals `target_dbm`.
double iso_rss_range_m(double eirp_dbm, double rx_gain_dbi, double target_dbm, const ChannelParams& p);

}  // namespace lensar
