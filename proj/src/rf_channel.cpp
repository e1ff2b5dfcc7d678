#include "lensar/rf_channel.hpp"

#include <cmath>

#include "lensar/errors.hpp"

namespace lensar {

void ChannelParams::validate() const {
  if (!(frequency_hz > 0.0)) throw ConfigError("channel: frequency must be > 0");
  if (!(path_loss_exponent >= 1.6 && path_loss_exponent <= 6.0))
    throw ConfigError("channel: path-loss exponent must be in [1.6, 6]");
  if (!(reference_distance_m > 0.0)) throw ConfigError("channel: reference distance must be > 0");
  if (!(shadowing_sigma_db >= 0.0) || !(per_antenna_sigma_db >= 0.0))
    throw ConfigError("channel: noise sigmas must be >= 0");
  if (!(canopy_loss_db >= 0.0)) throw ConfigError("channel: canopy loss must be >= 0");
  if (!(decode_sensitivity_dbm >= noise_floor_dbm))
    throw ConfigError("channel: decode sensitivity must be >= noise floor");
}

void RadioEndpoint::validate() const {
  if (!(tx_power_dbm >= -10.0 && tx_power_dbm <= 30.0)) throw ConfigError("radio: tx power must be in [-10, 30] dBm");
}

double wavelength_m(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

double fspl_db(double d_m, double frequency_hz) {
  if (!(d_m > 0.0)) throw DomainError("fspl: distance must be > 0");
  if (!(frequency_hz > 0.0)) throw DomainError("fspl: frequency must be > 0");
  return 20.0 * std::log10(4.0 * kPi * d_m / wavelength_m(frequency_hz));
}

double path_loss_db(double d_m, const ChannelParams& p) {
  const double d = std::max(d_m, p.reference_distance_m);
  return fspl_db(p.reference_distance_m, p.frequency_hz) +
         10.0 * p.path_loss_exponent * std::log10(d / p.reference_distance_m);
}

MeanRx mean_rx_dbm(const RadioEndpoint& tx, double rx_gain_dbi, double d_m, const ChannelParams& p) {
  if (!(d_m > 0.0)) throw DomainError("mean_rx: distance must be > 0");
  const bool clamped = d_m < p.reference_distance_m;
  return {tx.tx_power_dbm + tx.antenna_gain_dbi + rx_gain_dbi - path_loss_db(d_m, p) - p.canopy_loss_db, clamped};
}

double sample_rx_dbm(double mean_dbm, const ChannelParams& p, Rng& rng) {
  double v = mean_dbm;
  if (p.shadowing_sigma_db > 0.0) v += std::normal_distribution<double>(0.0, p.shadowing_sigma_db)(rng);
  if (p.per_antenna_sigma_db > 0.0) v += std::normal_distribution<double>(0.0, p.per_antenna_sigma_db)(rng);
  return v;
}

std::vector<double> sample_rx_vector(std::span<const double> means_dbm, const ChannelParams& p, Rng& rng) {
  const double shadow =
      p.shadowing_sigma_db > 0.0 ? std::normal_distribution<double>(0.0, p.shadowing_sigma_db)(rng) : 0.0;
  std::normal_distribution<double> per(0.0, p.per_antenna_sigma_db > 0.0 ? p.per_antenna_sigma_db : 1.0);
  std::vector<double> out;
  out.reserve(means_dbm.size());
  for (double m : means_dbm) out.push_back(m + shadow + (p.per_antenna_sigma_db > 0.0 ? per(rng) : 0.0));
  return out;
}

bool decode(double rx_dbm, const ChannelParams& p) { return rx_dbm >= p.decode_sensitivity_dbm; }

double iso_rss_range_m(double eirp_dbm, double rx_gain_dbi, double target_dbm, const ChannelParams& p) {
  const double margin = eirp_dbm + rx_gain_dbi - p.canopy_loss_db - fspl_db(p.reference_distance_m, p.frequency_hz) -
                        target_dbm;
  return p.reference_distance_m * std::pow(10.0, margin / (10.0 * p.path_loss_exponent));
}

}  // namespace lensar
