#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "lensar/geometry.hpp"
#include "lensar/random.hpp"

namespace lensar::testing {

inline double rand_uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Uniform over the upper hemisphere's angle box (not area-uniform).
inline HemisphereAngles rand_angles(Rng& rng, double max_theta_deg = 90.0) {
  return {deg2rad(rand_uniform(rng, 0.0, max_theta_deg)), wrap_pi(deg2rad(rand_uniform(rng, -180.0, 180.0)))};
}

inline Vec3 rand_unit(Rng& rng) {
  std::normal_distribution<double> n;
  for (;;) {
    Vec3 v{n(rng), n(rng), n(rng)};
    if (norm(v) > 1e-6) return v * (1.0 / norm(v));
  }
}

inline Attitude rand_attitude(Rng& rng) {
  return {rand_uniform(rng, -kPi, kPi), rand_uniform(rng, -kPi / 2, kPi / 2), rand_uniform(rng, -kPi, kPi)};
}

inline double deg_between(const Vec3& a, const Vec3& b) {
  const double c = dot(a, b) / (norm(a) * norm(b));
  return rad2deg(std::acos(std::max(-1.0, std::min(1.0, c))));
}

}  // namespace lensar::testing
