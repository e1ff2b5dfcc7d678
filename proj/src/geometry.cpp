#include "lensar/geometry.hpp"

#include <algorithm>
#include <limits>

#include "lensar/errors.hpp"

namespace lensar {

double wrap_pi(double rad) {
  double w = std::remainder(rad, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double wrap_deg(double deg) {
  double w = std::remainder(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  return w;
}

bool HemisphereAngles::in_domain(double tol) const {
  return std::isfinite(theta) && std::isfinite(phi) && theta >= -tol && theta <= kPi / 2 + tol &&
         phi > -kPi && phi <= kPi + tol;
}

Direction Direction::from_vector(const Vec3& v) {
  const double n = norm(v);
  if (!std::isfinite(n) || n < 1e-300) throw DomainError("direction: zero or non-finite vector");
  return Direction{v * (1.0 / n)};
}

Rotation Rotation::about_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Rotation{{1, 0, 0, 0, c, -s, 0, s, c}};
}

Rotation Rotation::about_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Rotation{{c, 0, s, 0, 1, 0, -s, 0, c}};
}

Rotation Rotation::about_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Rotation{{c, -s, 0, s, c, 0, 0, 0, 1}};
}

Vec3 Rotation::apply(const Vec3& v) const {
  return {m_[0] * v.x + m_[1] * v.y + m_[2] * v.z, m_[3] * v.x + m_[4] * v.y + m_[5] * v.z,
          m_[6] * v.x + m_[7] * v.y + m_[8] * v.z};
}

Direction Rotation::apply(const Direction& d) const { return Direction::from_vector(apply(d.vec())); }

Rotation Rotation::transpose() const {
  return Rotation{{m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]}};
}

Rotation Rotation::operator*(const Rotation& o) const {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += (*this)(i, k) * o(k, j);
      r[static_cast<std::size_t>(i * 3 + j)] = acc;
    }
  return Rotation{r};
}

double Rotation::determinant() const {
  return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) - m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
         m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
}

double Rotation::orthonormality_error() const {
  const Rotation p = transpose() * (*this);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(p(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

Direction dir_from_angles(const HemisphereAngles& a) {
  if (!a.in_domain()) throw DomainError("dir_from_angles: angles outside the upper hemisphere");
  const double ct = std::cos(a.theta);
  return Direction::from_vector({ct * std::cos(a.phi), ct * std::sin(a.phi), std::sin(a.theta)});
}

HemisphereAngles angles_unchecked(const Vec3& u) {
  const double horiz = std::hypot(u.x, u.y);
  HemisphereAngles a;
  a.theta = std::atan2(u.z, horiz);
  // phi is 0 at the poles by convention.
  a.phi = horiz < 1e-12 ? 0.0 : std::atan2(u.y, u.x);
  if (a.phi <= -kPi) a.phi = kPi;
  return a;
}

HemisphereAngles angles_from_dir(const Direction& u) {
  if (u.z() < -1e-12) throw DomainError("angles_from_dir: direction below the hemisphere (z < 0)");
  HemisphereAngles a = angles_unchecked(u.vec());
  a.theta = std::max(a.theta, 0.0);
  return a;
}

Rotation boresight_rotation(const Vec3& u) {
  const HemisphereAngles a = angles_unchecked(u);
  return Rotation::about_z(a.phi) * Rotation::about_y(kPi / 2 - a.theta);
}

Rotation rotation_to(const Direction& u) {
  if (u.z() < -1e-12) throw DomainError("rotation_to: direction below the hemisphere (z < 0)");
  return boresight_rotation(u.vec());
}

Rotation attitude_rotation(const Attitude& att) {
  return Rotation::about_z(att.yaw) * Rotation::about_y(att.pitch) * Rotation::about_x(att.roll);
}

Direction body_to_world(const Direction& d, const Attitude& att) { return attitude_rotation(att).apply(d); }

Direction world_to_body(const Direction& d, const Attitude& att) {
  return attitude_rotation(att).transpose().apply(d);
}

double projection_rate(const Direction& est, const Direction& truth) {
  return std::clamp(dot(est.vec(), truth.vec()), -1.0, 1.0);
}

double angular_distance(const Direction& a, const Direction& b) { return std::acos(projection_rate(a, b)); }

}  // namespace lensar
