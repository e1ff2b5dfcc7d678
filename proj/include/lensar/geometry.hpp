#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace lensar {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi].
double wrap_pi(double rad);
// Wraps an angle in degrees into (-180, 180].
double wrap_deg(double deg);

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// Elevation/azimuth pair on the estimator's search hemisphere.
// theta: elevation above the lens horizon in [0, pi/2]; phi: azimuth in (-pi, pi].
struct HemisphereAngles {
  double theta{0.0};
  double phi{0.0};

  bool in_domain(double tol = 1e-12) const;
};

// Unit 3-vector. Construction normalizes or rejects degenerate input, so every
// instance satisfies |v| = 1 within 1e-9.
class Direction {
 public:
  Direction() : v_{0.0, 0.0, 1.0} {}
  // Normalizes `v`; throws DomainError if |v| is zero or not finite.
  static Direction from_vector(const Vec3& v);

  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  const Vec3& vec() const { return v_; }

  bool operator==(const Direction&) const = default;

 private:
  explicit Direction(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

// Proper rotation, row-major 3x3.
class Rotation {
 public:
  Rotation() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
  explicit Rotation(const std::array<double, 9>& m) : m_(m) {}

  static Rotation about_x(double rad);
  static Rotation about_y(double rad);
  static Rotation about_z(double rad);

  double operator()(int r, int c) const { return m_[static_cast<std::size_t>(r * 3 + c)]; }
  Vec3 apply(const Vec3& v) const;
  Direction apply(const Direction& d) const;
  Rotation transpose() const;
  Rotation operator*(const Rotation& o) const;
  double determinant() const;
  // Largest absolute entry of R^T R - I.
  double orthonormality_error() const;

 private:
  std::array<double, 9> m_;
};

// Drone attitude, radians. Intrinsic ZYX: yaw, then pitch, then roll.
struct Attitude {
  double roll{0.0};
  double pitch{0.0};
  double yaw{0.0};
};

Direction dir_from_angles(const HemisphereAngles& a);
HemisphereAngles angles_from_dir(const Direction& u);

// Elevation/azimuth for any unit vector; elevation may be negative.
HemisphereAngles angles_unchecked(const Vec3& u);

// R_u = Rz(phi) * Ry(pi/2 - theta); maps the zenith boresight onto u.
Rotation rotation_to(const Direction& u);
// Same construction without the hemisphere check (theta may be negative).
Rotation boresight_rotation(const Vec3& u);

Rotation attitude_rotation(const Attitude& att);
Direction body_to_world(const Direction& d, const Attitude& att);
Direction world_to_body(const Direction& d, const Attitude& att);

double projection_rate(const Direction& est, const Direction& truth);
double angular_distance(const Direction& a, const Direction& b);

// The navigation frame is local-level NED (z toward the ground), so the lens
// hemisphere z >= 0 faces down. Positions are kept in ENU.
constexpr Vec3 ned_to_enu(const Vec3& v) { return {v.y, v.x, -v.z}; }
constexpr Vec3 enu_to_ned(const Vec3& v) { return {v.y, v.x, -v.z}; }

}  // namespace lensar
