#include <doctest.h>

#include <cmath>

#include "lensar/errors.hpp"
#include "lensar/geometry.hpp"
#include "support.hpp"

using namespace lensar;
using namespace lensar::testing;

namespace {

void check_vec(const Vec3& a, const Vec3& b, double tol = 1e-12) {
  CHECK(std::abs(a.x - b.x) <= tol);
  CHECK(std::abs(a.y - b.y) <= tol);
  CHECK(std::abs(a.z - b.z) <= tol);
}

// Textbook ZYX matrix written out element by element.
Vec3 zyx_reference(const Vec3& v, double roll, double pitch, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double m[3][3] = {{cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr},
                          {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr},
                          {-sp, cp * sr, cp * cr}};
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z, m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

}  // namespace

TEST_CASE("dir_from_angles examples") {
  check_vec(dir_from_angles({0, 0}).vec(), {1, 0, 0});
  check_vec(dir_from_angles({kPi / 2, 0}).vec(), {0, 0, 1});
  check_vec(dir_from_angles({0, kPi / 2}).vec(), {0, 1, 0});
  CHECK_THROWS_AS(dir_from_angles({-0.1, 0}), DomainError);
  CHECK_THROWS_AS(dir_from_angles({kPi / 2 + 0.1, 0}), DomainError);
  CHECK_THROWS_AS(dir_from_angles({0.3, -kPi - 0.01}), DomainError);
}

TEST_CASE("angles_from_dir examples") {
  auto z = angles_from_dir(Direction::from_vector({0, 0, 1}));
  CHECK(z.theta == doctest::Approx(kPi / 2));
  CHECK(z.phi == 0.0);
  auto x = angles_from_dir(Direction::from_vector({1, 0, 0}));
  CHECK(std::abs(x.theta) < 1e-12);
  CHECK(std::abs(x.phi) < 1e-12);
  const double t = deg2rad(40), p = deg2rad(10);
  auto a = angles_from_dir(Direction::from_vector({std::cos(t) * std::cos(p), std::cos(t) * std::sin(p), std::sin(t)}));
  CHECK(std::abs(a.theta - t) < 1e-9);
  CHECK(std::abs(a.phi - p) < 1e-9);
  CHECK_THROWS_AS(angles_from_dir(Direction::from_vector({0, 0.5, -0.5})), DomainError);
}

TEST_CASE("zero vector is rejected") { CHECK_THROWS_AS(Direction::from_vector({0, 0, 0}), DomainError); }

TEST_CASE("angle round trip on the open hemisphere (property)") {
  Rng rng = make_rng(11, 0);
  for (int i = 0; i < 5000; ++i) {
    HemisphereAngles a = rand_angles(rng, 89.999);
    const auto d = dir_from_angles(a);
    CHECK(std::abs(norm(d.vec()) - 1.0) < 1e-9);
    CHECK(d.z() >= 0.0);
    const auto b = angles_from_dir(d);
    CHECK(std::abs(b.theta - a.theta) < 1e-9);
    CHECK(std::abs(wrap_pi(b.phi - a.phi)) < 1e-9);
  }
}

TEST_CASE("rotation_to") {
  const Rotation id = rotation_to(Direction::from_vector({0, 0, 1}));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(std::abs(id(r, c) - (r == c ? 1.0 : 0.0)) < 1e-12);

  const Rotation rx = rotation_to(Direction::from_vector({1, 0, 0}));
  check_vec(rx.apply(Vec3{0, 0, 1}), {1, 0, 0});
  // Rz(0) * Ry(pi/2) entry by entry.
  check_vec(rx.apply(Vec3{1, 0, 0}), {0, 0, -1});
  check_vec(rx.apply(Vec3{0, 1, 0}), {0, 1, 0});

  Rng rng = make_rng(12, 0);
  for (int i = 0; i < 2000; ++i) {
    const auto u = dir_from_angles(rand_angles(rng));
    const Rotation r = rotation_to(u);
    CHECK(r.orthonormality_error() < 1e-9);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-9);
    check_vec(r.transpose().apply(u.vec()), {0, 0, 1}, 1e-9);
  }
}

TEST_CASE("rotation_to is proper on every 1 degree grid direction") {
  for (int i = 0; i <= 90; ++i) {
    for (int j = 0; j < 360; ++j) {
      const auto u = dir_from_angles({deg2rad(i), deg2rad(-180.0 + j + 1)});
      const Rotation r = rotation_to(u);
      REQUIRE(r.orthonormality_error() < 1e-9);
      REQUIRE(std::abs(r.determinant() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("body_to_world") {
  const auto d = Direction::from_vector({0.3, -0.4, 0.866});
  check_vec(body_to_world(d, {}).vec(), d.vec());
  check_vec(body_to_world(Direction::from_vector({1, 0, 0}), {0, 0, kPi / 2}).vec(), {0, 1, 0});

  Rng rng = make_rng(13, 0);
  for (int i = 0; i < 2000; ++i) {
    const Attitude att = rand_attitude(rng);
    const Vec3 a = rand_unit(rng), b = rand_unit(rng);
    const auto wa = body_to_world(Direction::from_vector(a), att);
    const auto wb = body_to_world(Direction::from_vector(b), att);
    check_vec(wa.vec(), zyx_reference(a, att.roll, att.pitch, att.yaw), 1e-12);
    CHECK(std::abs(norm(wa.vec()) - 1.0) < 1e-12);
    CHECK(std::abs(dot(wa.vec(), wb.vec()) - dot(a, b)) < 1e-12);
    check_vec(world_to_body(wa, att).vec(), a, 1e-9);
  }
}

TEST_CASE("projection rate and angular distance") {
  const auto z = Direction::from_vector({0, 0, 1});
  const auto x = Direction::from_vector({1, 0, 0});
  CHECK(projection_rate(z, z) == doctest::Approx(1.0));
  CHECK(std::abs(projection_rate(z, x)) < 1e-15);
  const auto tilted = dir_from_angles({kPi / 2 - deg2rad(18.19), 0.7});
  CHECK(projection_rate(tilted, z) == doctest::Approx(0.95).epsilon(1e-4));
  CHECK(angular_distance(z, z) == 0.0);
  CHECK(angular_distance(z, x) == doctest::Approx(kPi / 2));
  for (double phi : {-2.0, 0.0, 1.0, 3.0}) {
    CHECK(rad2deg(angular_distance(z, dir_from_angles({deg2rad(30), phi}))) == doctest::Approx(60.0));
  }

  Rng rng = make_rng(14, 0);
  for (int i = 0; i < 2000; ++i) {
    const auto a = Direction::from_vector(rand_unit(rng));
    const auto b = Direction::from_vector(rand_unit(rng));
    const double pr = projection_rate(a, b);
    CHECK(pr == projection_rate(b, a));
    CHECK(pr >= -1.0);
    CHECK(pr <= 1.0);
    CHECK(std::abs(angular_distance(a, b) - std::acos(pr)) < 1e-12);
  }
}

TEST_CASE("wrap helpers keep the half-open range") {
  CHECK(wrap_pi(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_pi(kPi) == doctest::Approx(kPi));
  CHECK(wrap_deg(-180.0) == 180.0);
  CHECK(wrap_deg(540.0) == 180.0);
  CHECK(wrap_deg(-190.0) == doctest::Approx(170.0));
}

TEST_CASE("frame conversion is an involution") {
  const Vec3 v{1, 2, 3};
  CHECK(ned_to_enu(enu_to_ned(v)) == v);
  CHECK(enu_to_ned(Vec3{0, 0, 10}).z == -10.0);
}
