#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lensar/antenna_array.hpp"
#include "lensar/errors.hpp"
#include "support.hpp"

using namespace lensar;
using namespace lensar::testing;

TEST_CASE("default layout") {
  const auto l = default_layout();
  REQUIRE(l.size() == 10);
  CHECK(l.elements[0].theta == doctest::Approx(kPi / 2));
  int ring60 = 0, ring30 = 0;
  for (const auto& e : l.elements) {
    if (std::abs(rad2deg(e.theta) - 60.0) < 1e-9) ++ring60;
    if (std::abs(rad2deg(e.theta) - 30.0) < 1e-9) ++ring30;
  }
  CHECK(ring60 == 3);
  CHECK(ring30 == 6);
  CHECK_NOTHROW(l.validate());
}

TEST_CASE("layout validation and CSV") {
  AntennaLayout one{{{kPi / 2, 0}}};
  CHECK_THROWS_AS(one.validate(), ConfigError);
  AntennaLayout close{{{deg2rad(30), 0}, {deg2rad(30.5), 0}}};
  CHECK_THROWS_AS(close.validate(), ConfigError);
  AntennaLayout below{{{deg2rad(-5), 0}, {deg2rad(30), 0}}};
  CHECK_THROWS_AS(below.validate(), ConfigError);

  std::ostringstream os;
  write_layout_csv(os, default_layout(15, 7));
  std::istringstream in(os.str());
  const auto back = read_layout_csv(in);
  const auto ref = default_layout(15, 7);
  REQUIRE(back.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(back.elements[i].theta == doctest::Approx(ref.elements[i].theta));
    CHECK(std::abs(wrap_pi(back.elements[i].phi - ref.elements[i].phi)) < 1e-12);
  }
  std::istringstream bad("theta_deg,phi_deg\n30,0\n30,x\n");
  CHECK_THROWS_AS(read_layout_csv(bad), ParseError);
}

TEST_CASE("sample_template at the zenith") {
  const auto t = synth_template({});
  const auto l = default_layout();
  const auto s = sample_template(t, l, Direction{});
  for (std::size_t i = 0; i < l.size(); ++i) CHECK(s[i] == doctest::Approx(template_gain(t, l.elements[i])));
  CHECK(std::max_element(s.begin(), s.end()) == s.begin());
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[0]);
}

TEST_CASE("synthetic response follows the angular-distance oracle (property)") {
  const SynthParams p;
  const auto t = synth_template(p);
  const auto l = default_layout();
  // The floor clamp puts a kink in the lobe; cubic interpolation rings within two cells of it.
  const double kink = 0.5 * p.hpbw_deg * std::sqrt((p.peak_dbi - p.floor_dbi) / 3.0);
  Rng rng = make_rng(31, 0);
  for (int k = 0; k < 3000; ++k) {
    const auto u = dir_from_angles(rand_angles(rng));
    const auto s = sample_template(t, l, u);
    for (std::size_t i = 0; i < l.size(); ++i) {
      const double psi = rad2deg(angular_distance(u, dir_from_angles(l.elements[i])));
      const double tol = std::abs(psi - kink) > 2.0 * p.resolution_deg ? 1e-2 : 0.1;
      REQUIRE(std::abs(s[i] - synth_gain(p, psi)) < tol);
    }
  }
}

TEST_CASE("120 degree symmetry of the three-element ring") {
  const auto t = synth_template({});
  const auto l = default_layout();
  Rng rng = make_rng(32, 0);
  for (int k = 0; k < 500; ++k) {
    const auto a = rand_angles(rng);
    const auto s0 = sample_template(t, l, dir_from_angles(a));
    const auto s1 = sample_template(t, l, dir_from_angles({a.theta, wrap_pi(a.phi + deg2rad(120))}));
    // Element indices 1..3 are the 60-degree ring at 0/120/240.
    CHECK(s0[0] == doctest::Approx(s1[0]).epsilon(1e-6));
    for (int e = 0; e < 3; ++e) CHECK(std::abs(s0[1 + e] - s1[1 + (e + 1) % 3]) < 1e-2);
  }
}

TEST_CASE("manifold") {
  const auto t = synth_template({});
  const auto l = default_layout();
  const auto m = build_manifold(t, l, 1.0, 1);
  CHECK(m.n_directions() == 32760);
  CHECK(m.n_theta() == 91);
  CHECK(m.n_phi() == 360);
  CHECK(m.n_antennas() == 10);
  for (std::size_t k = 0; k < m.n_directions(); ++k) {
    if (m.degenerate(k)) continue;
    const auto u = m.unit(k);
    double sum = 0, sq = 0;
    for (double v : u) {
      sum += v;
      sq += v * v;
    }
    REQUIRE(std::abs(sum) < 1e-9);
    REQUIRE(std::abs(std::sqrt(sq) - 1.0) < 1e-9);
    const auto raw = m.raw(k);
    const auto ref = sample_template(t, l, m.direction(k));
    REQUIRE(std::equal(raw.begin(), raw.end(), ref.begin()));
  }
  const auto again = build_manifold(t, l, 1.0, 3);
  for (std::size_t k = 0; k < m.n_directions(); ++k) {
    const auto a = m.unit(k), b = again.unit(k);
    REQUIRE(std::equal(a.begin(), a.end(), b.begin()));
  }
  const auto coarse = build_manifold(t, l, 10.0);
  CHECK(coarse.n_directions() == 10 * 36);
  CHECK_THROWS(build_manifold(t, l, 7.0));
  CHECK_THROWS_AS(build_manifold(t, AntennaLayout{{{kPi / 2, 0}}}, 1.0), ConfigError);
}

TEST_CASE("flat template gives degenerate vectors") {
  SynthParams flat;
  flat.peak_dbi = 0.0;
  flat.floor_dbi = -1.0;
  flat.hpbw_deg = 179.0;
  BeamTemplate t(10.0, std::vector<double>(10 * 36, 2.0), TemplateSource::measured);
  const auto m = build_manifold(t, default_layout(), 10.0);
  CHECK(m.degenerate_count() == m.n_directions());
}
