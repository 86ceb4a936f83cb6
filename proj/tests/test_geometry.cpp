#include "doctest.h"
#include "fixtures.hpp"

using namespace fx;

namespace {

IsometryElement reflection_x(double at) {
  IsometryElement e;
  e.linear(0, 0) = -1;
  e.translation = Vec(2 * at, 0, 0);
  return e;
}

TwistedLoop straight_lift(const Vec& step, int n) {
  TwistedLoop l{Geometry::flat(2), {}, translation(step * n)};
  for (int k = 0; k < n; ++k) l.samples.push_back(step * k);
  return l;
}

TwistedLoop equator(int n) {
  TwistedLoop l{Geometry::sphere(), {}, IsometryElement{}};
  for (int k = 0; k < n; ++k) l.samples.push_back(Vec(std::cos(2 * kPi * k / n), std::sin(2 * kPi * k / n), 0));
  return l;
}

}  // namespace

TEST_CASE("sphere exp/log/transport") {
  Geometry s = Geometry::sphere();
  Vec x(1, 0, 0), y(0, 1, 0);
  CHECK(s.distance(x, y) == doctest::Approx(kPi / 2));
  Vec v = s.log(x, y);
  CHECK((s.exp(x, v) - y).norm() < 1e-14);
  CHECK(v.norm() == doctest::Approx(kPi / 2));
  // Transport along the geodesic carries the tangent direction to the tangent direction.
  Vec w = s.transport(x, y, Vec(0, 1, 0));
  CHECK((w - Vec(-1, 0, 0)).norm() < 1e-14);
  CHECK(s.distance(x, -x) == doctest::Approx(kPi));
}

TEST_CASE("isometry ball sizes") {
  Geometry f = Geometry::flat(2);
  auto torus = enumerate_isometries(f, {translation(Vec(1, 0, 0)), translation(Vec(0, 1, 0))}, 3);
  CHECK(torus.elements.size() == 25);
  CHECK(torus.elements.front().is_identity());

  auto z3 = enumerate_isometries(Geometry::sphere(), {rotation_z(2 * kPi / 3)}, 3);
  CHECK(z3.elements.size() == 3);

  auto mirrors = enumerate_isometries(f, {reflection_x(0), reflection_x(1)}, 2);
  CHECK(mirrors.elements.size() == 5);
  CHECK(mirrors.find(translation(Vec(2, 0, 0))) >= 0);
  CHECK(mirrors.find(translation(Vec(-2, 0, 0))) >= 0);
}

TEST_CASE("non-orthogonal generator is rejected") {
  IsometryElement bad;
  bad.linear(0, 1) = 0.5;
  CHECK_THROWS_AS(enumerate_isometries(Geometry::flat(2), {bad}, 2), Error);
}

TEST_CASE("words parse back to elements") {
  std::vector<IsometryElement> gens{translation(Vec(1, 0, 0)), translation(Vec(0, 1, 0))};
  auto e = parse_word("a^3*b^-1", gens, {"a", "b"});
  CHECK(e.approx_equal(translation(Vec(3, -1, 0))));
  CHECK(parse_word("e", gens, {"a", "b"}).is_identity());
  CHECK_THROWS(parse_word("c", gens, {"a", "b"}));
}

TEST_CASE("differentials compose") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    IsometryElement g = random_rotation(rng), h = random_rotation(rng);
    Mat d = g.compose(h).linear - g.linear * h.linear;
    CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("loop measurements") {
  TwistedLoop constant{Geometry::flat(2), std::vector<Vec>(8, Vec(1, 2, 0)), IsometryElement{}};
  CHECK(loop_measurements(constant).energy == 0);
  CHECK(loop_measurements(constant).length == 0);

  CHECK(loop_measurements(straight_lift(Vec(3, 4, 0) / 16, 16)).length == doctest::Approx(5).epsilon(1e-14));

  // Great-circle distances: the equally spaced equator measures 2π, not the chord sum.
  const auto m = loop_measurements(equator(128));
  CHECK(m.length == doctest::Approx(2 * kPi).epsilon(1e-13));
  CHECK(m.length * m.length <= 2 * m.energy * (1 + 1e-12));
}

TEST_CASE("loop validation") {
  TwistedLoop short_loop{Geometry::flat(2), std::vector<Vec>(4, Vec::Zero()), IsometryElement{}};
  CHECK_THROWS(validate_loop(short_loop));
  TwistedLoop off = equator(16);
  off.samples[3] *= 1.1;
  CHECK_THROWS(validate_loop(off));
  TwistedLoop gap = equator(16);
  gap.samples[5] = -gap.samples[4];
  CHECK_THROWS(validate_loop(gap));
  CHECK_NOTHROW(validate_loop(equator(16)));
}

TEST_CASE("charts") {
  TwistedLoop base = straight_lift(Vec(1, 0, 0) / 8, 8);
  SectionField zero{std::vector<Vec>(8, Vec::Zero())};
  TwistedLoop same = chart_apply(base, zero, 0.5);
  CHECK(same.samples == base.samples);

  SectionField nu{std::vector<Vec>(8, Vec(0, 0.1, 0))};
  TwistedLoop moved = chart_apply(base, nu, 0.5);
  for (int k = 0; k < 8; ++k) CHECK((moved.samples[k] - base.samples[k] - nu.v[k]).norm() < 1e-15);

  SectionField big{std::vector<Vec>(8, Vec(0, 0.6, 0))};
  CHECK_THROWS(chart_apply(base, big, 0.5));
  SectionField radial;
  for (const Vec& x : equator(16).samples) radial.v.push_back(0.1 * x);
  CHECK_THROWS(chart_apply(equator(16), radial, 0.5));  // not tangent

  Rng rng(17);
  TwistedLoop s = equator(32);
  SectionField r = random_section(s, rng, 1.0);
  SectionField back = chart_recover(s, chart_apply(s, r, 1.0));
  for (int k = 0; k < 32; ++k) CHECK((back.v[k] - r.v[k]).norm() < 1e-12);
}

TEST_CASE("gradient vanishes on discrete geodesics") {
  CHECK(energy_gradient(straight_lift(Vec(3, 4, 0) / 32, 32)).sup_norm() < 1e-12);
  TwistedLoop constant{Geometry::flat(2), std::vector<Vec>(8, Vec(1, 2, 0)), IsometryElement{}};
  CHECK(energy_gradient(constant).sup_norm() == 0);
  CHECK(energy_gradient(equator(64)).sup_norm() < 1e-10);
}

TEST_CASE("gradient matches finite differences") {
  Rng rng(23);
  for (int i = 0; i < 10; ++i) {
    IsometryElement t = random_plane_motion(rng);
    CHECK(gradient_fd_error(seed_loop(Geometry::flat(2), t, 16, rng(), 0.3)) < 1e-5);
    CHECK(gradient_fd_error(seed_loop(Geometry::sphere(), random_rotation(rng), 16, rng(), 0.3)) < 1e-5);
  }
}

TEST_CASE("conjugation") {
  TwistedLoop l = straight_lift(Vec(1, 0, 0) / 16, 16);
  TwistedLoop same = conjugate_loop(IsometryElement{}, l);
  CHECK(same.samples == l.samples);
  TwistedLoop turned = conjugate_loop(rotation_z(kPi / 2), l);
  CHECK(turned.twist.approx_equal(translation(Vec(0, 1, 0))));
  CHECK(loop_measurements(turned).energy == doctest::Approx(loop_measurements(l).energy).epsilon(1e-14));
}

TEST_CASE("descent") {
  auto r = minimize_energy(seed_loop(Geometry::flat(2), translation(Vec(3, 4, 0)), 256, 3));
  CHECK(r.converged);
  CHECK(!r.degenerate);
  CHECK(r.measurements.length == doctest::Approx(5).epsilon(1e-4));
  for (std::size_t i = 1; i < r.energies.size(); ++i) CHECK(r.energies[i] <= r.energies[i - 1]);

  // A pure reflection collapses onto its mirror.
  auto d = minimize_energy(seed_loop(Geometry::flat(2), reflection_x(0), 64, 4));
  CHECK(d.degenerate);
  CHECK(!d.converged);

  MinimizeOptions few;
  few.max_iter = 3;
  auto cut = minimize_energy(seed_loop(Geometry::flat(2), translation(Vec(3, 4, 0)), 64, 3, 0.3), few);
  CHECK(!cut.converged);
  CHECK(cut.iterations == 3);
}

TEST_CASE("length spectrum") {
  Geometry f = Geometry::flat(2);
  auto torus = enumerate_isometries(f, {translation(Vec(1, 0, 0)), translation(Vec(0, 1, 0))}, 3);
  std::vector<IsometryElement> twists{torus.elements[1], torus.elements[2]};
  auto rows = length_spectrum(torus, twists, 64, 1, 9);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) CHECK(r.min_length == doctest::Approx(1).epsilon(1e-6));
  CHECK(spectrum_csv(rows).rfind("class_word,min_length,iterations,converged,degenerate\n", 0) == 0);
  CHECK(spectrum_csv(rows) == spectrum_csv(length_spectrum(torus, twists, 64, 1, 9)));
  CHECK_THROWS(length_spectrum(torus, {}, 64, 1, 9));

  auto mirrors = enumerate_isometries(f, {reflection_x(0), reflection_x(1)}, 2);
  auto mr = length_spectrum(mirrors, {mirrors.elements[1]}, 64, 1, 9);
  REQUIRE(mr.size() == 1);
  CHECK(mr[0].degenerate);
  CHECK(mr[0].min_length == 0);
}
