#include "doctest.h"
#include "fixtures.hpp"

using namespace fx;

namespace {

GroupoidPtr A() { return action_groupoid(fixture_A()); }
constexpr ObjectId kMinus = 0, kZero = 1, kPlus = 2;

GroupoidHom negation() {
  const GroupAction fa = fixture_A();
  GroupoidHom h{A(), A(), {kPlus, kZero, kMinus}, {}};
  for (int g = 0; g < 2; ++g)
    for (ObjectId x = 0; x < 3; ++x) h.arrow_map.push_back(action_arrow(fa, g, fa.act(1, x)));
  return h;
}

GroupoidHom fold() {
  const GroupAction fa = fixture_A();
  GroupoidHom h{A(), A(), {kZero, kZero, kZero}, {}};
  for (int g = 0; g < 2; ++g)
    for (ObjectId x = 0; x < 3; ++x) h.arrow_map.push_back(action_arrow(fa, g, kZero));
  return h;
}

GroupoidHom to_point() { return GroupoidHom{A(), point_groupoid(), {0, 0, 0}, std::vector<ArrowId>(6, 0)}; }

bool iso(const Bundle& a, const Bundle& b) { return bundle_isomorphism(a, b).has_value(); }

}  // namespace

TEST_CASE("bundles from homs and cocycles") {
  PointedBundle e = hom_bundle(identity_hom(A()), kZero);
  CHECK(e.bundle.size() == 6);  // (g', x) with src g' = x
  CHECK(validate_bundle(e.bundle).empty());

  GroupoidPtr pt = point_groupoid();
  CHECK(hom_bundle(identity_hom(pt), 0).bundle.size() == 1);

  // The cocycle pulled back to the edge cover gives the same bundle.
  Localization loc = localize(A(), OpenCover::by_edges(A()->base));
  GroupoidHom pulled = loc.projection;
  ObjectId star_piece = loc.cover.pieces_containing(kZero).front();
  PointedBundle c = bundle_from_cocycle(loc, pulled, star_piece, kZero);
  CHECK(validate_bundle(c.bundle).empty());
  CHECK(c.bundle.size() == 6);
  CHECK(pointed_isomorphism(c, e).map.has_value());
  CHECK_THROWS(bundle_from_cocycle(loc, pulled, star_piece, 7));
}

TEST_CASE("sections recover homs") {
  for (const auto& phi : enumerate_homs(A(), A())) {
    PointedBundle e = hom_bundle(phi, kZero);
    auto sigma = canonical_section(phi);
    CHECK(hom_from_section(e.bundle, sigma) == phi);

    // Moving each section point by a left arrow gives a naturally isomorphic hom.
    auto moved = sigma;
    const GroupAction fa = fixture_A();
    for (ObjectId x = 0; x < 3; ++x) moved[x] = e.bundle.act_left(action_arrow(fa, 1, e.bundle.t[sigma[x]]), sigma[x]);
    GroupoidHom other = hom_from_section(e.bundle, moved);
    CHECK(find_natural_transformation(phi, other).has_value());
  }
  GroupoidHom pt = identity_hom(point_groupoid());
  CHECK(hom_from_section(hom_bundle(pt, 0).bundle, {0}) == pt);
}

TEST_CASE("faults are reported") {
  Bundle e = hom_bundle(identity_hom(A()), kZero).bundle;
  Bundle missing = e;
  missing.left_act[0 * missing.size() + 0] = kNone;
  CHECK(!validate_bundle(missing).empty());

  Bundle swapped = e;
  // Send one right-action product somewhere else over the same point.
  for (ElementId x = 0; x < e.size(); ++x)
    for (ArrowId g = 0; g < 6; ++g) {
      ElementId y = e.act_right(x, g);
      if (y == kNone || y == x) continue;
      swapped.right_act[x * 6 + g] = x;
      goto done;
    }
done:
  CHECK(!validate_bundle(swapped).empty());
}

TEST_CASE("composition and inversion") {
  Bundle id = hom_bundle(identity_hom(A()), kZero).bundle;
  Bundle unit = unit_bundle(A());
  CHECK(iso(id, unit));
  for (const auto& phi : enumerate_homs(A(), A())) {
    Bundle e = hom_bundle(phi, kZero).bundle;
    CHECK(iso(compose_bundles(e, unit), e));
    for (const auto& psi : enumerate_homs(A(), A())) {
      Bundle direct = hom_bundle(compose_homs(psi, phi), kZero).bundle;
      CHECK(iso(compose_bundles(hom_bundle(psi, phi.obj_map[kZero]).bundle, e), direct));
    }
  }
  auto inv_unit = invert_bundle(unit);
  REQUIRE(inv_unit);
  CHECK(iso(*inv_unit, unit));

  Bundle neg = hom_bundle(negation(), kZero).bundle;
  auto inv_neg = invert_bundle(neg);
  REQUIRE(inv_neg);
  CHECK(iso(*inv_neg, neg));  // negation is an involution
  CHECK(iso(compose_bundles(neg, *inv_neg), unit));

  CHECK(!invert_bundle(hom_bundle(to_point(), kZero).bundle));
  CHECK(!invert_bundle(hom_bundle(fold(), kZero).bundle));
  CHECK_THROWS(compose_bundles(unit, hom_bundle(to_point(), kZero).bundle));
}

TEST_CASE("pointed isomorphism") {
  PointedBundle p = hom_bundle(negation(), kMinus);
  auto self = pointed_isomorphism(p, p);
  REQUIRE(self.map);
  for (ElementId e = 0; e < p.bundle.size(); ++e) CHECK((*self.map)[e] == e);

  Rng rng(12);
  std::vector<int> perm(p.bundle.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto r = pointed_isomorphism(p, relabel(p, perm));
  REQUIRE(r.map);
  CHECK(*r.map == perm);

  auto none = pointed_isomorphism(hom_bundle(identity_hom(A()), kMinus), p);
  CHECK(!none.map);
  CHECK(!none.conflict.empty());

  CHECK(canonical_form(p).encoding == canonical_form(relabel(p, perm)).encoding);

  GroupoidPtr two = trivial_groupoid(ObjectGraph::discrete(2));
  PointedBundle q{unit_bundle(two), 0, 0};
  CHECK_THROWS(pointed_isomorphism(q, q));
}

TEST_CASE("pointed morphism spaces") {
  CHECK(enumerate_pointed_morphisms(point_groupoid(), A(), 0).classes.size() == 3);
  CHECK(enumerate_pointed_morphisms(A(), A(), kZero).classes.size() ==
        enumerate_equivariant_pairs(fixture_A(), fixture_A()).size());
  CHECK(enumerate_pointed_morphisms(A(), A(), kZero).classes.size() == 10);
  CHECK(enumerate_pointed_morphisms(A(), point_groupoid(), kZero).classes.size() == 1);

  MorphismOptions tight;
  tight.max_candidates = 2;
  CHECK_THROWS_AS(enumerate_pointed_morphisms(A(), A(), kZero, tight), ResourceLimit);
}

TEST_CASE("morphism groupoids") {
  MorphismGroupoid pa = morphism_groupoid(point_groupoid(), A(), 0);
  CHECK(find_groupoid_isomorphism(pa.groupoid, A()).has_value());

  MorphismGroupoid aa = morphism_groupoid(A(), A(), kZero);
  CHECK(validate_groupoid(*aa.groupoid).empty());
  CHECK(orbits(*aa.groupoid).size() == unpointed_classes(aa.space).size());

  // The segment's arrows do not continue along its edge, so its point-morphism space is discrete.
  MorphismGroupoid ps = morphism_groupoid(point_groupoid(), segment(), 0);
  CHECK(ps.groupoid->num_objects() == 2);
  CHECK(ps.groupoid->num_arrows() == 4);
  CHECK(ps.groupoid->base.edges().empty());
}

TEST_CASE("evaluation") {
  MorphismGroupoid mor = morphism_groupoid(A(), A(), kZero);
  const FiniteGroupoid& m = *mor.groupoid;
  for (int z = 0; z < m.num_objects(); ++z) {
    const Bundle& rep = mor.space.classes[z].representative.bundle;
    for (ElementId e = 0; e < rep.size(); ++e) {
      ExpElement ze{z, e};
      CHECK(exp_morphism_eval(mor, kNone, ze, m.unit[z], kNone) == ze);
      for (ArrowId a2 = 0; a2 < m.num_arrows(); ++a2) {
        if (m.tgt[a2] != z) continue;
        ExpElement once = exp_morphism_eval(mor, kNone, ze, a2, kNone);
        for (ArrowId a1 = 0; a1 < m.num_arrows(); ++a1) {
          if (m.tgt[a1] != m.src[a2]) continue;
          ExpElement twice = exp_morphism_eval(mor, kNone, once, a1, kNone);
          CHECK(twice == exp_morphism_eval(mor, kNone, ze, m.compose(a2, a1), kNone));
        }
      }
    }
  }
  REQUIRE(m.num_objects() > 1);
  CHECK_THROWS(exp_morphism_eval(mor, kNone, ExpElement{0, 0}, m.unit[1], kNone));
}

TEST_CASE("curry and uncurry") {
  MorphismGroupoid mor = morphism_groupoid(A(), A(), kZero);
  GroupoidPtr pt = point_groupoid();

  // One-point parameter space: curry lands in the orbit of the bundle's own class.
  GroupoidPtr pa = product_groupoid(*pt, *A());
  for (const auto& phi : enumerate_homs(A(), A())) {
    GroupoidHom lifted{pa, A(), phi.obj_map, phi.arrow_map};
    REQUIRE(check_hom(lifted).empty());
    PointedBundle p = hom_bundle(lifted, kZero);
    Curried c = curry_morphism(p.bundle, pt, mor);
    const int cls = mor.space.class_of(hom_bundle(phi, kZero));
    REQUIRE(cls != kNone);
    bool same_orbit = false;
    for (const auto& block : orbits(*mor.groupoid))
      if (std::count(block.begin(), block.end(), cls) && std::count(block.begin(), block.end(), c.psi.obj_map[0]))
        same_orbit = true;
    CHECK(same_orbit);

    Slice s = slice_bundle(uncurry_morphism(c.psi, mor), pt, A(), 0);
    CHECK(iso(s.bundle, hom_bundle(phi, kZero).bundle));
  }

  // A constant psi gives one copy of the representative per object of H.
  for (int z = 0; z < mor.groupoid->num_objects(); ++z) {
    GroupoidHom constant{A(), mor.groupoid, std::vector<ObjectId>(3, z),
                         std::vector<ArrowId>(6, mor.groupoid->unit[z])};
    REQUIRE(check_hom(constant).empty());
    Bundle u = uncurry_morphism(constant, mor);
    CHECK(validate_bundle(u).empty());
    CHECK(u.size() == 3 * mor.space.classes[z].representative.bundle.size());
  }
}
