#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etale/groupoid.hpp"

namespace etale {

// A finite (G', G)-bundle: G' acts on the left along t, G acts on the right along s.
// Action tables are dense; -1 marks an undefined product.
struct Bundle {
  GroupoidPtr left;   // G'
  GroupoidPtr right;  // G
  std::vector<ObjectId> s;  // element -> object of G
  std::vector<ObjectId> t;  // element -> object of G'
  std::vector<ElementId> left_act;   // [g' * size + e]
  std::vector<ElementId> right_act;  // [e * |G arrows| + g]
  Sheets sheets;  // element -> continuations over neighbors of s(e)
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(s.size()); }
  ElementId act_left(ArrowId gp, ElementId e) const { return left_act[gp * size() + e]; }
  ElementId act_right(ElementId e, ArrowId g) const { return right_act[e * right->num_arrows() + g]; }
  ElementId continuation(ElementId e, ObjectId y) const;
  ElementId continuation_or_self(ElementId e, ObjectId y) const { return y == s[e] ? e : continuation(e, y); }
  std::string label(ElementId e) const;
};

struct PointedBundle {
  Bundle bundle;
  ElementId base = kNone;
  ObjectId star = kNone;
};

Report validate_bundle(const Bundle& e);
// Additional check used by inversion: t surjective and each t-fiber a free transitive G-set.
Report check_right_principal(const Bundle& e);

// The unit (G, G)-bundle: elements are arrows of G.
Bundle unit_bundle(const GroupoidPtr& g);

// E_{phi,U} for a cocycle phi: G_U -> G'. Pointed at [base_piece, phi(1), star].
PointedBundle bundle_from_cocycle(const Localization& loc, const GroupoidHom& phi, int base_piece, ObjectId star);
// E_phi for a homomorphism phi: G -> G' (trivial cover).
PointedBundle hom_bundle(const GroupoidHom& phi, ObjectId star);
// The section x -> (phi(1_x), x) of hom_bundle(phi, .).
std::vector<ElementId> canonical_section(const GroupoidHom& phi);

// Solves sigma(t g).g = phi(g).sigma(s g). Throws when sigma is not a section or phi is not a homomorphism.
GroupoidHom hom_from_section(const Bundle& e, const std::vector<ElementId>& sigma);

Bundle compose_bundles(const Bundle& outer, const Bundle& inner);
std::optional<Bundle> invert_bundle(const Bundle& e);

// Element bijection commuting with s, t, both actions and continuations.
bool is_bundle_isomorphism(const Bundle& a, const Bundle& b, const std::vector<ElementId>& map);

struct PointedIsoResult {
  std::optional<std::vector<ElementId>> map;
  std::string conflict;  // first offending generator when map is empty
};
// Lemma-style propagation from the basepoint. A seed randomizes the visiting order.
// Throws when the right groupoid is disconnected.
PointedIsoResult pointed_isomorphism(const PointedBundle& p, const PointedBundle& q,
                                     std::optional<std::uint64_t> seed = std::nullopt);
// Unpointed isomorphism by trying every basepoint image.
std::optional<std::vector<ElementId>> bundle_isomorphism(const Bundle& a, const Bundle& b);

// Canonical relabelling by breadth-first discovery from the basepoint.
struct CanonicalForm {
  PointedBundle bundle;           // relabelled, basepoint 0
  std::vector<ElementId> order;   // new label -> old element
  std::vector<int> encoding;
  std::uint64_t digest = 0;
};
CanonicalForm canonical_form(const PointedBundle& p);

// A small deformation P ~> Q: s-preserving bijection moving t to adjacent-or-equal objects,
// compatible with both actions and continuations, sending basepoint to basepoint.
std::optional<std::vector<ElementId>> find_deformation(const PointedBundle& p, const PointedBundle& q);

bool same_groupoid(const GroupoidPtr& a, const GroupoidPtr& b);

}  // namespace etale
