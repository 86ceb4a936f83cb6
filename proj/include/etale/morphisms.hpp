#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "etale/bundle.hpp"

namespace etale {

struct MorphismClass {
  PointedBundle representative;  // canonical relabelling, basepoint 0
  ObjectId target_anchor = kNone;
  std::vector<int> encoding;
  std::uint64_t digest = 0;
};

struct MorphismOptions {
  std::size_t max_candidates = 5'000'000;  // cocycle candidates examined
  std::size_t max_classes = 100'000;
};

// Pointed morphisms G -> G' at star, one canonical representative per class,
// ordered by (size, encoding).
struct MorphismSpace {
  GroupoidPtr source;  // G
  GroupoidPtr target;  // G'
  ObjectId star = kNone;
  std::vector<MorphismClass> classes;
  std::map<std::vector<int>, int> index;  // encoding -> class

  int class_of(const PointedBundle& p) const;  // kNone when absent
};

// Exhaustive over cocycles on the edge cover of G. Throws ResourceLimit past the caps,
// Error when G is disconnected.
MorphismSpace enumerate_pointed_morphisms(const GroupoidPtr& g, const GroupoidPtr& gp, ObjectId star,
                                          const MorphismOptions& options = {});

// Partition of classes by isomorphism of the underlying (unpointed) bundles.
std::vector<std::vector<int>> unpointed_classes(const MorphismSpace& space);

// Objects are classes; arrow (g', z) goes from z to the class of (E_z, g'.e0).
struct MorphismGroupoid {
  MorphismSpace space;
  GroupoidPtr groupoid;
  std::vector<std::pair<ArrowId, int>> arrow_label;  // arrow -> (g', class)
  std::map<std::pair<ArrowId, int>, ArrowId> arrow_index;

  ArrowId arrow(ArrowId gp, int cls) const;
  // Unique pointed isomorphism from (E_src, g'.e0) onto the target class representative.
  std::vector<ElementId> transport(ArrowId mor_arrow) const;
};
MorphismGroupoid morphism_groupoid(MorphismSpace space);
MorphismGroupoid morphism_groupoid(const GroupoidPtr& g, const GroupoidPtr& gp, ObjectId star,
                                   const MorphismOptions& options = {});

// An element of the tautological bundle: element `element` of the representative of class `cls`.
struct ExpElement {
  int cls = kNone;
  ElementId element = kNone;
  friend bool operator==(const ExpElement&, const ExpElement&) = default;
};
// g'.(z,e).((g'',z'),g) = (z', m^{-1}(g'.e.g)); pass kNone for g' or g to skip that side.
ExpElement exp_morphism_eval(const MorphismGroupoid& mor, ArrowId gp, const ExpElement& ze, ArrowId mor_arrow,
                             ArrowId g);

struct Curried {
  GroupoidHom psi;           // from H (trivial cover) or H_U into the morphism groupoid
  Localization localization;  // of H over the chosen cover
};
// P is a (G', H x G)-bundle with H x G = product_groupoid(H, G).
Curried curry_morphism(const Bundle& p, const GroupoidPtr& h, const MorphismGroupoid& mor,
                       const std::optional<OpenCover>& cover = std::nullopt);
// psi: K -> Mor; returns the (G', K x G)-bundle obtained by evaluating EXP.
Bundle uncurry_morphism(const GroupoidHom& psi, const MorphismGroupoid& mor);

// The slice of a (G', H x G)-bundle over {v} x G, as a (G', G)-bundle; `elements` maps back.
struct Slice {
  Bundle bundle;
  std::vector<ElementId> elements;
};
Slice slice_bundle(const Bundle& p, const GroupoidPtr& h, const GroupoidPtr& g, ObjectId v);

}  // namespace etale
