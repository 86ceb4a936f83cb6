#include "etale/morphisms.hpp"

#include <algorithm>
#include <numeric>

namespace etale {

int MorphismSpace::class_of(const PointedBundle& p) const {
  auto it = index.find(canonical_form(p).encoding);
  return it == index.end() ? kNone : it->second;
}

MorphismSpace enumerate_pointed_morphisms(const GroupoidPtr& g, const GroupoidPtr& gp, ObjectId star,
                                          const MorphismOptions& options) {
  if (!is_connected(*g)) throw Error("pointed morphisms need a connected source groupoid");
  if (star < 0 || star >= g->num_objects()) throw Error("basepoint is not an object of the source");
  Localization loc = localize(g, OpenCover::by_edges(g->base));
  const int base_piece = loc.cover.pieces_containing(star).front();
  std::map<std::vector<int>, CanonicalForm> found;
  HomSearchOptions search;
  search.max_candidates = options.max_candidates;
  for_each_hom(
      loc.groupoid, gp,
      [&](const GroupoidHom& phi) {
        CanonicalForm c = canonical_form(bundle_from_cocycle(loc, phi, base_piece, star));
        if (!found.count(c.encoding)) {
          if (found.size() >= options.max_classes) throw ResourceLimit("morphism class cap exceeded");
          found.emplace(c.encoding, std::move(c));
        }
        return true;
      },
      search);
  std::vector<CanonicalForm> forms;
  for (auto& [enc, c] : found) forms.push_back(std::move(c));
  std::stable_sort(forms.begin(), forms.end(), [](const CanonicalForm& a, const CanonicalForm& b) {
    if (a.bundle.bundle.size() != b.bundle.bundle.size()) return a.bundle.bundle.size() < b.bundle.bundle.size();
    return a.encoding < b.encoding;
  });
  MorphismSpace space{g, gp, star, {}, {}};
  for (auto& c : forms) {
    MorphismClass m;
    m.target_anchor = c.bundle.bundle.t[c.bundle.base];
    m.encoding = c.encoding;
    m.digest = c.digest;
    m.representative = std::move(c.bundle);
    space.index[m.encoding] = static_cast<int>(space.classes.size());
    space.classes.push_back(std::move(m));
  }
  return space;
}

std::vector<std::vector<int>> unpointed_classes(const MorphismSpace& space) {
  std::vector<std::vector<int>> blocks;
  for (int z = 0; z < static_cast<int>(space.classes.size()); ++z) {
    bool placed = false;
    for (auto& block : blocks) {
      const Bundle& other = space.classes[block.front()].representative.bundle;
      if (bundle_isomorphism(space.classes[z].representative.bundle, other)) {
        block.push_back(z);
        placed = true;
        break;
      }
    }
    if (!placed) blocks.push_back({z});
  }
  return blocks;
}

// ---------------------------------------------------------------- morphism groupoid

ArrowId MorphismGroupoid::arrow(ArrowId gp, int cls) const {
  auto it = arrow_index.find({gp, cls});
  return it == arrow_index.end() ? kNone : it->second;
}

std::vector<ElementId> MorphismGroupoid::transport(ArrowId mor_arrow) const {
  auto [gp, z] = arrow_label.at(mor_arrow);
  const PointedBundle& rep = space.classes[z].representative;
  PointedBundle moved{rep.bundle, rep.bundle.act_left(gp, rep.base), rep.star};
  const PointedBundle& target = space.classes[groupoid->tgt[mor_arrow]].representative;
  PointedIsoResult r = pointed_isomorphism(moved, target);
  if (!r.map) throw Error("morphism arrow has no transport: " + r.conflict);
  return *r.map;
}

MorphismGroupoid morphism_groupoid(MorphismSpace space) {
  MorphismGroupoid out;
  out.space = std::move(space);
  const MorphismSpace& sp = out.space;
  const FiniteGroupoid& gl = *sp.target;
  const int nz = static_cast<int>(sp.classes.size());
  auto g = std::make_shared<FiniteGroupoid>();

  std::vector<std::string> names;
  for (int z = 0; z < nz; ++z) names.push_back("z" + std::to_string(z));
  std::vector<std::pair<ObjectId, ObjectId>> edges;
  for (int a = 0; a < nz; ++a)
    for (int b = a + 1; b < nz; ++b) {
      if (!gl.base.adjacent_or_equal(sp.classes[a].target_anchor, sp.classes[b].target_anchor)) continue;
      if (find_deformation(sp.classes[a].representative, sp.classes[b].representative)) edges.emplace_back(a, b);
    }
  g->base = ObjectGraph(std::move(names), std::move(edges));

  for (int z = 0; z < nz; ++z)
    for (ArrowId gp : gl.arrows_from(sp.classes[z].target_anchor)) {
      ArrowId id = static_cast<ArrowId>(out.arrow_label.size());
      out.arrow_label.emplace_back(gp, z);
      out.arrow_index[{gp, z}] = id;
      const PointedBundle& rep = sp.classes[z].representative;
      int target = sp.class_of(PointedBundle{rep.bundle, rep.bundle.act_left(gp, rep.base), rep.star});
      if (target == kNone) throw Error("morphism enumeration is not closed under the target action");
      g->arrow_names.push_back("(" + gl.describe_arrow(gp) + ",z" + std::to_string(z) + ")");
      g->src.push_back(z);
      g->tgt.push_back(target);
    }
  for (int z = 0; z < nz; ++z) g->unit.push_back(out.arrow(gl.unit[sp.classes[z].target_anchor], z));
  for (ArrowId a = 0; a < g->num_arrows(); ++a) {
    auto [gp, z] = out.arrow_label[a];
    g->inv.push_back(out.arrow(gl.inv[gp], g->tgt[a]));
  }
  for (ArrowId a = 0; a < g->num_arrows(); ++a) {
    auto [gp, z] = out.arrow_label[a];
    for (ArrowId hp : gl.arrows_from(gl.tgt[gp])) {
      ArrowId b = out.arrow(hp, g->tgt[a]);
      g->set_compose(b, a, out.arrow(gl.compose(hp, gp), z));
    }
  }
  g->sheets.assign(g->num_arrows(), {});
  for (ArrowId a = 0; a < g->num_arrows(); ++a) {
    auto [gp, z] = out.arrow_label[a];
    for (ObjectId w : g->base.neighbors(z)) {
      ArrowId moved = gl.continuation_or_self(gp, sp.classes[w].target_anchor);
      if (moved == kNone) continue;
      ArrowId b = out.arrow(moved, w);
      if (b != kNone) g->sheets[a].emplace_back(w, b);
    }
  }
  out.groupoid = g;
  return out;
}

MorphismGroupoid morphism_groupoid(const GroupoidPtr& g, const GroupoidPtr& gp, ObjectId star,
                                   const MorphismOptions& options) {
  return morphism_groupoid(enumerate_pointed_morphisms(g, gp, star, options));
}

ExpElement exp_morphism_eval(const MorphismGroupoid& mor, ArrowId gp, const ExpElement& ze, ArrowId mor_arrow,
                             ArrowId g) {
  const auto& classes = mor.space.classes;
  if (ze.cls < 0 || ze.cls >= static_cast<int>(classes.size())) throw Error("unknown morphism class");
  const Bundle& e = classes[ze.cls].representative.bundle;
  if (ze.element < 0 || ze.element >= e.size()) throw Error("element is not in the class representative");
  if (mor_arrow < 0 || mor_arrow >= mor.groupoid->num_arrows()) throw Error("unknown morphism groupoid arrow");
  if (mor.groupoid->tgt[mor_arrow] != ze.cls) throw Error("morphism arrow does not end at the element's class");
  ElementId x = ze.element;
  if (gp != kNone) {
    if (gp < 0 || gp >= e.left->num_arrows() || e.left->src[gp] != e.t[x])
      throw Error("left arrow is not composable with the element");
    x = e.act_left(gp, x);
  }
  if (g != kNone) {
    if (g < 0 || g >= e.right->num_arrows() || e.right->tgt[g] != e.s[x])
      throw Error("right arrow is not composable with the element");
    x = e.act_right(x, g);
  }
  std::vector<ElementId> m = mor.transport(mor_arrow);
  auto it = std::find(m.begin(), m.end(), x);
  return {mor.groupoid->src[mor_arrow], static_cast<ElementId>(it - m.begin())};
}

// ---------------------------------------------------------------- curry / uncurry

Slice slice_bundle(const Bundle& p, const GroupoidPtr& h, const GroupoidPtr& g, ObjectId v) {
  const int ng = g->num_objects();
  Slice out;
  std::vector<ElementId> local(p.size(), kNone);
  for (ElementId e = 0; e < p.size(); ++e)
    if (p.s[e] / ng == v) {
      local[e] = static_cast<ElementId>(out.elements.size());
      out.elements.push_back(e);
    }
  const int n = static_cast<int>(out.elements.size());
  Bundle& b = out.bundle;
  b.left = p.left;
  b.right = g;
  b.left_act.assign(static_cast<std::size_t>(p.left->num_arrows()) * n, kNone);
  b.right_act.assign(static_cast<std::size_t>(n) * g->num_arrows(), kNone);
  b.sheets.assign(n, {});
  for (int k = 0; k < n; ++k) {
    ElementId e = out.elements[k];
    b.s.push_back(p.s[e] % ng);
    b.t.push_back(p.t[e]);
    b.labels.push_back(p.label(e));
    for (ArrowId gp = 0; gp < p.left->num_arrows(); ++gp) {
      ElementId f = p.act_left(gp, e);
      if (f != kNone) b.left_act[gp * n + k] = local[f];
    }
    for (ArrowId a = 0; a < g->num_arrows(); ++a) {
      ElementId f = p.act_right(e, product_arrow(*g, h->unit[v], a));
      if (f != kNone) b.right_act[k * g->num_arrows() + a] = local[f];
    }
    for (auto [y, f] : p.sheets[e])
      if (y / ng == v) b.sheets[k].emplace_back(y % ng, local[f]);
  }
  return out;
}

Curried curry_morphism(const Bundle& p, const GroupoidPtr& h, const MorphismGroupoid& mor,
                       const std::optional<OpenCover>& cover) {
  const GroupoidPtr& g = mor.space.source;
  const ObjectId star = mor.space.star;
  if (!same_groupoid(p.left, mor.space.target)) throw Error("bundle target groupoid differs from the morphism space");
  auto hg = product_groupoid(*h, *g);
  if (!same_groupoid(p.right, hg)) throw Error("bundle is not over the product of the parameter and source groupoids");
  Report rep = validate_bundle(p);
  if (!rep.empty()) throw Error("bundle is invalid: " + rep.front());

  const bool trivial = !cover.has_value();
  Curried out;
  out.localization = localize(h, trivial ? OpenCover::trivial(h->num_objects()) : *cover);
  const Localization& loc = out.localization;
  const FiniteGroupoid& hu = *loc.groupoid;
  const FiniteGroupoid& gl = *p.left;

  // sigma_i(v) over (v, *), spread along H-edges inside each piece.
  std::vector<ElementId> sigma(hu.num_objects(), kNone);
  for (std::size_t i = 0; i < loc.cover.pieces.size(); ++i) {
    std::vector<ObjectId> piece = loc.cover.pieces[i];
    std::sort(piece.begin(), piece.end());
    ObjectId first = piece.front();
    ObjectId pstar = product_object(*g, first, star);
    for (ElementId e = 0; e < p.size(); ++e)
      if (p.s[e] == pstar) {
        sigma[loc.object(static_cast<int>(i), first)] = e;
        break;
      }
    std::vector<ObjectId> queue{first};
    for (std::size_t head = 0; head < queue.size(); ++head) {
      ObjectId v = queue[head];
      ElementId e = sigma[loc.object(static_cast<int>(i), v)];
      for (ObjectId w : h->base.neighbors(v)) {
        ObjectId lw = loc.object(static_cast<int>(i), w);
        if (lw == kNone || sigma[lw] != kNone) continue;
        sigma[lw] = p.continuation(e, product_object(*g, w, star));
        if (sigma[lw] == kNone) throw Error("bundle has no continuation along a parameter edge");
        queue.push_back(w);
      }
    }
  }

  GroupoidHom psi{trivial ? h : loc.groupoid, mor.groupoid, {}, {}};
  for (ObjectId o = 0; o < hu.num_objects(); ++o) {
    ObjectId v = loc.object_label[o].second;
    Slice slice = slice_bundle(p, h, g, v);
    ElementId local = static_cast<ElementId>(std::find(slice.elements.begin(), slice.elements.end(), sigma[o]) -
                                             slice.elements.begin());
    int z = mor.space.class_of(PointedBundle{slice.bundle, local, star});
    if (z == kNone) throw Error("slice over " + h->base.name(v) + " is not a known morphism class");
    psi.obj_map.push_back(z);
  }
  for (ArrowId a = 0; a < hu.num_arrows(); ++a) {
    auto [j, hh, i] = loc.arrow_label[a];
    ObjectId v = h->src[hh];
    ElementId from = sigma[loc.object(i, v)];
    ElementId lhs = p.act_right(sigma[loc.object(j, h->tgt[hh])], product_arrow(*g, hh, g->unit[star]));
    ArrowId f = kNone;
    for (ArrowId gp : gl.arrows_from(p.t[from]))
      if (p.act_left(gp, from) == lhs) {
        f = gp;
        break;
      }
    if (f == kNone) throw Error("no transition arrow solves the curry equation");
    ArrowId image = mor.arrow(f, psi.obj_map[hu.src[a]]);
    if (image == kNone) throw Error("transition arrow is not an arrow of the morphism groupoid");
    psi.arrow_map.push_back(image);
  }
  rep = check_hom(psi);
  if (!rep.empty()) throw Error("curried map is not a homomorphism: " + rep.front());
  out.psi = std::move(psi);
  return out;
}

Bundle uncurry_morphism(const GroupoidHom& psi, const MorphismGroupoid& mor) {
  Report rep = check_hom(psi);
  if (!rep.empty()) throw Error("parameter map is not a homomorphism: " + rep.front());
  if (psi.target != mor.groupoid && !same_groupoid(psi.target, mor.groupoid))
    throw Error("parameter map does not land in the morphism groupoid");
  const GroupoidPtr& k = psi.source;
  const GroupoidPtr& g = mor.space.source;
  const FiniteGroupoid& gl = *mor.space.target;
  const auto& classes = mor.space.classes;
  auto kg = product_groupoid(*k, *g);

  // Element (v, e) with e in the representative of psi0(v).
  std::vector<int> offset(k->num_objects() + 1, 0);
  for (ObjectId v = 0; v < k->num_objects(); ++v)
    offset[v + 1] = offset[v] + classes[psi.obj_map[v]].representative.bundle.size();
  const int n = offset.back();
  auto rep_of = [&](ObjectId v) -> const Bundle& { return classes[psi.obj_map[v]].representative.bundle; };

  Bundle b;
  b.left = mor.space.target;
  b.right = kg;
  b.left_act.assign(static_cast<std::size_t>(gl.num_arrows()) * n, kNone);
  b.right_act.assign(static_cast<std::size_t>(n) * kg->num_arrows(), kNone);
  b.sheets.assign(n, {});
  for (ObjectId v = 0; v < k->num_objects(); ++v) {
    const Bundle& e = rep_of(v);
    for (ElementId x = 0; x < e.size(); ++x) {
      b.s.push_back(product_object(*g, v, e.s[x]));
      b.t.push_back(e.t[x]);
      b.labels.push_back("(" + k->base.name(v) + "," + e.label(x) + ")");
      for (ArrowId gp = 0; gp < gl.num_arrows(); ++gp) {
        ElementId y = e.act_left(gp, x);
        if (y != kNone) b.left_act[gp * n + offset[v] + x] = offset[v] + y;
      }
    }
  }
  // Right action: (w, e).(a, g) = (v, m^{-1}(e.g)) for a: v -> w.
  std::map<ArrowId, std::vector<ElementId>> inverse_transport;
  for (ArrowId a = 0; a < k->num_arrows(); ++a) {
    ArrowId ma = psi.arrow_map[a];
    if (!inverse_transport.count(ma)) {
      std::vector<ElementId> m = mor.transport(ma);
      std::vector<ElementId> inv(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) inv[m[i]] = static_cast<ElementId>(i);
      inverse_transport[ma] = std::move(inv);
    }
    const auto& minv = inverse_transport[ma];
    ObjectId v = k->src[a], w = k->tgt[a];
    const Bundle& ew = rep_of(w);
    for (ElementId x = 0; x < ew.size(); ++x)
      for (ArrowId ga = 0; ga < g->num_arrows(); ++ga) {
        if (g->tgt[ga] != ew.s[x]) continue;
        ElementId moved = ew.act_right(x, ga);
        b.right_act[(offset[w] + x) * kg->num_arrows() + product_arrow(*g, a, ga)] = offset[v] + minv[moved];
      }
  }
  // Continuations: along G inside a slice, along K through the deformation between adjacent classes.
  for (ObjectId v = 0; v < k->num_objects(); ++v) {
    const Bundle& e = rep_of(v);
    for (ElementId x = 0; x < e.size(); ++x)
      for (auto [y, f] : e.sheets[x]) b.sheets[offset[v] + x].emplace_back(product_object(*g, v, y), offset[v] + f);
    for (ObjectId w : k->base.neighbors(v)) {
      int zv = psi.obj_map[v], zw = psi.obj_map[w];
      std::vector<ElementId> d(e.size());
      if (zv == zw) {
        std::iota(d.begin(), d.end(), 0);
      } else {
        auto def = find_deformation(classes[zv].representative, classes[zw].representative);
        if (!def) throw Error("adjacent parameters map to classes without a deformation");
        d = *def;
      }
      for (ElementId x = 0; x < e.size(); ++x)
        b.sheets[offset[v] + x].emplace_back(product_object(*g, w, e.s[x]), offset[w] + d[x]);
    }
  }
  for (auto& s : b.sheets) std::sort(s.begin(), s.end());
  return b;
}

}  // namespace etale
