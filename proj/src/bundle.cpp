#include "etale/bundle.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

namespace etale {

namespace {

constexpr std::size_t kMaxReport = 64;

void note(Report& r, std::string msg) {
  if (r.size() < kMaxReport) r.push_back(std::move(msg));
}

struct MinUnionFind {
  std::vector<int> parent;
  explicit MinUnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Collapses a union-find into classes ordered by their minimum member.
struct Quotient {
  std::vector<int> class_of;     // raw -> class
  std::vector<int> representative;  // class -> minimum raw member
};

Quotient quotient(MinUnionFind& uf) {
  Quotient q;
  const int n = static_cast<int>(uf.parent.size());
  q.class_of.assign(n, -1);
  for (int x = 0; x < n; ++x) {
    int r = uf.find(x);
    if (q.class_of[r] == -1) {
      q.class_of[r] = static_cast<int>(q.representative.size());
      q.representative.push_back(r);
    }
    q.class_of[x] = q.class_of[r];
  }
  return q;
}

Bundle empty_bundle(const GroupoidPtr& left, const GroupoidPtr& right, int n) {
  Bundle b;
  b.left = left;
  b.right = right;
  b.s.assign(n, kNone);
  b.t.assign(n, kNone);
  b.left_act.assign(static_cast<std::size_t>(left->num_arrows()) * n, kNone);
  b.right_act.assign(static_cast<std::size_t>(n) * right->num_arrows(), kNone);
  b.sheets.assign(n, {});
  b.labels.assign(n, "");
  return b;
}

void sort_sheets(Bundle& b) {
  for (auto& s : b.sheets) std::sort(s.begin(), s.end());
}

}  // namespace

bool same_groupoid(const GroupoidPtr& a, const GroupoidPtr& b) {
  return a == b || (a && b && structurally_equal(*a, *b));
}

ElementId Bundle::continuation(ElementId e, ObjectId y) const {
  for (auto [obj, f] : sheets[e])
    if (obj == y) return f;
  return kNone;
}

std::string Bundle::label(ElementId e) const {
  if (e >= 0 && e < static_cast<int>(labels.size()) && !labels[e].empty()) return labels[e];
  return "e" + std::to_string(e);
}

// ---------------------------------------------------------------- validation

Report validate_bundle(const Bundle& b) {
  Report r;
  if (!b.left || !b.right) {
    note(r, "bundle has no groupoids attached");
    return r;
  }
  const FiniteGroupoid& gl = *b.left;
  const FiniteGroupoid& gr = *b.right;
  const int n = b.size(), ml = gl.num_arrows(), mr = gr.num_arrows();
  if (static_cast<int>(b.t.size()) != n || static_cast<int>(b.left_act.size()) != ml * n ||
      static_cast<int>(b.right_act.size()) != n * mr || static_cast<int>(b.sheets.size()) != n) {
    note(r, "bundle table sizes disagree with the element count");
    return r;
  }
  for (ElementId e = 0; e < n; ++e)
    if (b.s[e] < 0 || b.s[e] >= gr.num_objects() || b.t[e] < 0 || b.t[e] >= gl.num_objects()) {
      note(r, "element " + b.label(e) + " has an anchor outside the object sets");
      return r;
    }
  for (ArrowId g = 0; g < ml; ++g)
    for (ElementId e = 0; e < n; ++e) {
      ElementId v = b.act_left(g, e);
      const bool composable = gl.src[g] == b.t[e];
      if (composable != (v != kNone)) {
        note(r, "left action by " + gl.describe_arrow(g) + " on " + b.label(e) +
                    (composable ? " is missing" : " is defined but not composable"));
        continue;
      }
      if (v == kNone) continue;
      if (v < 0 || v >= n) {
        note(r, "left action entry out of range");
        return r;
      }
      if (b.s[v] != b.s[e] || b.t[v] != gl.tgt[g])
        note(r, "left action by " + gl.describe_arrow(g) + " on " + b.label(e) + " moves the wrong anchor");
    }
  for (ElementId e = 0; e < n; ++e)
    for (ArrowId g = 0; g < mr; ++g) {
      ElementId v = b.act_right(e, g);
      const bool composable = gr.tgt[g] == b.s[e];
      if (composable != (v != kNone)) {
        note(r, "right action by " + gr.describe_arrow(g) + " on " + b.label(e) +
                    (composable ? " is missing" : " is defined but not composable"));
        continue;
      }
      if (v == kNone) continue;
      if (v < 0 || v >= n) {
        note(r, "right action entry out of range");
        return r;
      }
      if (b.s[v] != gr.src[g] || b.t[v] != b.t[e])
        note(r, "right action by " + gr.describe_arrow(g) + " on " + b.label(e) + " moves the wrong anchor");
    }
  if (!r.empty()) return r;

  for (ElementId e = 0; e < n; ++e) {
    if (b.act_left(gl.unit[b.t[e]], e) != e) note(r, "left unit law fails at " + b.label(e));
    if (b.act_right(e, gr.unit[b.s[e]]) != e) note(r, "right unit law fails at " + b.label(e));
  }
  for (const auto& [k, gh] : gl.comp) {
    ArrowId g = static_cast<ArrowId>(k >> 32), h = static_cast<ArrowId>(k & 0xffffffffU);
    for (ElementId e = 0; e < n; ++e)
      if (b.t[e] == gl.src[h] && b.act_left(gh, e) != b.act_left(g, b.act_left(h, e)))
        note(r, "left action not associative at (" + gl.describe_arrow(g) + "," + gl.describe_arrow(h) + "," +
                    b.label(e) + ")");
  }
  for (const auto& [k, gh] : gr.comp) {
    ArrowId g = static_cast<ArrowId>(k >> 32), h = static_cast<ArrowId>(k & 0xffffffffU);
    for (ElementId e = 0; e < n; ++e)
      if (b.s[e] == gr.tgt[g] && b.act_right(e, gh) != b.act_right(b.act_right(e, g), h))
        note(r, "right action not associative at (" + b.label(e) + "," + gr.describe_arrow(g) + "," +
                    gr.describe_arrow(h) + ")");
  }
  for (ArrowId gp = 0; gp < ml; ++gp)
    for (ElementId e = 0; e < n; ++e) {
      if (gl.src[gp] != b.t[e]) continue;
      for (ArrowId g = 0; g < mr; ++g) {
        if (gr.tgt[g] != b.s[e]) continue;
        if (b.act_right(b.act_left(gp, e), g) != b.act_left(gp, b.act_right(e, g)))
          note(r, "actions do not commute at (" + gl.describe_arrow(gp) + "," + b.label(e) + "," +
                      gr.describe_arrow(g) + ")");
      }
    }

  // Left principality.
  std::vector<char> hit(gr.num_objects(), 0);
  for (ElementId e = 0; e < n; ++e) hit[b.s[e]] = 1;
  for (ObjectId x = 0; x < gr.num_objects(); ++x)
    if (!hit[x]) note(r, "principality: s is not surjective, nothing lies over " + gr.base.name(x));
  std::vector<int> fiber_size(gr.num_objects(), 0);
  for (ElementId e = 0; e < n; ++e) ++fiber_size[b.s[e]];
  for (ElementId e = 0; e < n; ++e) {
    std::set<ElementId> orbit;
    int count = 0;
    for (ArrowId gp = 0; gp < ml; ++gp)
      if (gl.src[gp] == b.t[e]) {
        orbit.insert(b.act_left(gp, e));
        ++count;
      }
    if (static_cast<int>(orbit.size()) != count) note(r, "principality: left action is not free at " + b.label(e));
    if (static_cast<int>(orbit.size()) != fiber_size[b.s[e]])
      note(r, "principality: left action is not transitive on the fiber of " + b.label(e));
  }

  // Continuations: s is a local homeomorphism and both actions follow the sheets.
  for (ElementId e = 0; e < n; ++e) {
    for (ObjectId y : gr.base.neighbors(b.s[e]))
      if (b.continuation(e, y) == kNone)
        note(r, "element " + b.label(e) + " has no continuation over " + gr.base.name(y));
    for (auto [y, f] : b.sheets[e]) {
      if (y < 0 || y >= gr.num_objects() || f < 0 || f >= n) {
        note(r, "continuation of " + b.label(e) + " out of range");
        continue;
      }
      if (!gr.base.adjacent(b.s[e], y) || b.s[f] != y)
        note(r, "continuation of " + b.label(e) + " over " + gr.base.name(y) + " does not lie over a neighbor");
      if (!gl.base.adjacent_or_equal(b.t[e], b.t[f]))
        note(r, "continuation of " + b.label(e) + " over " + gr.base.name(y) + " tears t apart");
      if (b.continuation(f, b.s[e]) != e)
        note(r, "continuation of " + b.label(e) + " over " + gr.base.name(y) + " is not symmetric");
    }
  }
  if (!r.empty()) return r;
  for (ElementId e = 0; e < n; ++e)
    for (ArrowId g = 0; g < mr; ++g) {
      if (gr.tgt[g] != b.s[e] || g >= static_cast<int>(gr.sheets.size())) continue;
      for (auto [y, gy] : gr.sheets[g]) {
        ElementId ey = b.continuation(e, gr.tgt[gy]);
        ElementId lhs = b.continuation(b.act_right(e, g), y);
        if (ey != kNone && lhs != kNone && lhs != b.act_right(ey, gy))
          note(r, "right action by " + gr.describe_arrow(g) + " on " + b.label(e) + " breaks continuity over " +
                      gr.base.name(y));
      }
    }
  for (ArrowId gp = 0; gp < ml; ++gp)
    for (ElementId e = 0; e < n; ++e) {
      if (gl.src[gp] != b.t[e]) continue;
      for (auto [y, ey] : b.sheets[e]) {
        ArrowId gpy = gl.continuation_or_self(gp, b.t[ey]);
        if (gpy == kNone) continue;
        ElementId lhs = b.continuation(b.act_left(gp, e), y);
        if (lhs != b.act_left(gpy, ey))
          note(r, "left action by " + gl.describe_arrow(gp) + " on " + b.label(e) + " breaks continuity over " +
                      gr.base.name(y));
      }
    }
  return r;
}

Report check_right_principal(const Bundle& b) {
  Report r;
  const FiniteGroupoid& gl = *b.left;
  const FiniteGroupoid& gr = *b.right;
  std::vector<int> fiber(gl.num_objects(), 0);
  for (ElementId e = 0; e < b.size(); ++e) ++fiber[b.t[e]];
  for (ObjectId x = 0; x < gl.num_objects(); ++x)
    if (fiber[x] == 0) note(r, "t is not surjective, nothing lies over " + gl.base.name(x));
  for (ElementId e = 0; e < b.size(); ++e) {
    std::set<ElementId> orbit;
    int count = 0;
    for (ArrowId g = 0; g < gr.num_arrows(); ++g)
      if (gr.tgt[g] == b.s[e]) {
        orbit.insert(b.act_right(e, g));
        ++count;
      }
    if (static_cast<int>(orbit.size()) != count) note(r, "right action is not free at " + b.label(e));
    if (static_cast<int>(orbit.size()) != fiber[b.t[e]])
      note(r, "right action is not transitive on the t-fiber of " + b.label(e));
  }
  return r;
}

// ---------------------------------------------------------------- constructions

Bundle unit_bundle(const GroupoidPtr& g) {
  const int n = g->num_arrows();
  Bundle b = empty_bundle(g, g, n);
  for (ArrowId e = 0; e < n; ++e) {
    b.s[e] = g->src[e];
    b.t[e] = g->tgt[e];
    b.labels[e] = g->describe_arrow(e);
    for (ArrowId h = 0; h < n; ++h) {
      b.left_act[h * n + e] = g->compose(h, e);
      b.right_act[e * n + h] = g->compose(e, h);
    }
    if (e < static_cast<int>(g->sheets.size())) b.sheets[e] = g->sheets[e];
  }
  sort_sheets(b);
  return b;
}

PointedBundle bundle_from_cocycle(const Localization& loc, const GroupoidHom& phi, int base_piece, ObjectId star) {
  if (phi.source != loc.groupoid) throw Error("cocycle is not defined on the given localization");
  Report rep = check_hom(phi);
  if (!rep.empty()) throw Error("cocycle is not a homomorphism: " + rep.front());
  if (base_piece < 0 || base_piece >= static_cast<int>(loc.cover.pieces.size()) ||
      loc.object(base_piece, star) == kNone)
    throw Error("basepoint object is not in the chosen cover piece");
  const FiniteGroupoid& gl = *phi.target;
  const FiniteGroupoid& g = *loc.projection.target;
  const FiniteGroupoid& gu = *loc.groupoid;
  const int ml = gl.num_arrows();

  // Raw triples (local object, g') with src g' = phi0(local object).
  std::vector<std::pair<ObjectId, ArrowId>> raw;
  std::unordered_map<std::int64_t, int> raw_index;
  auto raw_key = [ml](ObjectId o, ArrowId gp) { return static_cast<std::int64_t>(o) * ml + gp; };
  for (ObjectId o = 0; o < gu.num_objects(); ++o)
    for (ArrowId gp : gl.arrows_from(phi.obj_map[o])) {
      raw_index[raw_key(o, gp)] = static_cast<int>(raw.size());
      raw.emplace_back(o, gp);
    }
  auto raw_of = [&](ObjectId o, ArrowId gp) {
    auto it = raw_index.find(raw_key(o, gp));
    if (it == raw_index.end()) throw Error("internal: missing raw bundle element");
    return it->second;
  };

  MinUnionFind uf(static_cast<int>(raw.size()));
  for (std::size_t k = 0; k < raw.size(); ++k) {
    auto [o, gp] = raw[k];
    auto [i, x] = loc.object_label[o];
    for (int j : loc.cover.pieces_containing(x)) {
      if (j == i) continue;
      ArrowId overlap = phi.arrow_map[loc.arrow(i, g.unit[x], j)];
      uf.unite(static_cast<int>(k), raw_of(loc.object(j, x), gl.compose(gp, overlap)));
    }
  }
  Quotient q = quotient(uf);
  const int n = static_cast<int>(q.representative.size());
  PointedBundle out;
  Bundle& b = out.bundle;
  b = empty_bundle(phi.target, loc.projection.target, n);
  for (int c = 0; c < n; ++c) {
    auto [o, gp] = raw[q.representative[c]];
    auto [i, x] = loc.object_label[o];
    b.s[c] = x;
    b.t[c] = gl.tgt[gp];
    b.labels[c] = "[U" + std::to_string(i) + "," + gl.describe_arrow(gp) + "," + g.base.name(x) + "]";
    for (ArrowId hp : gl.arrows_from(gl.tgt[gp])) b.left_act[hp * n + c] = q.class_of[raw_of(o, gl.compose(hp, gp))];
    for (ArrowId a = 0; a < g.num_arrows(); ++a) {
      if (g.tgt[a] != x) continue;
      int k = loc.cover.pieces_containing(g.src[a]).front();
      ArrowId image = phi.arrow_map[loc.arrow(i, a, k)];
      b.right_act[c * g.num_arrows() + a] = q.class_of[raw_of(loc.object(k, g.src[a]), gl.compose(gp, image))];
    }
    for (ObjectId y : g.base.neighbors(x)) {
      int j = kNone;
      for (int cand : loc.cover.pieces_containing(x))
        if (loc.object(cand, y) != kNone) {
          j = cand;
          break;
        }
      if (j == kNone) continue;
      ArrowId moved = j == i ? gp : gl.compose(gp, phi.arrow_map[loc.arrow(i, g.unit[x], j)]);
      ArrowId cont = gl.continuation_or_self(moved, phi.obj_map[loc.object(j, y)]);
      if (cont == kNone) continue;
      b.sheets[c].emplace_back(y, q.class_of[raw_of(loc.object(j, y), cont)]);
    }
  }
  sort_sheets(b);
  ObjectId base_obj = loc.object(base_piece, star);
  out.base = q.class_of[raw_of(base_obj, gl.unit[phi.obj_map[base_obj]])];
  out.star = star;
  return out;
}

PointedBundle hom_bundle(const GroupoidHom& phi, ObjectId star) {
  Localization loc = localize(phi.source, OpenCover::trivial(phi.source->num_objects()));
  GroupoidHom cocycle = compose_homs(phi, loc.projection);
  cocycle.source = loc.groupoid;
  return bundle_from_cocycle(loc, cocycle, 0, star);
}

std::vector<ElementId> canonical_section(const GroupoidHom& phi) {
  // hom_bundle lists elements by object, then by arrow id, without identifications.
  std::vector<ElementId> sigma;
  int offset = 0;
  for (ObjectId x = 0; x < phi.source->num_objects(); ++x) {
    auto arrows = phi.target->arrows_from(phi.obj_map[x]);
    auto it = std::find(arrows.begin(), arrows.end(), phi.arrow_map[phi.source->unit[x]]);
    sigma.push_back(offset + static_cast<int>(it - arrows.begin()));
    offset += static_cast<int>(arrows.size());
  }
  return sigma;
}

GroupoidHom hom_from_section(const Bundle& b, const std::vector<ElementId>& sigma) {
  const FiniteGroupoid& g = *b.right;
  const FiniteGroupoid& gl = *b.left;
  if (static_cast<int>(sigma.size()) != g.num_objects()) throw Error("section has the wrong number of values");
  for (ObjectId x = 0; x < g.num_objects(); ++x)
    if (sigma[x] < 0 || sigma[x] >= b.size() || b.s[sigma[x]] != x)
      throw Error("section value at " + g.base.name(x) + " does not lie over it");
  GroupoidHom phi{b.right, b.left, {}, {}};
  for (ObjectId x = 0; x < g.num_objects(); ++x) phi.obj_map.push_back(b.t[sigma[x]]);
  for (ArrowId a = 0; a < g.num_arrows(); ++a) {
    ElementId lhs = b.act_right(sigma[g.tgt[a]], a);
    ArrowId found = kNone;
    for (ArrowId gp : gl.arrows_from(b.t[sigma[g.src[a]]]))
      if (b.act_left(gp, sigma[g.src[a]]) == lhs) {
        found = gp;
        break;
      }
    if (found == kNone) throw Error("no arrow relates the section along " + g.describe_arrow(a));
    phi.arrow_map.push_back(found);
  }
  Report r = check_hom(phi);
  if (!r.empty()) throw Error("section does not present a homomorphism: " + r.front());
  return phi;
}

Bundle compose_bundles(const Bundle& outer, const Bundle& inner) {
  if (!same_groupoid(outer.right, inner.left)) throw Error("bundles do not share the middle groupoid");
  const FiniteGroupoid& mid = *inner.left;
  const FiniteGroupoid& gr = *inner.right;
  std::vector<std::vector<ElementId>> outer_over(mid.num_objects());
  for (ElementId a = 0; a < outer.size(); ++a) outer_over[outer.s[a]].push_back(a);
  std::vector<std::pair<ElementId, ElementId>> raw;
  std::map<std::pair<ElementId, ElementId>, int> raw_index;
  for (ElementId e = 0; e < inner.size(); ++e)
    for (ElementId a : outer_over[inner.t[e]]) {
      raw_index[{a, e}] = static_cast<int>(raw.size());
      raw.emplace_back(a, e);
    }
  MinUnionFind uf(static_cast<int>(raw.size()));
  for (std::size_t k = 0; k < raw.size(); ++k) {
    auto [a, e] = raw[k];
    for (ArrowId gp : mid.arrows_from(inner.t[e]))
      uf.unite(static_cast<int>(k), raw_index.at({outer.act_right(a, mid.inv[gp]), inner.act_left(gp, e)}));
  }
  Quotient q = quotient(uf);
  const int n = static_cast<int>(q.representative.size());
  Bundle b = empty_bundle(outer.left, inner.right, n);
  const FiniteGroupoid& gl = *outer.left;
  for (int c = 0; c < n; ++c) {
    auto [a, e] = raw[q.representative[c]];
    b.s[c] = inner.s[e];
    b.t[c] = outer.t[a];
    b.labels[c] = "[" + outer.label(a) + "|" + inner.label(e) + "]";
    for (ArrowId gpp : gl.arrows_from(outer.t[a]))
      b.left_act[gpp * n + c] = q.class_of[raw_index.at({outer.act_left(gpp, a), e})];
    for (ArrowId g = 0; g < gr.num_arrows(); ++g)
      if (gr.tgt[g] == inner.s[e])
        b.right_act[c * gr.num_arrows() + g] = q.class_of[raw_index.at({a, inner.act_right(e, g)})];
    for (ObjectId y : gr.base.neighbors(inner.s[e])) {
      ElementId ey = inner.continuation(e, y);
      if (ey == kNone) continue;
      ElementId ay = outer.continuation_or_self(a, inner.t[ey]);
      if (ay == kNone) continue;
      b.sheets[c].emplace_back(y, q.class_of[raw_index.at({ay, ey})]);
    }
  }
  sort_sheets(b);
  return b;
}

std::optional<Bundle> invert_bundle(const Bundle& e) {
  if (!check_right_principal(e).empty()) return std::nullopt;
  const FiniteGroupoid& gl = *e.left;
  const FiniteGroupoid& gr = *e.right;
  const int n = e.size();
  Bundle b = empty_bundle(e.right, e.left, n);
  b.s = e.t;
  b.t = e.s;
  b.labels = e.labels;
  for (ArrowId g = 0; g < gr.num_arrows(); ++g)
    for (ElementId x = 0; x < n; ++x)
      if (gr.src[g] == e.s[x]) b.left_act[g * n + x] = e.act_right(x, gr.inv[g]);
  for (ElementId x = 0; x < n; ++x)
    for (ArrowId gp = 0; gp < gl.num_arrows(); ++gp)
      if (gl.tgt[gp] == e.t[x]) b.right_act[x * gl.num_arrows() + gp] = e.act_left(gl.inv[gp], x);
  for (ElementId x = 0; x < n; ++x)
    for (ObjectId yp : gl.base.neighbors(e.t[x])) {
      ElementId found = kNone;
      int count = 0;
      for (auto [y, f] : e.sheets[x])
        if (e.t[f] == yp) {
          found = f;
          ++count;
        }
      if (count == 1) b.sheets[x].emplace_back(yp, found);
    }
  sort_sheets(b);
  if (!validate_bundle(b).empty()) return std::nullopt;
  return b;
}

// ---------------------------------------------------------------- isomorphisms

bool is_bundle_isomorphism(const Bundle& a, const Bundle& b, const std::vector<ElementId>& map) {
  if (a.size() != b.size() || static_cast<int>(map.size()) != a.size()) return false;
  if (!same_groupoid(a.left, b.left) || !same_groupoid(a.right, b.right)) return false;
  std::vector<char> hit(b.size(), 0);
  for (ElementId v : map) {
    if (v < 0 || v >= b.size() || hit[v]) return false;
    hit[v] = 1;
  }
  const int ml = a.left->num_arrows(), mr = a.right->num_arrows();
  for (ElementId e = 0; e < a.size(); ++e) {
    ElementId d = map[e];
    if (a.s[e] != b.s[d] || a.t[e] != b.t[d]) return false;
    for (ArrowId g = 0; g < ml; ++g) {
      ElementId x = a.act_left(g, e);
      if (x != kNone && map[x] != b.act_left(g, d)) return false;
    }
    for (ArrowId g = 0; g < mr; ++g) {
      ElementId x = a.act_right(e, g);
      if (x != kNone && map[x] != b.act_right(d, g)) return false;
    }
    if (a.sheets[e].size() != b.sheets[d].size()) return false;
    for (auto [y, f] : a.sheets[e])
      if (b.continuation(d, y) != map[f]) return false;
  }
  return true;
}

namespace {

enum class Mode { Isomorphism, Deformation };

PointedIsoResult propagate(const PointedBundle& p, const PointedBundle& q, Mode mode,
                           std::optional<std::uint64_t> seed) {
  const Bundle& a = p.bundle;
  const Bundle& b = q.bundle;
  const FiniteGroupoid& gl = *a.left;
  const FiniteGroupoid& gr = *a.right;
  PointedIsoResult result;
  if (!same_groupoid(a.left, b.left) || !same_groupoid(a.right, b.right)) {
    result.conflict = "bundles are over different groupoids";
    return result;
  }
  if (!is_connected(gr)) throw Error("pointed comparison needs a connected source groupoid");
  if (p.star != q.star) {
    result.conflict = "basepoints lie over different objects";
    return result;
  }
  if (a.size() != b.size()) {
    result.conflict = "bundles have different sizes";
    return result;
  }
  std::vector<ElementId> map(a.size(), kNone), preimage(b.size(), kNone);
  std::vector<ElementId> frontier;
  std::size_t head = 0;
  auto assign = [&](ElementId x, ElementId v, const std::string& via) -> bool {
    if (v == kNone) {
      result.conflict = via + ": image undefined";
      return false;
    }
    if (map[x] != kNone) {
      if (map[x] == v) return true;
      result.conflict = via + ": " + a.label(x) + " already sent to " + b.label(map[x]);
      return false;
    }
    if (preimage[v] != kNone) {
      result.conflict = via + ": " + b.label(v) + " is already the image of " + a.label(preimage[v]);
      return false;
    }
    const bool anchored = mode == Mode::Isomorphism ? a.t[x] == b.t[v] : gl.base.adjacent_or_equal(a.t[x], b.t[v]);
    if (a.s[x] != b.s[v] || !anchored) {
      result.conflict = via + ": " + a.label(x) + " and " + b.label(v) + " lie over different points";
      return false;
    }
    map[x] = v;
    preimage[v] = x;
    frontier.push_back(x);
    return true;
  };
  if (!assign(p.base, q.base, "basepoint")) return result;
  std::mt19937_64 rng(seed.value_or(0));
  while (head < frontier.size()) {
    if (seed) {
      std::uniform_int_distribution<std::size_t> pick(head, frontier.size() - 1);
      std::swap(frontier[head], frontier[pick(rng)]);
    }
    ElementId e = frontier[head++];
    ElementId d = map[e];
    for (ArrowId g = 0; g < gr.num_arrows(); ++g) {
      if (gr.tgt[g] != a.s[e]) continue;
      if (!assign(a.act_right(e, g), b.act_right(d, g), "right action by " + gr.describe_arrow(g))) return result;
    }
    for (ArrowId gp = 0; gp < gl.num_arrows(); ++gp) {
      if (gl.src[gp] != a.t[e]) continue;
      ArrowId moved = mode == Mode::Isomorphism ? gp : gl.continuation_or_self(gp, b.t[d]);
      ElementId image = moved == kNone ? kNone : b.act_left(moved, d);
      if (!assign(a.act_left(gp, e), image, "left action by " + gl.describe_arrow(gp))) return result;
    }
    for (ObjectId y : gr.base.neighbors(a.s[e])) {
      ElementId ey = a.continuation(e, y), dy = b.continuation(d, y);
      if (ey == kNone && dy == kNone) continue;
      if (ey == kNone || dy == kNone) {
        result.conflict = "continuation over " + gr.base.name(y) + ": defined on one side only";
        return result;
      }
      if (!assign(ey, dy, "continuation over " + gr.base.name(y))) return result;
    }
  }
  for (ElementId e = 0; e < a.size(); ++e)
    if (map[e] == kNone) {
      result.conflict = "element " + a.label(e) + " is not reached from the basepoint";
      return result;
    }
  result.map = std::move(map);
  return result;
}

}  // namespace

PointedIsoResult pointed_isomorphism(const PointedBundle& p, const PointedBundle& q,
                                     std::optional<std::uint64_t> seed) {
  PointedIsoResult r = propagate(p, q, Mode::Isomorphism, seed);
  if (r.map && !is_bundle_isomorphism(p.bundle, q.bundle, *r.map)) {
    r.map.reset();
    r.conflict = "propagated map is not an isomorphism";
  }
  return r;
}

std::optional<std::vector<ElementId>> bundle_isomorphism(const Bundle& a, const Bundle& b) {
  if (a.size() != b.size()) return std::nullopt;
  if (a.size() == 0) return std::vector<ElementId>{};
  PointedBundle p{a, 0, a.s[0]};
  for (ElementId f = 0; f < b.size(); ++f) {
    if (b.s[f] != a.s[0] || b.t[f] != a.t[0]) continue;
    PointedIsoResult r = pointed_isomorphism(p, PointedBundle{b, f, b.s[f]});
    if (r.map) return r.map;
  }
  return std::nullopt;
}

std::optional<std::vector<ElementId>> find_deformation(const PointedBundle& p, const PointedBundle& q) {
  PointedIsoResult r = propagate(p, q, Mode::Deformation, std::nullopt);
  return r.map;
}

CanonicalForm canonical_form(const PointedBundle& p) {
  const Bundle& a = p.bundle;
  const FiniteGroupoid& gl = *a.left;
  const FiniteGroupoid& gr = *a.right;
  const int n = a.size(), ml = gl.num_arrows(), mr = gr.num_arrows();
  std::vector<ElementId> label(n, kNone);
  CanonicalForm out;
  auto discover = [&](ElementId e) {
    if (e != kNone && label[e] == kNone) {
      label[e] = static_cast<int>(out.order.size());
      out.order.push_back(e);
    }
  };
  discover(p.base);
  for (std::size_t head = 0; head < out.order.size() || static_cast<int>(out.order.size()) < n; ++head) {
    if (head == out.order.size()) {
      // unreachable remainder (disconnected source): append in original order
      for (ElementId e = 0; e < n; ++e) discover(e);
      break;
    }
    ElementId e = out.order[head];
    for (ArrowId g = 0; g < mr; ++g) discover(a.act_right(e, g));
    for (ArrowId gp = 0; gp < ml; ++gp) discover(a.act_left(gp, e));
    for (ObjectId y : gr.base.neighbors(a.s[e])) discover(a.continuation(e, y));
  }
  auto relabel = [&](ElementId e) { return e == kNone ? kNone : label[e]; };
  Bundle& b = out.bundle.bundle;
  b = empty_bundle(a.left, a.right, n);
  out.encoding.push_back(n);
  for (int k = 0; k < n; ++k) {
    ElementId e = out.order[k];
    b.s[k] = a.s[e];
    b.t[k] = a.t[e];
    b.labels[k] = a.label(e);
    out.encoding.push_back(a.s[e]);
    out.encoding.push_back(a.t[e]);
    for (ArrowId g = 0; g < mr; ++g) {
      b.right_act[k * mr + g] = relabel(a.act_right(e, g));
      out.encoding.push_back(b.right_act[k * mr + g]);
    }
    for (ArrowId gp = 0; gp < ml; ++gp) {
      b.left_act[gp * n + k] = relabel(a.act_left(gp, e));
      out.encoding.push_back(b.left_act[gp * n + k]);
    }
    for (ObjectId y : gr.base.neighbors(a.s[e])) {
      ElementId c = relabel(a.continuation(e, y));
      if (c != kNone) b.sheets[k].emplace_back(y, c);
      out.encoding.push_back(c);
    }
  }
  out.bundle.base = 0;
  out.bundle.star = p.star;
  out.digest = stable_hash(out.encoding);
  return out;
}

}  // namespace etale
