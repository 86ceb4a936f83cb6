#include "etale/groupoid.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace etale {

namespace {

constexpr std::size_t kMaxReport = 64;

void note(Report& r, std::string msg) {
  if (r.size() < kMaxReport) r.push_back(std::move(msg));
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
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

std::vector<std::vector<int>> blocks_of(UnionFind& uf, int n) {
  std::map<int, std::vector<int>> by_root;
  for (int x = 0; x < n; ++x) by_root[uf.find(x)].push_back(x);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------- ObjectGraph

ObjectGraph::ObjectGraph(std::vector<std::string> names, std::vector<std::pair<ObjectId, ObjectId>> edges)
    : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second) throw Error("duplicate object name '" + n + "'");
  const int n = size();
  adjacency_.assign(n, {});
  std::set<std::pair<ObjectId, ObjectId>> normalized;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) throw Error("edge endpoint is not a declared object");
    if (a == b) throw Error("self-loop edge at object '" + names_[a] + "'");
    normalized.insert({std::min(a, b), std::max(a, b)});
  }
  edges_.assign(normalized.begin(), normalized.end());
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

ObjectGraph ObjectGraph::discrete(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return ObjectGraph(std::move(names), {});
}

ObjectGraph ObjectGraph::path(std::vector<std::string> names) {
  std::vector<std::pair<ObjectId, ObjectId>> edges;
  for (int i = 0; i + 1 < static_cast<int>(names.size()); ++i) edges.emplace_back(i, i + 1);
  return ObjectGraph(std::move(names), std::move(edges));
}

ObjectGraph ObjectGraph::cycle(int n) {
  std::vector<std::string> names;
  std::vector<std::pair<ObjectId, ObjectId>> edges;
  for (int i = 0; i < n; ++i) {
    names.push_back(std::to_string(i));
    edges.emplace_back(i, (i + 1) % n);
  }
  return ObjectGraph(std::move(names), std::move(edges));
}

ObjectId ObjectGraph::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? kNone : static_cast<ObjectId>(it - names_.begin());
}

bool ObjectGraph::adjacent(ObjectId x, ObjectId y) const {
  const auto& adj = adjacency_.at(x);
  return std::binary_search(adj.begin(), adj.end(), y);
}

std::vector<std::vector<ObjectId>> ObjectGraph::components(const std::vector<ObjectId>& subset) const {
  std::vector<ObjectId> members = subset;
  if (members.empty()) {
    members.resize(size());
    std::iota(members.begin(), members.end(), 0);
  }
  std::vector<char> inside(size(), 0);
  for (ObjectId x : members) inside[x] = 1;
  UnionFind uf(size());
  for (auto [a, b] : edges_)
    if (inside[a] && inside[b]) uf.unite(a, b);
  std::map<int, std::vector<ObjectId>> by_root;
  for (ObjectId x : members) by_root[uf.find(x)].push_back(x);
  std::vector<std::vector<ObjectId>> out;
  for (auto& [r, m] : by_root) {
    std::sort(m.begin(), m.end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ObjectGraph::is_connected_subset(const std::vector<ObjectId>& subset) const {
  return !subset.empty() && components(subset).size() == 1;
}

bool ObjectGraph::is_tree() const {
  return size() > 0 && static_cast<int>(edges_.size()) == size() - 1 && components().size() == 1;
}

// ------------------------------------------------------------- FiniteGroupoid

ArrowId FiniteGroupoid::compose(ArrowId g, ArrowId h) const {
  auto it = comp.find(key(g, h));
  return it == comp.end() ? kNone : it->second;
}

ArrowId FiniteGroupoid::continuation(ArrowId g, ObjectId y) const {
  if (g < 0 || g >= static_cast<int>(sheets.size())) return kNone;
  for (auto [obj, a] : sheets[g])
    if (obj == y) return a;
  return kNone;
}

std::vector<ArrowId> FiniteGroupoid::arrows_between(ObjectId from, ObjectId to) const {
  std::vector<ArrowId> out;
  for (ArrowId g = 0; g < num_arrows(); ++g)
    if (src[g] == from && tgt[g] == to) out.push_back(g);
  return out;
}

std::vector<ArrowId> FiniteGroupoid::arrows_from(ObjectId x) const {
  std::vector<ArrowId> out;
  for (ArrowId g = 0; g < num_arrows(); ++g)
    if (src[g] == x) out.push_back(g);
  return out;
}

std::string FiniteGroupoid::describe_arrow(ArrowId g) const {
  if (g >= 0 && g < static_cast<int>(arrow_names.size()) && !arrow_names[g].empty()) return arrow_names[g];
  return "#" + std::to_string(g);
}

std::vector<std::tuple<ArrowId, ArrowId, ArrowId>> FiniteGroupoid::composition_list() const {
  std::vector<std::tuple<ArrowId, ArrowId, ArrowId>> out;
  out.reserve(comp.size());
  for (const auto& [k, v] : comp)
    out.emplace_back(static_cast<ArrowId>(k >> 32), static_cast<ArrowId>(k & 0xffffffffU), v);
  std::sort(out.begin(), out.end());
  return out;
}

bool structurally_equal(const FiniteGroupoid& a, const FiniteGroupoid& b) {
  if (!(a.base == b.base) || a.src != b.src || a.tgt != b.tgt || a.unit != b.unit || a.inv != b.inv) return false;
  if (a.comp != b.comp) return false;
  auto norm = [](Sheets s) {
    for (auto& v : s) std::sort(v.begin(), v.end());
    return s;
  };
  return norm(a.sheets) == norm(b.sheets);
}

void add_unit_sheets(FiniteGroupoid& g) {
  g.sheets.resize(g.num_arrows());
  for (auto [x, y] : g.base.edges()) {
    ArrowId ux = g.unit[x], uy = g.unit[y];
    if (g.continuation(ux, y) == kNone) g.sheets[ux].emplace_back(y, uy);
    if (g.continuation(uy, x) == kNone) g.sheets[uy].emplace_back(x, ux);
  }
  for (auto& s : g.sheets) std::sort(s.begin(), s.end());
}

Report validate_groupoid(const FiniteGroupoid& g) {
  Report r;
  const int n = g.num_objects(), m = g.num_arrows();
  if (static_cast<int>(g.tgt.size()) != m || static_cast<int>(g.inv.size()) != m ||
      static_cast<int>(g.unit.size()) != n) {
    note(r, "table sizes disagree with object/arrow counts");
    return r;
  }
  for (ArrowId a = 0; a < m; ++a) {
    if (g.src[a] < 0 || g.src[a] >= n || g.tgt[a] < 0 || g.tgt[a] >= n)
      note(r, "arrow " + g.describe_arrow(a) + " has an endpoint outside the object set");
    if (g.inv[a] < 0 || g.inv[a] >= m) note(r, "arrow " + g.describe_arrow(a) + " has no inverse entry");
  }
  for (ObjectId x = 0; x < n; ++x)
    if (g.unit[x] < 0 || g.unit[x] >= m) note(r, "object " + g.base.name(x) + " has no unit arrow");
  for (const auto& [k, v] : g.comp)
    if (v < 0 || v >= m) note(r, "composition table entry out of range");
  if (!r.empty()) return r;

  for (ObjectId x = 0; x < n; ++x) {
    ArrowId u = g.unit[x];
    if (g.src[u] != x || g.tgt[u] != x) note(r, "unit of " + g.base.name(x) + " is not a loop at it");
  }
  for (ArrowId a = 0; a < m; ++a)
    for (ArrowId b = 0; b < m; ++b) {
      ArrowId ab = g.compose(a, b);
      const bool composable = g.src[a] == g.tgt[b];
      if (composable && ab == kNone)
        note(r, "composition undefined for composable pair (" + g.describe_arrow(a) + "," + g.describe_arrow(b) + ")");
      if (!composable && ab != kNone)
        note(r, "composition defined for non-composable pair (" + g.describe_arrow(a) + "," + g.describe_arrow(b) +
                    ")");
      if (composable && ab != kNone && (g.src[ab] != g.src[b] || g.tgt[ab] != g.tgt[a]))
        note(r, "source/target law fails for (" + g.describe_arrow(a) + "," + g.describe_arrow(b) + ")");
    }
  for (ArrowId a = 0; a < m; ++a) {
    if (g.compose(a, g.unit[g.src[a]]) != a || g.compose(g.unit[g.tgt[a]], a) != a)
      note(r, "unit law fails for " + g.describe_arrow(a));
    ArrowId i = g.inv[a];
    if (g.inv[i] != a) note(r, "inverse is not an involution at " + g.describe_arrow(a));
    if (g.compose(a, i) != g.unit[g.tgt[a]] || g.compose(i, a) != g.unit[g.src[a]])
      note(r, "inverse law fails for " + g.describe_arrow(a));
  }

  std::vector<std::vector<ArrowId>> into(n);
  for (ArrowId a = 0; a < m; ++a) into[g.tgt[a]].push_back(a);
  for (ArrowId a = 0; a < m; ++a)
    for (ArrowId b : into[g.src[a]])
      for (ArrowId c : into[g.src[b]]) {
        if (g.compose(g.compose(a, b), c) != g.compose(a, g.compose(b, c)))
          note(r, "associativity fails for triple (" + g.describe_arrow(a) + "," + g.describe_arrow(b) + "," +
                      g.describe_arrow(c) + ")");
      }

  // Sheets: continuity of the structure maps where continuations are given.
  if (!g.sheets.empty() && static_cast<int>(g.sheets.size()) != m) {
    note(r, "sheet table size disagrees with arrow count");
    return r;
  }
  for (ArrowId a = 0; a < static_cast<int>(g.sheets.size()); ++a)
    for (auto [y, b] : g.sheets[a]) {
      const std::string where = "sheet of " + g.describe_arrow(a) + " over " +
                                (y >= 0 && y < n ? g.base.name(y) : std::to_string(y));
      if (y < 0 || y >= n || b < 0 || b >= m) {
        note(r, where + " is out of range");
        continue;
      }
      if (!g.base.adjacent(g.src[a], y)) note(r, where + ": not a neighbor of the source");
      if (g.src[b] != y) note(r, where + ": continued arrow has the wrong source");
      if (!g.base.adjacent(g.tgt[a], g.tgt[b])) note(r, where + ": target does not move to a neighbor");
      if (g.continuation(b, g.src[a]) != a) note(r, where + ": sheet is not symmetric");
      ArrowId bi = g.continuation(g.inv[a], g.tgt[b]);
      if (bi != kNone && bi != g.inv[b]) note(r, where + ": inverse does not follow the sheet");
    }
  for (ObjectId x = 0; x < n; ++x)
    for (auto [y, b] : g.sheets.empty() ? std::vector<std::pair<ObjectId, int>>{} : g.sheets[g.unit[x]])
      if (b != g.unit[y]) note(r, "unit sheet at " + g.base.name(x) + " leaves the unit section");
  for (ArrowId a = 0; a < static_cast<int>(g.sheets.size()); ++a)
    for (ArrowId b : into[g.src[a]])
      for (auto [y, bb] : g.sheets[b]) {
        ArrowId aa = g.continuation(a, g.tgt[bb]);
        ArrowId ab = g.continuation(g.compose(a, b), y);
        if (aa != kNone && ab != kNone && ab != g.compose(aa, bb))
          note(r, "composition does not follow sheets at (" + g.describe_arrow(a) + "," + g.describe_arrow(b) +
                      ") over " + g.base.name(y));
      }
  return r;
}

std::vector<std::vector<ObjectId>> orbits(const FiniteGroupoid& g) {
  UnionFind uf(g.num_objects());
  for (ArrowId a = 0; a < g.num_arrows(); ++a) uf.unite(g.src[a], g.tgt[a]);
  return blocks_of(uf, g.num_objects());
}

bool is_connected(const FiniteGroupoid& g) {
  if (g.num_objects() == 0) return false;
  UnionFind uf(g.num_objects());
  for (ArrowId a = 0; a < g.num_arrows(); ++a) uf.unite(g.src[a], g.tgt[a]);
  for (auto [x, y] : g.base.edges()) uf.unite(x, y);
  return blocks_of(uf, g.num_objects()).size() == 1;
}

int IsotropyGroup::index_of(ArrowId g) const {
  auto it = std::find(arrows.begin(), arrows.end(), g);
  return it == arrows.end() ? kNone : static_cast<int>(it - arrows.begin());
}

IsotropyGroup isotropy(const FiniteGroupoid& g, ObjectId x) {
  if (x < 0 || x >= g.num_objects()) throw Error("unknown object id " + std::to_string(x));
  IsotropyGroup out;
  out.object = x;
  out.arrows = g.arrows_between(x, x);
  const int k = static_cast<int>(out.arrows.size());
  std::vector<int> table(k * k);
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) {
    names.push_back(g.describe_arrow(out.arrows[i]));
    for (int j = 0; j < k; ++j) {
      int c = out.index_of(g.compose(out.arrows[i], out.arrows[j]));
      if (c == kNone) throw Error("isotropy at " + g.base.name(x) + " is not closed under composition");
      table[i * k + j] = c;
    }
  }
  out.group = FiniteGroup(k, std::move(table), std::move(names));
  return out;
}

// ---------------------------------------------------------------- Constructions

GroupAction GroupAction::trivial_on(ObjectGraph space) {
  GroupAction a{FiniteGroup::trivial(), std::move(space), {}};
  a.table.resize(a.space.size());
  std::iota(a.table.begin(), a.table.end(), 0);
  return a;
}

Report validate_action(const GroupAction& a) {
  Report r;
  const int n = a.space.size(), q = a.group.order();
  if (static_cast<int>(a.table.size()) != n * q) {
    note(r, "action table has wrong size");
    return r;
  }
  for (ObjectId v : a.table)
    if (v < 0 || v >= n) {
      note(r, "action table entry outside the object set");
      return r;
    }
  for (ObjectId x = 0; x < n; ++x)
    if (a.act(a.group.identity(), x) != x) note(r, "identity moves object " + a.space.name(x));
  for (int g = 0; g < q; ++g)
    for (int h = 0; h < q; ++h)
      for (ObjectId x = 0; x < n; ++x)
        if (a.act(a.group.mul(g, h), x) != a.act(g, a.act(h, x)))
          note(r, "not an action: (" + a.group.name(g) + a.group.name(h) + ")·" + a.space.name(x));
  for (int g = 0; g < q; ++g)
    for (auto [x, y] : a.space.edges())
      if (!a.space.adjacent(a.act(g, x), a.act(g, y)))
        note(r, "element " + a.group.name(g) + " does not preserve edge " + a.space.name(x) + "-" + a.space.name(y));
  return r;
}

GroupoidPtr action_groupoid(const GroupAction& a) {
  Report r = validate_action(a);
  if (!r.empty()) throw Error("invalid action: " + r.front());
  auto g = std::make_shared<FiniteGroupoid>();
  const int n = a.space.size(), q = a.group.order();
  g->base = a.space;
  for (int gamma = 0; gamma < q; ++gamma)
    for (ObjectId x = 0; x < n; ++x) {
      g->arrow_names.push_back("(" + a.group.name(gamma) + "," + a.space.name(x) + ")");
      g->src.push_back(x);
      g->tgt.push_back(a.act(gamma, x));
      g->inv.push_back(action_arrow(a, a.group.inv(gamma), a.act(gamma, x)));
    }
  for (ObjectId x = 0; x < n; ++x) g->unit.push_back(action_arrow(a, a.group.identity(), x));
  for (int g2 = 0; g2 < q; ++g2)
    for (int g1 = 0; g1 < q; ++g1)
      for (ObjectId x = 0; x < n; ++x)
        g->set_compose(action_arrow(a, g2, a.act(g1, x)), action_arrow(a, g1, x),
                       action_arrow(a, a.group.mul(g2, g1), x));
  g->sheets.assign(n * q, {});
  for (int gamma = 0; gamma < q; ++gamma)
    for (ObjectId x = 0; x < n; ++x)
      for (ObjectId y : a.space.neighbors(x)) g->sheets[action_arrow(a, gamma, x)].emplace_back(y, action_arrow(a, gamma, y));
  return g;
}

GroupoidPtr trivial_groupoid(const ObjectGraph& base) {
  return action_groupoid(GroupAction::trivial_on(base));
}

GroupoidPtr point_groupoid() {
  auto g = std::make_shared<FiniteGroupoid>();
  g->base = ObjectGraph({"*"}, {});
  g->arrow_names = {"1_*"};
  g->src = {0};
  g->tgt = {0};
  g->unit = {0};
  g->inv = {0};
  g->set_compose(0, 0, 0);
  g->sheets.assign(1, {});
  return g;
}

GroupoidPtr group_as_groupoid(const FiniteGroup& grp) {
  return action_groupoid(GroupAction{grp, ObjectGraph({"*"}, {}), std::vector<ObjectId>(grp.order(), 0)});
}

GroupoidPtr product_groupoid(const FiniteGroupoid& h, const FiniteGroupoid& g) {
  auto p = std::make_shared<FiniteGroupoid>();
  const int nh = h.num_objects(), ng = g.num_objects(), mh = h.num_arrows(), mg = g.num_arrows();
  std::vector<std::string> names;
  std::vector<std::pair<ObjectId, ObjectId>> edges;
  for (ObjectId v = 0; v < nh; ++v)
    for (ObjectId x = 0; x < ng; ++x) names.push_back("(" + h.base.name(v) + "," + g.base.name(x) + ")");
  for (ObjectId v = 0; v < nh; ++v)
    for (auto [x, y] : g.base.edges()) edges.emplace_back(v * ng + x, v * ng + y);
  for (auto [v, w] : h.base.edges())
    for (ObjectId x = 0; x < ng; ++x) edges.emplace_back(v * ng + x, w * ng + x);
  p->base = ObjectGraph(std::move(names), std::move(edges));
  for (ArrowId a = 0; a < mh; ++a)
    for (ArrowId b = 0; b < mg; ++b) {
      p->arrow_names.push_back("(" + h.describe_arrow(a) + "," + g.describe_arrow(b) + ")");
      p->src.push_back(h.src[a] * ng + g.src[b]);
      p->tgt.push_back(h.tgt[a] * ng + g.tgt[b]);
      p->inv.push_back(h.inv[a] * mg + g.inv[b]);
    }
  for (ObjectId v = 0; v < nh; ++v)
    for (ObjectId x = 0; x < ng; ++x) p->unit.push_back(h.unit[v] * mg + g.unit[x]);
  for (const auto& [ka, va] : h.comp)
    for (const auto& [kb, vb] : g.comp) {
      ArrowId a1 = static_cast<ArrowId>(ka >> 32), a2 = static_cast<ArrowId>(ka & 0xffffffffU);
      ArrowId b1 = static_cast<ArrowId>(kb >> 32), b2 = static_cast<ArrowId>(kb & 0xffffffffU);
      p->set_compose(a1 * mg + b1, a2 * mg + b2, va * mg + vb);
    }
  p->sheets.assign(mh * mg, {});
  for (ArrowId a = 0; a < mh; ++a)
    for (ArrowId b = 0; b < mg; ++b) {
      auto& s = p->sheets[a * mg + b];
      for (ObjectId y : g.base.neighbors(g.src[b])) {
        ArrowId bb = g.continuation(b, y);
        if (bb != kNone) s.emplace_back(h.src[a] * ng + y, a * mg + bb);
      }
      for (ObjectId w : h.base.neighbors(h.src[a])) {
        ArrowId aa = h.continuation(a, w);
        if (aa != kNone) s.emplace_back(w * ng + g.src[b], aa * mg + b);
      }
      std::sort(s.begin(), s.end());
    }
  return p;
}

// ------------------------------------------------------------------ Homs

Report check_hom(const GroupoidHom& phi) {
  Report r;
  const FiniteGroupoid& s = *phi.source;
  const FiniteGroupoid& t = *phi.target;
  if (static_cast<int>(phi.obj_map.size()) != s.num_objects() ||
      static_cast<int>(phi.arrow_map.size()) != s.num_arrows()) {
    note(r, "map sizes disagree with the source groupoid");
    return r;
  }
  for (ObjectId v : phi.obj_map)
    if (v < 0 || v >= t.num_objects()) {
      note(r, "object image out of range");
      return r;
    }
  for (ArrowId v : phi.arrow_map)
    if (v < 0 || v >= t.num_arrows()) {
      note(r, "arrow image out of range");
      return r;
    }
  for (ArrowId a = 0; a < s.num_arrows(); ++a) {
    ArrowId fa = phi.arrow_map[a];
    if (t.src[fa] != phi.obj_map[s.src[a]] || t.tgt[fa] != phi.obj_map[s.tgt[a]])
      note(r, "arrow " + s.describe_arrow(a) + " is not sent between the images of its ends");
  }
  for (ObjectId x = 0; x < s.num_objects(); ++x)
    if (phi.arrow_map[s.unit[x]] != t.unit[phi.obj_map[x]]) note(r, "unit of " + s.base.name(x) + " not preserved");
  for (const auto& [k, v] : s.comp) {
    ArrowId a = static_cast<ArrowId>(k >> 32), b = static_cast<ArrowId>(k & 0xffffffffU);
    if (t.compose(phi.arrow_map[a], phi.arrow_map[b]) != phi.arrow_map[v])
      note(r, "composition not preserved at (" + s.describe_arrow(a) + "," + s.describe_arrow(b) + ")");
  }
  if (!r.empty()) return r;
  for (auto [x, y] : s.base.edges())
    if (!t.base.adjacent_or_equal(phi.obj_map[x], phi.obj_map[y]))
      note(r, "not continuous: edge " + s.base.name(x) + "-" + s.base.name(y) + " is torn apart");
  for (ArrowId a = 0; a < static_cast<int>(s.sheets.size()); ++a)
    for (auto [y, b] : s.sheets[a])
      if (t.continuation_or_self(phi.arrow_map[a], phi.obj_map[y]) != phi.arrow_map[b])
        note(r, "not continuous along the sheet of " + s.describe_arrow(a) + " over " + s.base.name(y));
  return r;
}

GroupoidHom identity_hom(const GroupoidPtr& g) {
  GroupoidHom h{g, g, std::vector<ObjectId>(g->num_objects()), std::vector<ArrowId>(g->num_arrows())};
  std::iota(h.obj_map.begin(), h.obj_map.end(), 0);
  std::iota(h.arrow_map.begin(), h.arrow_map.end(), 0);
  return h;
}

GroupoidHom compose_homs(const GroupoidHom& outer, const GroupoidHom& inner) {
  if (inner.target->num_objects() != outer.source->num_objects() ||
      inner.target->num_arrows() != outer.source->num_arrows())
    throw Error("homomorphisms are not composable");
  GroupoidHom out{inner.source, outer.target, {}, {}};
  for (ObjectId v : inner.obj_map) out.obj_map.push_back(outer.obj_map[v]);
  for (ArrowId a : inner.arrow_map) out.arrow_map.push_back(outer.arrow_map[a]);
  return out;
}

EquivalenceVerdict is_equivalence_hom(const GroupoidHom& phi) {
  Report r = check_hom(phi);
  if (!r.empty()) return {false, "not a homomorphism: " + r.front()};
  const FiniteGroupoid& s = *phi.source;
  const FiniteGroupoid& t = *phi.target;
  auto source_orbits = orbits(s);
  auto target_orbits = orbits(t);
  std::vector<int> target_orbit_of(t.num_objects());
  for (std::size_t i = 0; i < target_orbits.size(); ++i)
    for (ObjectId y : target_orbits[i]) target_orbit_of[y] = static_cast<int>(i);
  std::vector<int> hit(target_orbits.size(), -1);
  for (std::size_t i = 0; i < source_orbits.size(); ++i) {
    int o = target_orbit_of[phi.obj_map[source_orbits[i].front()]];
    if (hit[o] != -1)
      return {false, "orbits of " + s.base.name(source_orbits[hit[o]].front()) + " and " +
                         s.base.name(source_orbits[i].front()) + " are identified"};
    hit[o] = static_cast<int>(i);
  }
  for (std::size_t o = 0; o < target_orbits.size(); ++o)
    if (hit[o] == -1) return {false, "orbit of " + t.base.name(target_orbits[o].front()) + " is not reached"};
  for (ObjectId x = 0; x < s.num_objects(); ++x) {
    auto here = s.arrows_between(x, x);
    auto there = t.arrows_between(phi.obj_map[x], phi.obj_map[x]);
    std::set<ArrowId> images;
    for (ArrowId a : here) images.insert(phi.arrow_map[a]);
    if (images.size() != here.size() || here.size() != there.size())
      return {false, "isotropy at " + s.base.name(x) + " is not mapped isomorphically"};
  }
  return {true, "orbit map bijective and isotropy preserved"};
}

// --------------------------------------------------------- Natural transformations

bool is_natural_transformation(const GroupoidHom& phi, const GroupoidHom& phi2, const NaturalTransformation& h) {
  const FiniteGroupoid& s = *phi.source;
  const FiniteGroupoid& t = *phi.target;
  if (static_cast<int>(h.component.size()) != s.num_objects()) return false;
  for (ObjectId x = 0; x < s.num_objects(); ++x) {
    ArrowId c = h.component[x];
    if (c < 0 || c >= t.num_arrows() || t.src[c] != phi.obj_map[x] || t.tgt[c] != phi2.obj_map[x]) return false;
  }
  for (ArrowId a = 0; a < s.num_arrows(); ++a)
    if (t.compose(h.component[s.tgt[a]], phi.arrow_map[a]) != t.compose(phi2.arrow_map[a], h.component[s.src[a]]))
      return false;
  for (auto [x, y] : s.base.edges())
    if (t.continuation_or_self(h.component[x], phi.obj_map[y]) != h.component[y]) return false;
  return true;
}

namespace {

// Arrow-orbit decomposition with a spanning arrow root -> y for every member.
struct SpanningOrbit {
  ObjectId root = kNone;
  std::vector<ObjectId> members;  // BFS order, root first
  std::map<ObjectId, ArrowId> span;
};

std::vector<SpanningOrbit> spanning_orbits(const FiniteGroupoid& g) {
  std::vector<SpanningOrbit> out;
  for (const auto& block : orbits(g)) {
    SpanningOrbit o;
    o.root = block.front();
    o.members.push_back(o.root);
    o.span[o.root] = g.unit[o.root];
    for (ArrowId a = 0; a < g.num_arrows(); ++a)
      if (g.src[a] == o.root && !o.span.count(g.tgt[a])) {
        o.span[g.tgt[a]] = a;
        o.members.push_back(g.tgt[a]);
      }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace

std::optional<NaturalTransformation> find_natural_transformation(const GroupoidHom& phi, const GroupoidHom& phi2) {
  const FiniteGroupoid& s = *phi.source;
  const FiniteGroupoid& t = *phi.target;
  auto orbs = spanning_orbits(s);
  std::vector<int> orbit_of(s.num_objects());
  for (std::size_t i = 0; i < orbs.size(); ++i)
    for (ObjectId x : orbs[i].members) orbit_of[x] = static_cast<int>(i);

  // Per orbit: every assignment satisfying naturality inside the orbit.
  std::vector<std::vector<std::map<ObjectId, ArrowId>>> candidates(orbs.size());
  for (std::size_t i = 0; i < orbs.size(); ++i) {
    const auto& o = orbs[i];
    for (ArrowId c : t.arrows_between(phi.obj_map[o.root], phi2.obj_map[o.root])) {
      std::map<ObjectId, ArrowId> h;
      for (ObjectId y : o.members) {
        ArrowId a = o.span.at(y);
        h[y] = t.compose(t.compose(phi2.arrow_map[a], c), t.inv[phi.arrow_map[a]]);
      }
      bool ok = true;
      for (ArrowId a = 0; a < s.num_arrows() && ok; ++a)
        if (orbit_of[s.src[a]] == static_cast<int>(i))
          ok = t.compose(h[s.tgt[a]], phi.arrow_map[a]) == t.compose(phi2.arrow_map[a], h[s.src[a]]);
      if (ok) candidates[i].push_back(std::move(h));
    }
  }
  NaturalTransformation result{std::vector<ArrowId>(s.num_objects(), kNone)};
  std::function<bool(std::size_t)> choose = [&](std::size_t i) -> bool {
    if (i == orbs.size()) return true;
    for (const auto& h : candidates[i]) {
      for (auto [x, c] : h) result.component[x] = c;
      bool ok = true;
      for (auto [x, c] : h) {
        for (ObjectId y : s.base.neighbors(x)) {
          if (orbit_of[y] > static_cast<int>(i)) continue;
          if (t.continuation_or_self(c, phi.obj_map[y]) != result.component[y]) ok = false;
        }
        if (!ok) break;
      }
      if (ok && choose(i + 1)) return true;
      for (auto [x, c] : h) result.component[x] = kNone;
    }
    return false;
  };
  if (!choose(0)) return std::nullopt;
  return result;
}

// ------------------------------------------------------------ Restriction, covers

Restriction restrict_groupoid(const GroupoidPtr& g, std::vector<ObjectId> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.empty()) throw Error("restriction to an empty object set");
  std::vector<ObjectId> new_id(g->num_objects(), kNone);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 0 || subset[i] >= g->num_objects()) throw Error("restriction set has an unknown object");
    new_id[subset[i]] = static_cast<ObjectId>(i);
  }
  std::vector<std::string> names;
  for (ObjectId x : subset) names.push_back(g->base.name(x));
  std::vector<std::pair<ObjectId, ObjectId>> edges;
  for (auto [x, y] : g->base.edges())
    if (new_id[x] != kNone && new_id[y] != kNone) edges.emplace_back(new_id[x], new_id[y]);
  auto r = std::make_shared<FiniteGroupoid>();
  r->base = ObjectGraph(std::move(names), std::move(edges));
  std::vector<ArrowId> new_arrow(g->num_arrows(), kNone);
  std::vector<ArrowId> old_arrow;
  for (ArrowId a = 0; a < g->num_arrows(); ++a)
    if (new_id[g->src[a]] != kNone && new_id[g->tgt[a]] != kNone) {
      new_arrow[a] = static_cast<ArrowId>(old_arrow.size());
      old_arrow.push_back(a);
    }
  for (ArrowId a : old_arrow) {
    r->arrow_names.push_back(g->describe_arrow(a));
    r->src.push_back(new_id[g->src[a]]);
    r->tgt.push_back(new_id[g->tgt[a]]);
    r->inv.push_back(new_arrow[g->inv[a]]);
  }
  for (ObjectId x : subset) r->unit.push_back(new_arrow[g->unit[x]]);
  for (const auto& [k, v] : g->comp) {
    ArrowId a = static_cast<ArrowId>(k >> 32), b = static_cast<ArrowId>(k & 0xffffffffU);
    if (new_arrow[a] != kNone && new_arrow[b] != kNone) r->set_compose(new_arrow[a], new_arrow[b], new_arrow[v]);
  }
  r->sheets.assign(old_arrow.size(), {});
  for (std::size_t i = 0; i < old_arrow.size(); ++i)
    if (static_cast<std::size_t>(old_arrow[i]) < g->sheets.size())
      for (auto [y, b] : g->sheets[old_arrow[i]])
        if (new_id[y] != kNone && new_arrow[b] != kNone) r->sheets[i].emplace_back(new_id[y], new_arrow[b]);
  GroupoidHom inc{r, g, subset, old_arrow};
  return {r, std::move(inc)};
}

OpenCover OpenCover::trivial(int num_objects) {
  OpenCover c;
  c.pieces.emplace_back(num_objects);
  std::iota(c.pieces[0].begin(), c.pieces[0].end(), 0);
  return c;
}

OpenCover OpenCover::by_edges(const ObjectGraph& graph) {
  OpenCover c;
  for (auto [x, y] : graph.edges()) c.pieces.push_back({x, y});
  for (ObjectId x = 0; x < graph.size(); ++x)
    if (graph.neighbors(x).empty()) c.pieces.push_back({x});
  return c;
}

std::vector<int> OpenCover::pieces_containing(ObjectId x) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < pieces.size(); ++i)
    if (std::find(pieces[i].begin(), pieces[i].end(), x) != pieces[i].end()) out.push_back(static_cast<int>(i));
  return out;
}

Report validate_cover(const FiniteGroupoid& g, const OpenCover& cover) {
  Report r;
  std::vector<char> covered(g.num_objects(), 0);
  for (std::size_t i = 0; i < cover.pieces.size(); ++i) {
    const auto& piece = cover.pieces[i];
    if (piece.empty()) {
      note(r, "piece " + std::to_string(i) + " is empty");
      continue;
    }
    std::set<ObjectId> seen;
    bool in_range = true;
    for (ObjectId x : piece) {
      if (x < 0 || x >= g.num_objects()) {
        note(r, "piece " + std::to_string(i) + " names an unknown object");
        in_range = false;
        continue;
      }
      if (!seen.insert(x).second) note(r, "piece " + std::to_string(i) + " repeats object " + g.base.name(x));
      covered[x] = 1;
    }
    if (in_range && !g.base.is_connected_subset(piece)) note(r, "piece " + std::to_string(i) + " is not connected");
  }
  for (ObjectId x = 0; x < g.num_objects(); ++x)
    if (!covered[x]) note(r, "object " + g.base.name(x) + " is not covered");
  return r;
}

ObjectId Localization::object(int piece, ObjectId x) const {
  auto it = object_index.find({piece, x});
  return it == object_index.end() ? kNone : it->second;
}

ArrowId Localization::arrow(int to_piece, ArrowId g, int from_piece) const {
  auto it = arrow_index.find({to_piece, g, from_piece});
  return it == arrow_index.end() ? kNone : it->second;
}

Localization localize(const GroupoidPtr& g, const OpenCover& cover) {
  Report r = validate_cover(*g, cover);
  if (!r.empty()) throw Error("invalid cover: " + r.front());
  Localization loc;
  loc.cover = cover;
  auto l = std::make_shared<FiniteGroupoid>();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cover.pieces.size(); ++i) {
    std::vector<ObjectId> piece = cover.pieces[i];
    std::sort(piece.begin(), piece.end());
    for (ObjectId x : piece) {
      ObjectId id = static_cast<ObjectId>(loc.object_label.size());
      loc.object_label.emplace_back(static_cast<int>(i), x);
      loc.object_index[{static_cast<int>(i), x}] = id;
      names.push_back("U" + std::to_string(i) + ":" + g->base.name(x));
    }
  }
  std::vector<std::pair<ObjectId, ObjectId>> edges;
  for (auto [x, y] : g->base.edges())
    for (std::size_t i = 0; i < cover.pieces.size(); ++i) {
      ObjectId a = loc.object(static_cast<int>(i), x), b = loc.object(static_cast<int>(i), y);
      if (a != kNone && b != kNone) edges.emplace_back(a, b);
    }
  l->base = ObjectGraph(std::move(names), std::move(edges));
  std::vector<std::vector<int>> containing(g->num_objects());
  for (ObjectId x = 0; x < g->num_objects(); ++x) containing[x] = cover.pieces_containing(x);
  for (ArrowId a = 0; a < g->num_arrows(); ++a)
    for (int j : containing[g->tgt[a]])
      for (int i : containing[g->src[a]]) {
        ArrowId id = static_cast<ArrowId>(loc.arrow_label.size());
        loc.arrow_label.emplace_back(j, a, i);
        loc.arrow_index[{j, a, i}] = id;
        l->arrow_names.push_back("(" + std::to_string(j) + "," + g->describe_arrow(a) + "," + std::to_string(i) + ")");
        l->src.push_back(loc.object(i, g->src[a]));
        l->tgt.push_back(loc.object(j, g->tgt[a]));
      }
  for (auto [j, a, i] : loc.arrow_label) l->inv.push_back(loc.arrow(i, g->inv[a], j));
  for (auto [i, x] : loc.object_label) l->unit.push_back(loc.arrow(i, g->unit[x], i));
  // (k, g', j)(j, g, i) = (k, g'g, i)
  for (std::size_t id1 = 0; id1 < loc.arrow_label.size(); ++id1) {
    auto [j, a, i] = loc.arrow_label[id1];
    for (std::size_t id2 = 0; id2 < loc.arrow_label.size(); ++id2) {
      auto [k, b, j2] = loc.arrow_label[id2];
      if (j2 != j || g->src[b] != g->tgt[a]) continue;
      l->set_compose(static_cast<ArrowId>(id2), static_cast<ArrowId>(id1), loc.arrow(k, g->compose(b, a), i));
    }
  }
  l->sheets.assign(loc.arrow_label.size(), {});
  for (std::size_t id = 0; id < loc.arrow_label.size(); ++id) {
    auto [j, a, i] = loc.arrow_label[id];
    if (static_cast<std::size_t>(a) >= g->sheets.size()) continue;
    for (auto [y, b] : g->sheets[a]) {
      ArrowId local = loc.arrow(j, b, i);
      if (local != kNone) l->sheets[id].emplace_back(loc.object(i, y), local);
    }
    std::sort(l->sheets[id].begin(), l->sheets[id].end());
  }
  loc.groupoid = l;
  loc.projection.source = l;
  loc.projection.target = g;
  for (auto [i, x] : loc.object_label) loc.projection.obj_map.push_back(x);
  for (auto [j, a, i] : loc.arrow_label) loc.projection.arrow_map.push_back(a);
  return loc;
}

// ------------------------------------------------------------ Hom enumeration

namespace {

struct HomSearch {
  const FiniteGroupoid& s;
  const FiniteGroupoid& t;
  GroupoidPtr source, target;
  const std::function<bool(const GroupoidHom&)>& visit;
  const HomSearchOptions& options;

  std::vector<SpanningOrbit> comps;
  std::vector<int> comp_of;
  std::vector<IsotropyGroup> root_iso;
  std::vector<IsotropyGroup> target_iso;
  std::vector<std::vector<ArrowId>> target_out;
  std::map<std::pair<int, ObjectId>, std::vector<GroupMap>> hom_cache;
  std::vector<int> order;

  std::vector<ObjectId> obj_map;
  std::vector<ArrowId> arrow_map;
  std::vector<char> done;
  std::vector<int> used;
  std::size_t candidates = 0;
  bool stop = false;

  HomSearch(const GroupoidPtr& src, const GroupoidPtr& tgt, const std::function<bool(const GroupoidHom&)>& v,
            const HomSearchOptions& o)
      : s(*src), t(*tgt), source(src), target(tgt), visit(v), options(o) {
    comps = spanning_orbits(s);
    comp_of.assign(s.num_objects(), 0);
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (ObjectId x : comps[i].members) comp_of[x] = static_cast<int>(i);
    for (const auto& c : comps) root_iso.push_back(isotropy(s, c.root));
    for (ObjectId o2 = 0; o2 < t.num_objects(); ++o2) {
      target_iso.push_back(isotropy(t, o2));
      target_out.push_back(t.arrows_from(o2));
    }
    // Components in graph-BFS order so continuity constraints bite early.
    std::vector<char> placed(comps.size(), 0);
    for (std::size_t start = 0; start < comps.size(); ++start) {
      if (placed[start]) continue;
      placed[start] = 1;
      std::size_t head = order.size();
      order.push_back(static_cast<int>(start));
      while (head < order.size()) {
        int c = order[head++];
        for (ObjectId x : comps[c].members)
          for (ObjectId y : s.base.neighbors(x))
            if (!placed[comp_of[y]]) {
              placed[comp_of[y]] = 1;
              order.push_back(comp_of[y]);
            }
      }
    }
    obj_map.assign(s.num_objects(), kNone);
    arrow_map.assign(s.num_arrows(), kNone);
    done.assign(comps.size(), 0);
    used.assign(t.num_objects(), 0);
  }

  const std::vector<GroupMap>& homs(int c, ObjectId o) {
    auto key = std::make_pair(c, o);
    auto it = hom_cache.find(key);
    if (it != hom_cache.end()) return it->second;
    return hom_cache[key] = enumerate_homomorphisms(root_iso[c].group, target_iso[o].group);
  }

  bool object_ok(ObjectId x, ObjectId image) const {
    if (!options.fixed_objects.empty() && options.fixed_objects[x] != kNone && options.fixed_objects[x] != image)
      return false;
    if (options.injective_on_objects && used[image]) return false;
    for (ObjectId y : s.base.neighbors(x))
      if (obj_map[y] != kNone && !t.base.adjacent_or_equal(obj_map[y], image)) return false;
    return true;
  }

  void set_object(ObjectId x, ObjectId image) {
    obj_map[x] = image;
    ++used[image];
  }
  void clear_object(ObjectId x) {
    --used[obj_map[x]];
    obj_map[x] = kNone;
  }

  bool fill_arrows(int c, const GroupMap& rho) {
    const auto& comp = comps[c];
    const auto& iso_s = root_iso[c];
    const auto& iso_t = target_iso[obj_map[comp.root]];
    for (ArrowId a = 0; a < s.num_arrows(); ++a) {
      if (comp_of[s.src[a]] != c) continue;
      ArrowId ay = comp.span.at(s.src[a]), az = comp.span.at(s.tgt[a]);
      ArrowId loop = s.compose(s.compose(s.inv[az], a), ay);
      ArrowId image_loop = iso_t.arrows[rho[iso_s.index_of(loop)]];
      arrow_map[a] = t.compose(t.compose(arrow_map[az], image_loop), t.inv[arrow_map[ay]]);
    }
    for (ArrowId a = 0; a < s.num_arrows(); ++a) {
      if (comp_of[s.src[a]] != c || a >= static_cast<int>(s.sheets.size())) continue;
      for (auto [y, b] : s.sheets[a]) {
        if (comp_of[y] != c && !done[comp_of[y]]) continue;
        if (t.continuation_or_self(arrow_map[a], obj_map[y]) != arrow_map[b]) return false;
        if (t.continuation_or_self(arrow_map[b], obj_map[s.src[a]]) != arrow_map[a]) return false;
      }
    }
    return true;
  }

  void clear_arrows(int c) {
    for (ArrowId a = 0; a < s.num_arrows(); ++a)
      if (comp_of[s.src[a]] == c) arrow_map[a] = kNone;
  }

  void run_component(std::size_t pos) {
    if (stop) return;
    if (pos == order.size()) {
      GroupoidHom h{source, target, obj_map, arrow_map};
      if (!visit(h)) stop = true;
      return;
    }
    const int c = order[pos];
    const auto& comp = comps[c];
    for (ObjectId o = 0; o < t.num_objects() && !stop; ++o) {
      if (!object_ok(comp.root, o)) continue;
      set_object(comp.root, o);
      for (const GroupMap& rho : homs(c, o)) {
        if (stop) break;
        assign_member(pos, 1, rho);
      }
      clear_object(comp.root);
    }
  }

  void assign_member(std::size_t pos, std::size_t k, const GroupMap& rho) {
    const int c = order[pos];
    const auto& comp = comps[c];
    if (k == comp.members.size()) {
      if (++candidates > options.max_candidates) throw ResourceLimit("homomorphism search exceeded its candidate cap");
      arrow_map[s.unit[comp.root]] = t.unit[obj_map[comp.root]];
      // span images: root -> y is the chosen arrow; stash before the fill pass overwrites
      std::vector<std::pair<ArrowId, ArrowId>> spans;
      for (ObjectId y : comp.members) spans.emplace_back(comp.span.at(y), arrow_map[comp.span.at(y)]);
      bool ok = fill_arrows(c, rho);
      for (auto [a, img] : spans) ok = ok && arrow_map[a] == img;
      if (ok) {
        done[c] = 1;
        run_component(pos + 1);
        done[c] = 0;
      }
      clear_arrows(c);
      return;
    }
    const ObjectId y = comp.members[k];
    const ArrowId span = comp.span.at(y);
    for (ArrowId b : target_out[obj_map[comp.root]]) {
      if (stop) return;
      if (!object_ok(y, t.tgt[b])) continue;
      set_object(y, t.tgt[b]);
      arrow_map[span] = b;
      assign_member(pos, k + 1, rho);
      arrow_map[span] = kNone;
      clear_object(y);
    }
  }
};

}  // namespace

void for_each_hom(const GroupoidPtr& source, const GroupoidPtr& target,
                  const std::function<bool(const GroupoidHom&)>& visit, const HomSearchOptions& options) {
  HomSearch search(source, target, visit, options);
  search.run_component(0);
}

std::vector<GroupoidHom> enumerate_homs(const GroupoidPtr& source, const GroupoidPtr& target,
                                        const HomSearchOptions& options) {
  std::vector<GroupoidHom> out;
  for_each_hom(
      source, target,
      [&](const GroupoidHom& h) {
        out.push_back(h);
        return true;
      },
      options);
  return out;
}

std::optional<GroupoidHom> find_groupoid_isomorphism(const GroupoidPtr& a, const GroupoidPtr& b) {
  if (a->num_objects() != b->num_objects() || a->num_arrows() != b->num_arrows() ||
      a->base.edges().size() != b->base.edges().size())
    return std::nullopt;
  auto sheet_count = [](const FiniteGroupoid& g) {
    std::size_t n = 0;
    for (const auto& s : g.sheets) n += s.size();
    return n;
  };
  if (sheet_count(*a) != sheet_count(*b)) return std::nullopt;
  HomSearchOptions options;
  options.injective_on_objects = true;
  std::optional<GroupoidHom> found;
  for_each_hom(
      a, b,
      [&](const GroupoidHom& h) {
        std::set<ArrowId> images(h.arrow_map.begin(), h.arrow_map.end());
        if (static_cast<int>(images.size()) != a->num_arrows()) return true;
        for (auto [x, y] : a->base.edges())
          if (!b->base.adjacent(h.obj_map[x], h.obj_map[y])) return true;
        found = h;
        return false;
      },
      options);
  return found;
}

}  // namespace etale
