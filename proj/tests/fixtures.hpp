// Shared fixtures and brute-force oracles for the tests. The oracles deliberately avoid the
// library routines they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "etale/bundle.hpp"
#include "etale/developable.hpp"
#include "etale/extensions.hpp"
#include "etale/groupoid.hpp"
#include "etale/loops.hpp"
#include "etale/morphisms.hpp"

namespace fx {

using namespace etale;
using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// ------------------------------------------------------------------ groups

// Closure of a set of permutations of {0..n-1} under composition; (a*b)(x) = a(b(x)).
inline FiniteGroup permutation_group(const std::vector<std::vector<int>>& gens, int n) {
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);
  std::vector<std::vector<int>> el{id};
  std::map<std::vector<int>, int> index{{id, 0}};
  for (std::size_t i = 0; i < el.size(); ++i)
    for (const auto& g : gens) {
      std::vector<int> c(n);
      for (int x = 0; x < n; ++x) c[x] = g[el[i][x]];
      if (index.emplace(c, static_cast<int>(el.size())).second) el.push_back(c);
    }
  const int m = static_cast<int>(el.size());
  std::vector<int> table(m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      std::vector<int> c(n);
      for (int x = 0; x < n; ++x) c[x] = el[a][el[b][x]];
      table[a * m + b] = index.at(c);
    }
  return FiniteGroup(m, table);
}

inline FiniteGroup alternating4() { return permutation_group({{1, 2, 0, 3}, {1, 0, 3, 2}}, 4); }

// <a, x | a^6, x^2 = a^3, x a x^-1 = a^-1>, element a^k x^j at index 2k + j.
inline FiniteGroup dicyclic3() {
  std::vector<int> table(144);
  for (int k1 = 0; k1 < 6; ++k1)
    for (int j1 = 0; j1 < 2; ++j1)
      for (int k2 = 0; k2 < 6; ++k2)
        for (int j2 = 0; j2 < 2; ++j2) {
          int k, j;
          if (j1 == 0) {
            k = k1 + k2;
            j = j2;
          } else if (j2 == 0) {
            k = k1 - k2;
            j = 1;
          } else {
            k = k1 - k2 + 3;
            j = 0;
          }
          table[(2 * k1 + j1) * 12 + 2 * k2 + j2] = 2 * ((k % 6 + 6) % 6) + j;
        }
  return FiniteGroup(12, table);
}

// Every group of order at most 12, up to isomorphism.
inline std::vector<std::pair<std::string, FiniteGroup>> groups_up_to_12() {
  auto C = [](int n) { return FiniteGroup::cyclic(n); };
  auto X = [](const FiniteGroup& a, const FiniteGroup& b) { return FiniteGroup::direct_product(a, b); };
  return {{"1", FiniteGroup::trivial()},
          {"C2", C(2)},
          {"C3", C(3)},
          {"C4", C(4)},
          {"C2xC2", X(C(2), C(2))},
          {"C5", C(5)},
          {"C6", C(6)},
          {"S3", FiniteGroup::symmetric(3)},
          {"C7", C(7)},
          {"C8", C(8)},
          {"C4xC2", X(C(4), C(2))},
          {"C2xC2xC2", X(X(C(2), C(2)), C(2))},
          {"D4", FiniteGroup::dihedral(4)},
          {"Q8", FiniteGroup::quaternion()},
          {"C9", C(9)},
          {"C3xC3", X(C(3), C(3))},
          {"C10", C(10)},
          {"D5", FiniteGroup::dihedral(5)},
          {"C11", C(11)},
          {"C12", C(12)},
          {"C6xC2", X(C(6), C(2))},
          {"A4", alternating4()},
          {"D6", FiniteGroup::dihedral(6)},
          {"Dic3", dicyclic3()}};
}

inline std::vector<int> subgroup_closure(const FiniteGroup& g, const std::vector<int>& gens) {
  std::set<int> h{g.identity()};
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> cur(h.begin(), h.end());
    for (int a : cur)
      for (int b : gens)
        if (h.insert(g.mul(a, b)).second) changed = true;
  }
  return {h.begin(), h.end()};
}

// ------------------------------------------------------------------ fixtures

inline GroupAction fixture_A() {
  return GroupAction{FiniteGroup::cyclic(2), ObjectGraph::path({"-1", "0", "1"}), {0, 1, 2, 2, 1, 0}};
}

// Z/2 swapping the two ends of a single edge.
inline GroupAction flip_edge() {
  return GroupAction{FiniteGroup::cyclic(2), ObjectGraph::path({"p", "q"}), {0, 1, 1, 0}};
}

// Two objects joined by an edge and one arrow each way; no continuations beyond units.
inline GroupoidPtr segment() {
  auto g = std::make_shared<FiniteGroupoid>();
  g->base = ObjectGraph::path({"x", "y"});
  g->arrow_names = {"1_x", "1_y", "f", "g"};
  g->src = {0, 1, 0, 1};
  g->tgt = {0, 1, 1, 0};
  g->unit = {0, 1};
  g->inv = {0, 1, 3, 2};
  for (ArrowId a = 0; a < 4; ++a) {
    g->set_compose(g->unit[g->tgt[a]], a, a);
    g->set_compose(a, g->unit[g->src[a]], a);
  }
  g->set_compose(3, 2, 0);
  g->set_compose(2, 3, 1);
  g->sheets.assign(4, {});
  add_unit_sheets(*g);
  return g;
}

// Tree shapes on at most five vertices.
inline std::vector<ObjectGraph> small_trees() {
  auto names = [](int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("v" + std::to_string(i));
    return v;
  };
  return {ObjectGraph::path(names(2)),
          ObjectGraph::path(names(3)),
          ObjectGraph::path(names(4)),
          ObjectGraph::path(names(5)),
          ObjectGraph(names(4), {{0, 1}, {0, 2}, {0, 3}}),
          ObjectGraph(names(5), {{0, 1}, {0, 2}, {0, 3}, {0, 4}}),
          ObjectGraph(names(5), {{0, 1}, {1, 2}, {2, 3}, {1, 4}})};
}

inline GroupAction action_through(const FiniteGroup& gamma, const ObjectGraph& tree,
                                  const std::vector<std::vector<ObjectId>>& autos, const GroupMap& hom) {
  GroupAction a{gamma, tree, {}};
  for (int g = 0; g < gamma.order(); ++g) a.table.insert(a.table.end(), autos[hom[g]].begin(), autos[hom[g]].end());
  return a;
}

// A random group with |group| <= max_order acting on a random tree with <= max_objects vertices,
// preferring nontrivial actions.
inline GroupAction random_tree_action(Rng& rng, int max_order = 4, int max_objects = 5) {
  std::vector<FiniteGroup> groups;
  for (const auto& [name, g] : groups_up_to_12())
    if (g.order() >= 2 && g.order() <= max_order) groups.push_back(g);
  std::vector<ObjectGraph> trees;
  for (const auto& t : small_trees())
    if (t.size() <= max_objects) trees.push_back(t);
  for (int attempt = 0;; ++attempt) {
    const FiniteGroup& gamma = groups[uniform(rng, 0, static_cast<int>(groups.size()) - 1)];
    const ObjectGraph& tree = trees[uniform(rng, 0, static_cast<int>(trees.size()) - 1)];
    auto autos = graph_automorphisms(tree);
    std::map<std::vector<ObjectId>, int> index;
    for (std::size_t i = 0; i < autos.size(); ++i) index[autos[i]] = static_cast<int>(i);
    const int m = static_cast<int>(autos.size());
    std::vector<int> table(m * m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        std::vector<ObjectId> c(tree.size());
        for (int x = 0; x < tree.size(); ++x) c[x] = autos[a][autos[b][x]];
        table[a * m + b] = index.at(c);
      }
    FiniteGroup aut(m, table);
    auto homs = enumerate_homomorphisms(gamma, aut);
    std::vector<GroupMap> nontrivial;
    for (const auto& h : homs)
      if (std::any_of(h.begin(), h.end(), [&](int v) { return v != aut.identity(); })) nontrivial.push_back(h);
    if (nontrivial.empty() && attempt < 20) continue;
    const auto& pool = nontrivial.empty() ? homs : nontrivial;
    return action_through(gamma, tree, autos, pool[uniform(rng, 0, static_cast<int>(pool.size()) - 1)]);
  }
}

// Random action groupoid: a disjoint union of coset spaces with invariant edges, sometimes
// restricted to a subset of objects. At most 8 objects and 64 arrows.
inline GroupoidPtr random_groupoid(Rng& rng) {
  std::vector<FiniteGroup> groups;
  for (const auto& [name, g] : groups_up_to_12())
    if (g.order() <= 8) groups.push_back(g);
  const FiniteGroup& gamma = groups[uniform(rng, 0, static_cast<int>(groups.size()) - 1)];
  const int max_objects = std::min(8, 64 / gamma.order());
  // Cosets gH of random subgroups; object = (block, coset).
  std::vector<std::vector<int>> coset_of_element;  // per block: element -> coset index
  std::vector<int> block_offset;
  int n = 0;
  while (true) {
    std::vector<int> gens;
    for (int k = uniform(rng, 0, 2); k > 0; --k) gens.push_back(uniform(rng, 0, gamma.order() - 1));
    auto h = subgroup_closure(gamma, gens);
    const int cosets = gamma.order() / static_cast<int>(h.size());
    if (n + cosets > max_objects) {
      if (n > 0) break;
      continue;
    }
    std::vector<int> label(gamma.order(), -1);
    int next = 0;
    for (int g = 0; g < gamma.order(); ++g) {
      if (label[g] != -1) continue;
      for (int x : h) label[gamma.mul(g, x)] = next;
      ++next;
    }
    block_offset.push_back(n);
    coset_of_element.push_back(label);
    n += cosets;
    if (uniform(rng, 0, 2) == 0) break;
  }
  std::vector<ObjectId> table(gamma.order() * n);
  for (std::size_t b = 0; b < coset_of_element.size(); ++b) {
    const auto& label = coset_of_element[b];
    std::vector<int> rep(gamma.order());  // coset -> an element in it
    for (int g = 0; g < gamma.order(); ++g) rep[label[g]] = g;
    for (int g = 0; g < gamma.order(); ++g)
      for (int h = 0; h < gamma.order(); ++h)
        if (rep[label[h]] == h) table[g * n + block_offset[b] + label[h]] = block_offset[b] + label[gamma.mul(g, h)];
  }
  std::set<std::pair<int, int>> edges;
  for (int k = uniform(rng, 0, n); k > 0; --k) {
    int x = uniform(rng, 0, n - 1), y = uniform(rng, 0, n - 1);
    if (x == y) continue;
    bool ok = true;
    std::set<std::pair<int, int>> orbit;
    for (int g = 0; g < gamma.order(); ++g) {
      int a = table[g * n + x], b = table[g * n + y];
      if (a == b) ok = false;
      orbit.insert({std::min(a, b), std::max(a, b)});
    }
    if (ok) edges.insert(orbit.begin(), orbit.end());
  }
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("o" + std::to_string(i));
  GroupAction a{gamma, ObjectGraph(names, {edges.begin(), edges.end()}), table};
  GroupoidPtr g = action_groupoid(a);
  if (n > 1 && uniform(rng, 0, 2) == 0) {
    std::vector<ObjectId> subset;
    for (int x = 0; x < n; ++x)
      if (uniform(rng, 0, 1)) subset.push_back(x);
    if (subset.empty()) subset.push_back(0);
    g = restrict_groupoid(g, subset).groupoid;
  }
  return g;
}

// Each object gets a piece: itself plus a random set of neighbors; occasionally an extra edge piece.
inline OpenCover random_cover(Rng& rng, const ObjectGraph& graph) {
  OpenCover c;
  for (ObjectId x = 0; x < graph.size(); ++x) {
    std::vector<ObjectId> piece{x};
    for (ObjectId y : graph.neighbors(x))
      if (uniform(rng, 0, 1)) piece.push_back(y);
    std::sort(piece.begin(), piece.end());
    c.pieces.push_back(piece);
  }
  if (!graph.edges().empty() && uniform(rng, 0, 1)) {
    auto [a, b] = graph.edges()[uniform(rng, 0, static_cast<int>(graph.edges().size()) - 1)];
    c.pieces.push_back({a, b});
  }
  return c;
}

// ------------------------------------------------------------------ oracles

// Transitive closure of the arrow relation, blocks sorted by least object.
inline std::vector<std::vector<ObjectId>> orbit_oracle(const FiniteGroupoid& g) {
  const int n = g.num_objects();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int x = 0; x < n; ++x) reach[x][x] = 1;
  for (ArrowId a = 0; a < g.num_arrows(); ++a) reach[g.src[a]][g.tgt[a]] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  std::vector<std::vector<ObjectId>> out;
  std::vector<char> done(n, 0);
  for (int x = 0; x < n; ++x) {
    if (done[x]) continue;
    std::vector<ObjectId> block;
    for (int y = 0; y < n; ++y)
      if (reach[x][y]) {
        block.push_back(y);
        done[y] = 1;
      }
    out.push_back(block);
  }
  return out;
}

// Groupoid axioms checked straight from the definitions.
inline bool groupoid_axioms_oracle(const FiniteGroupoid& g) {
  const int n = g.num_objects(), m = g.num_arrows();
  if (static_cast<int>(g.tgt.size()) != m || static_cast<int>(g.inv.size()) != m ||
      static_cast<int>(g.unit.size()) != n || static_cast<int>(g.sheets.size()) != m)
    return false;
  auto in = [](int v, int hi) { return v >= 0 && v < hi; };
  for (int a = 0; a < m; ++a)
    if (!in(g.src[a], n) || !in(g.tgt[a], n) || !in(g.inv[a], m)) return false;
  for (int x = 0; x < n; ++x)
    if (!in(g.unit[x], m) || g.src[g.unit[x]] != x || g.tgt[g.unit[x]] != x) return false;
  auto comp = [&](int a, int b) {
    auto it = g.comp.find(FiniteGroupoid::key(a, b));
    return it == g.comp.end() ? -1 : it->second;
  };
  for (const auto& [k, v] : g.comp) {
    int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffU);
    if (!in(a, m) || !in(b, m) || !in(v, m) || g.src[a] != g.tgt[b]) return false;
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (g.src[a] != g.tgt[b]) continue;
      int ab = comp(a, b);
      if (ab < 0 || g.src[ab] != g.src[b] || g.tgt[ab] != g.tgt[a]) return false;
    }
  for (int a = 0; a < m; ++a) {
    if (comp(g.unit[g.tgt[a]], a) != a || comp(a, g.unit[g.src[a]]) != a) return false;
    int i = g.inv[a];
    if (g.src[i] != g.tgt[a] || g.tgt[i] != g.src[a]) return false;
    if (comp(a, i) != g.unit[g.tgt[a]] || comp(i, a) != g.unit[g.src[a]]) return false;
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (g.src[a] != g.tgt[b]) continue;
      for (int c = 0; c < m; ++c)
        if (g.src[b] == g.tgt[c] && comp(comp(a, b), c) != comp(a, comp(b, c))) return false;
    }
  auto cont = [&](int a, int y) {
    for (auto [z, b] : g.sheets[a])
      if (z == y) return b;
    return -1;
  };
  for (int a = 0; a < m; ++a)
    for (auto [y, b] : g.sheets[a]) {
      if (!in(y, n) || !in(b, m)) return false;
      if (!g.base.adjacent(g.src[a], y) || g.src[b] != y || !g.base.adjacent(g.tgt[a], g.tgt[b])) return false;
      if (cont(b, g.src[a]) != a) return false;
      int bi = cont(g.inv[a], g.tgt[b]);
      if (bi != -1 && bi != g.inv[b]) return false;
    }
  for (int x = 0; x < n; ++x)
    for (auto [y, b] : g.sheets[g.unit[x]])
      if (b != g.unit[y]) return false;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (g.src[a] != g.tgt[b]) continue;
      for (auto [y, bb] : g.sheets[b]) {
        int aa = cont(a, g.tgt[bb]);
        int ab = cont(comp(a, b), y);
        if (aa != -1 && ab != -1 && comp(aa, bb) != ab) return false;
      }
    }
  return true;
}

// Every pair (f, psi) with f any object map and psi any element map, filtered by the definitions.
inline long count_pairs_bruteforce(const GroupAction& s, const GroupAction& t) {
  const int n = s.space.size(), q = s.group.order(), np = t.space.size(), qp = t.group.order();
  long count = 0;
  std::vector<int> psi(q, 0);
  std::function<void(int)> over_psi = [&](int i) {
    if (i == q) {
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
          if (psi[s.group.mul(a, b)] != t.group.mul(psi[a], psi[b])) return;
      std::vector<int> f(n, 0);
      std::function<void(int)> over_f = [&](int x) {
        if (x == n) {
          for (auto [u, v] : s.space.edges())
            if (f[u] != f[v] && !t.space.adjacent(f[u], f[v])) return;
          for (int g = 0; g < q; ++g)
            for (int y = 0; y < n; ++y)
              if (f[s.table[g * n + y]] != t.table[psi[g] * np + f[y]]) return;
          ++count;
          return;
        }
        for (int v = 0; v < np; ++v) {
          f[x] = v;
          over_f(x + 1);
        }
      };
      over_f(0);
      return;
    }
    for (int v = 0; v < qp; ++v) {
      psi[i] = v;
      over_psi(i + 1);
    }
  };
  over_psi(0);
  return count;
}

// Counts bijections fixing the basepoint that preserve s, t, both actions and continuations.
inline long count_pointed_automorphisms(const PointedBundle& p, long cap = 1000) {
  const Bundle& b = p.bundle;
  const int n = b.size();
  const int ga = b.right->num_arrows(), gpa = b.left->num_arrows();
  std::vector<int> m(n, -1), used(n, 0);
  long count = 0;
  auto consistent = [&]() {
    for (int e = 0; e < n; ++e) {
      if (m[e] < 0) continue;
      for (int g = 0; g < ga; ++g) {
        int r = b.right_act[e * ga + g];
        if (r >= 0 && m[r] >= 0 && b.right_act[m[e] * ga + g] != m[r]) return false;
      }
      for (int g = 0; g < gpa; ++g) {
        int l = b.left_act[g * n + e];
        if (l >= 0 && m[l] >= 0 && b.left_act[g * n + m[e]] != m[l]) return false;
      }
      for (auto [y, c] : b.sheets[e]) {
        if (m[c] < 0) continue;
        int image = -1;
        for (auto [z, d] : b.sheets[m[e]])
          if (z == y) image = d;
        if (image != m[c]) return false;
      }
    }
    return true;
  };
  std::function<void(int)> go = [&](int e) {
    if (count >= cap) return;
    if (e == n) {
      ++count;
      return;
    }
    if (m[e] >= 0) {
      go(e + 1);
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (used[v] || b.s[v] != b.s[e] || b.t[v] != b.t[e]) continue;
      m[e] = v;
      used[v] = 1;
      if (consistent()) go(e + 1);
      m[e] = -1;
      used[v] = 0;
    }
  };
  m[p.base] = p.base;
  used[p.base] = 1;
  if (consistent()) go(0);
  return count;
}

// Relabels elements by `perm` (old -> new).
inline PointedBundle relabel(const PointedBundle& p, const std::vector<int>& perm) {
  const Bundle& b = p.bundle;
  const int n = b.size(), ga = b.right->num_arrows(), gpa = b.left->num_arrows();
  std::vector<int> inv(n);
  for (int e = 0; e < n; ++e) inv[perm[e]] = e;
  PointedBundle q{b, perm[p.base], p.star};
  Bundle& c = q.bundle;
  for (int e = 0; e < n; ++e) {
    const int o = inv[e];
    c.s[e] = b.s[o];
    c.t[e] = b.t[o];
    if (!b.labels.empty()) c.labels[e] = b.labels[o];
    c.sheets[e].clear();
    for (auto [y, d] : b.sheets[o]) c.sheets[e].push_back({y, perm[d]});
    for (int g = 0; g < ga; ++g) {
      int r = b.right_act[o * ga + g];
      c.right_act[e * ga + g] = r < 0 ? r : perm[r];
    }
    for (int g = 0; g < gpa; ++g) {
      int l = b.left_act[g * n + o];
      c.left_act[g * n + e] = l < 0 ? l : perm[l];
    }
  }
  return q;
}

// Schreier data search: lifts phi(q) in the outer classes of psi and a normalized factor set f
// with phi(a)phi(b) = Ad f(a,b) phi(ab) and phi(a)(f(b,c)) f(a,bc) = f(a,b) f(ab,c).
// A hit is certified by building the extension and checking its table.
inline bool extension_exists_oracle(const FiniteGroup& q, const FiniteGroup& n, const GroupMap& psi) {
  OuterAutomorphismGroup out = outer_automorphism_group(n);
  const auto& aut = out.aut;
  const int nq = q.order(), nn = n.order();
  auto ad = [&](int x) {
    GroupMap m(nn);
    for (int y = 0; y < nn; ++y) m[y] = n.conj(x, y);
    return m;
  };
  std::vector<GroupMap> inner(nn);
  for (int x = 0; x < nn; ++x) inner[x] = ad(x);
  std::vector<int> phi(nq, -1);  // aut index
  std::vector<int> f(nq * nq, -1);
  auto compose = [&](const GroupMap& a, const GroupMap& b) {
    GroupMap c(nn);
    for (int y = 0; y < nn; ++y) c[y] = a[b[y]];
    return c;
  };
  bool found = false;
  std::function<void(int)> over_f;
  auto certify = [&]() {
    const int order = nq * nn;
    std::vector<int> table(order * order);
    for (int a = 0; a < order; ++a)
      for (int b = 0; b < order; ++b) {
        int na = a % nn, qa = a / nn, nb = b % nn, qb = b / nn;
        int prod = n.mul(n.mul(na, aut.maps[phi[qa]][nb]), f[qa * nq + qb]);
        table[a * order + b] = q.mul(qa, qb) * nn + prod;
      }
    return validate_group_table(order, table).empty();
  };
  over_f = [&](int k) {
    if (found) return;
    if (k == nq * nq) {
      found = certify();
      return;
    }
    const int a = k / nq, b = k % nq;
    if (a == q.identity() || b == q.identity()) {
      f[k] = n.identity();
      over_f(k + 1);
      return;
    }
    GroupMap want = compose(compose(aut.maps[phi[a]], aut.maps[phi[b]]), inverse_map(aut.maps[phi[q.mul(a, b)]]));
    for (int x = 0; x < nn && !found; ++x) {
      if (inner[x] != want) continue;
      f[k] = x;
      // Check every cocycle condition whose four values are now known.
      bool ok = true;
      for (int i = 0; i < nq && ok; ++i)
        for (int j = 0; j < nq && ok; ++j)
          for (int l = 0; l < nq && ok; ++l) {
            int v1 = f[j * nq + l], v2 = f[i * nq + q.mul(j, l)], v3 = f[i * nq + j], v4 = f[q.mul(i, j) * nq + l];
            if (v1 < 0 || v2 < 0 || v3 < 0 || v4 < 0) continue;
            if (n.mul(aut.maps[phi[i]][v1], v2) != n.mul(v3, v4)) ok = false;
          }
      if (ok) over_f(k + 1);
      f[k] = -1;
    }
  };
  std::function<void(int)> over_phi = [&](int a) {
    if (found) return;
    if (a == nq) {
      over_f(0);
      return;
    }
    if (a == q.identity()) {
      phi[a] = aut.index_of(inner[n.identity()]);
      over_phi(a + 1);
      return;
    }
    for (int cand : out.coset_members[psi[a]]) {
      phi[a] = cand;
      over_phi(a + 1);
      if (found) return;
    }
  };
  over_phi(0);
  return found;
}

// Crossed-module axioms straight from the definitions.
inline bool crossed_module_oracle(const CrossedModule& cm) {
  const FiniteGroup& g = cm.gamma;
  const FiniteGroup& s = cm.s;
  if (static_cast<int>(cm.mu.size()) != g.order() || static_cast<int>(cm.action.size()) != s.order()) return false;
  for (int a = 0; a < g.order(); ++a)
    for (int b = 0; b < g.order(); ++b)
      if (cm.mu[g.mul(a, b)] != s.mul(cm.mu[a], cm.mu[b])) return false;
  for (int u = 0; u < s.order(); ++u) {
    std::vector<char> hit(g.order(), 0);
    for (int x = 0; x < g.order(); ++x) {
      int y = cm.action[u][x];
      if (y < 0 || y >= g.order() || hit[y]) return false;
      hit[y] = 1;
    }
    for (int a = 0; a < g.order(); ++a)
      for (int b = 0; b < g.order(); ++b)
        if (cm.action[u][g.mul(a, b)] != g.mul(cm.action[u][a], cm.action[u][b])) return false;
  }
  for (int x = 0; x < g.order(); ++x)
    if (cm.action[s.identity()][x] != x) return false;
  for (int u = 0; u < s.order(); ++u)
    for (int v = 0; v < s.order(); ++v)
      for (int x = 0; x < g.order(); ++x)
        if (cm.action[s.mul(u, v)][x] != cm.action[u][cm.action[v][x]]) return false;
  for (int u = 0; u < s.order(); ++u)
    for (int x = 0; x < g.order(); ++x)
      if (cm.mu[cm.action[u][x]] != s.mul(s.mul(u, cm.mu[x]), s.inv(u))) return false;
  for (int x = 0; x < g.order(); ++x)
    for (int y = 0; y < g.order(); ++y)
      if (cm.action[cm.mu[x]][y] != g.mul(g.mul(x, y), g.inv(x))) return false;
  return true;
}

// ------------------------------------------------------------------ loops

inline constexpr double kPi = 3.14159265358979323846;

// The equator with out-of-plane modes 2 and 3 and an in-plane ripple: orthogonal to the
// latitude and tilt directions, so descent returns to the great circle.
inline TwistedLoop perturbed_equator(int n, Rng& rng, double amplitude = 0.05) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  const double a2 = u(rng), a3 = u(rng), b5 = u(rng);
  TwistedLoop loop{Geometry::sphere(), {}, IsometryElement{}};
  for (int k = 0; k < n; ++k) {
    const double th = 2 * kPi * k / n;
    Vec p(std::cos(th), std::sin(th), a2 * std::sin(2 * th) + a3 * std::cos(3 * th));
    p += Vec(-std::sin(th), std::cos(th), 0) * b5 * std::sin(5 * th);
    loop.samples.push_back(p.normalized());
  }
  return loop;
}

inline IsometryElement random_rotation(Rng& rng) {
  std::normal_distribution<double> nd;
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  IsometryElement e;
  e.linear = q.normalized().toRotationMatrix();
  e.word = "g";
  return e;
}

inline IsometryElement random_plane_motion(Rng& rng) {
  std::uniform_real_distribution<double> u(-3, 3);
  IsometryElement e = rotation_z(u(rng));
  if (uniform(rng, 0, 1)) e.linear.col(1) *= -1;  // include reflections
  e.translation = Vec(u(rng), u(rng), 0);
  e.word = "g";
  return e;
}

// Relative error between energy_gradient and central differences along a tangent basis.
inline double gradient_fd_error(const TwistedLoop& loop, double h = 1e-6) {
  const Geometry& geo = loop.geometry;
  SectionField g = energy_gradient(loop);
  double num = 0, den = 0;
  for (int k = 0; k < loop.size(); ++k)
    for (const Vec& e : geo.tangent_basis(loop.samples[k])) {
      TwistedLoop plus = loop, minus = loop;
      plus.samples[k] = geo.exp(loop.samples[k], h * e);
      minus.samples[k] = geo.exp(loop.samples[k], -h * e);
      const double fd = (loop_measurements(plus).energy - loop_measurements(minus).energy) / (2 * h);
      const double an = g.v[k].dot(e);
      num += (fd - an) * (fd - an);
      den += an * an;
    }
  return std::sqrt(num / std::max(den, 1e-300));
}

// A random tangent section with sup norm below eps.
inline SectionField random_section(const TwistedLoop& loop, Rng& rng, double eps) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0, 0.999);
  SectionField nu;
  for (const Vec& x : loop.samples) {
    Vec v = loop.geometry.project_tangent(x, Vec(nd(rng), nd(rng), nd(rng)));
    const double norm = v.norm();
    nu.v.push_back(norm > 0 ? v * (eps * u(rng) / norm) : v);
  }
  return nu;
}

}  // namespace fx
