#include "etale/developable.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace etale {

PairCheck check_equivariant_pair(const EquivariantPair& pair, const GroupAction& source, const GroupAction& target) {
  const int n = source.space.size();
  if (static_cast<int>(pair.f.size()) != n) return {false, "object map has the wrong size"};
  for (ObjectId v : pair.f)
    if (v < 0 || v >= target.space.size()) return {false, "object map leaves the target space"};
  if (static_cast<int>(pair.psi.size()) != source.group.order() || !is_homomorphism(source.group, target.group, pair.psi))
    return {false, "psi is not a homomorphism"};
  for (auto [x, y] : source.space.edges())
    if (!target.space.adjacent_or_equal(pair.f[x], pair.f[y]))
      return {false, "edge " + source.space.name(x) + "-" + source.space.name(y) + " is torn apart"};
  for (int g = 0; g < source.group.order(); ++g)
    for (ObjectId x = 0; x < n; ++x)
      if (pair.f[source.act(g, x)] != target.act(pair.psi[g], pair.f[x]))
        return {false, "equivariance fails at (" + source.group.name(g) + ", " + source.space.name(x) + ")"};
  return {true, ""};
}

std::vector<EquivariantPair> enumerate_equivariant_pairs(const GroupAction& source, const GroupAction& target) {
  if (!source.space.is_tree()) throw Error("equivariant pairs describe morphisms only when the source space is a tree");
  const int n = source.space.size(), q = source.group.order();
  std::vector<EquivariantPair> out;
  for (const GroupMap& psi : enumerate_homomorphisms(source.group, target.group)) {
    std::vector<ObjectId> f(n, kNone);
    std::function<void(ObjectId)> assign = [&](ObjectId x) {
      if (x == n) {
        EquivariantPair p{f, psi};
        if (check_equivariant_pair(p, source, target).ok) out.push_back(std::move(p));
        return;
      }
      if (f[x] != kNone) {
        assign(x + 1);
        return;
      }
      for (ObjectId v = 0; v < target.space.size(); ++v) {
        // Fix f on the whole orbit of x.
        std::vector<ObjectId> touched;
        bool ok = true;
        for (int g = 0; g < q && ok; ++g) {
          ObjectId gx = source.act(g, x);
          ObjectId image = target.act(psi[g], v);
          if (f[gx] == kNone) {
            f[gx] = image;
            touched.push_back(gx);
          } else if (f[gx] != image) {
            ok = false;
          }
        }
        for (ObjectId y : touched)
          for (ObjectId z : source.space.neighbors(y))
            if (ok && f[z] != kNone && !target.space.adjacent_or_equal(f[y], f[z])) ok = false;
        if (ok) assign(x + 1);
        for (ObjectId y : touched) f[y] = kNone;
      }
    };
    assign(0);
  }
  std::sort(out.begin(), out.end());
  return out;
}

EquivariantPair act_on_pair(const GroupAction& target, int gamma, const EquivariantPair& pair) {
  EquivariantPair out;
  for (ObjectId v : pair.f) out.f.push_back(target.act(gamma, v));
  out.psi = compose_maps(inner_automorphism(target.group, gamma), pair.psi);
  return out;
}

GroupoidHom pair_to_hom(const EquivariantPair& pair, const GroupAction& source, const GroupAction& target,
                        const GroupoidPtr& source_groupoid, const GroupoidPtr& target_groupoid) {
  GroupoidHom h{source_groupoid, target_groupoid, pair.f, {}};
  for (int g = 0; g < source.group.order(); ++g)
    for (ObjectId x = 0; x < source.space.size(); ++x)
      h.arrow_map.push_back(action_arrow(target, pair.psi[g], pair.f[x]));
  return h;
}

// ---------------------------------------------------------------- crossed modules

Report validate_crossed_module(const CrossedModule& cm) {
  Report r;
  const FiniteGroup& g = cm.gamma;
  const FiniteGroup& s = cm.s;
  if (static_cast<int>(cm.mu.size()) != g.order() || static_cast<int>(cm.action.size()) != s.order()) {
    r.push_back("mu or action table has the wrong size");
    return r;
  }
  for (int v : cm.mu)
    if (v < 0 || v >= s.order()) {
      r.push_back("mu leaves S");
      return r;
    }
  if (!is_homomorphism(g, s, cm.mu)) r.push_back("mu is not a homomorphism");
  for (int a = 0; a < s.order(); ++a) {
    const GroupMap& act = cm.action[a];
    GroupMap sorted = act;
    std::sort(sorted.begin(), sorted.end());
    GroupMap all(g.order());
    std::iota(all.begin(), all.end(), 0);
    if (sorted != all || !is_homomorphism(g, g, act))
      r.push_back("S element " + s.name(a) + " does not act by an automorphism");
  }
  if (!r.empty()) return r;
  GroupMap identity(g.order());
  std::iota(identity.begin(), identity.end(), 0);
  if (cm.action[s.identity()] != identity) r.push_back("identity of S acts nontrivially");
  for (int a = 0; a < s.order(); ++a)
    for (int b = 0; b < s.order(); ++b)
      if (cm.action[s.mul(a, b)] != compose_maps(cm.action[a], cm.action[b]))
        r.push_back("action is not compatible with multiplication at (" + s.name(a) + "," + s.name(b) + ")");
  for (int a = 0; a < s.order(); ++a)
    for (int x = 0; x < g.order(); ++x)
      if (cm.mu[cm.action[a][x]] != s.conj(a, cm.mu[x]))
        r.push_back("equivariance fails: mu(" + s.name(a) + "." + g.name(x) + ") != " + s.name(a) + " mu(" +
                    g.name(x) + ") " + s.name(a) + "^-1");
  for (int x = 0; x < g.order(); ++x)
    for (int y = 0; y < g.order(); ++y)
      if (cm.action[cm.mu[x]][y] != g.conj(x, y))
        r.push_back("Peiffer identity fails: mu(" + g.name(x) + ")." + g.name(y) + " != " + g.name(x) + " " +
                    g.name(y) + " " + g.name(x) + "^-1");
  return r;
}

CrossedModule inner_crossed_module(const FiniteGroup& gamma) {
  AutomorphismGroup aut = automorphism_group(gamma);
  CrossedModule cm{gamma, aut.group, {}, aut.maps};
  for (int x = 0; x < gamma.order(); ++x) cm.mu.push_back(aut.index_of(inner_automorphism(gamma, x)));
  return cm;
}

std::vector<std::vector<ObjectId>> graph_automorphisms(const ObjectGraph& g) {
  const int n = g.size();
  std::vector<std::vector<ObjectId>> out;
  std::vector<ObjectId> f(n, kNone);
  std::vector<char> used(n, 0);
  std::function<void(ObjectId)> assign = [&](ObjectId x) {
    if (x == n) {
      out.push_back(f);
      return;
    }
    for (ObjectId v = 0; v < n; ++v) {
      if (used[v] || g.neighbors(v).size() != g.neighbors(x).size()) continue;
      bool ok = true;
      for (ObjectId y = 0; y < x && ok; ++y) ok = g.adjacent(x, y) == g.adjacent(v, f[y]);
      if (!ok) continue;
      f[x] = v;
      used[v] = 1;
      assign(x + 1);
      used[v] = 0;
      f[x] = kNone;
    }
  };
  assign(0);
  std::sort(out.begin(), out.end());
  return out;
}

SelfEquivalences selfequivalence_crossed_module(const GroupAction& a) {
  Report r = validate_action(a);
  if (!r.empty()) throw Error("invalid action: " + r.front());
  const FiniteGroup& gamma = a.group;
  SelfEquivalences out;
  auto autos = enumerate_automorphisms(gamma);
  for (const auto& f : graph_automorphisms(a.space))
    for (const auto& psi : autos) {
      EquivariantPair p{f, psi};
      bool ok = true;
      for (int g = 0; g < gamma.order() && ok; ++g)
        for (ObjectId x = 0; x < a.space.size() && ok; ++x) ok = f[a.act(g, x)] == a.act(psi[g], f[x]);
      if (ok) out.elements.push_back(std::move(p));
    }
  // Sorted, so the identity pair comes first.
  std::sort(out.elements.begin(), out.elements.end());
  std::map<EquivariantPair, int> index;
  for (std::size_t i = 0; i < out.elements.size(); ++i) index[out.elements[i]] = static_cast<int>(i);
  const int n = static_cast<int>(out.elements.size());
  std::vector<int> table(n * n);
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) {
    names.push_back("s" + std::to_string(i));
    for (int j = 0; j < n; ++j) {
      EquivariantPair c{compose_maps(out.elements[i].f, out.elements[j].f),
                        compose_maps(out.elements[i].psi, out.elements[j].psi)};
      table[i * n + j] = index.at(c);
    }
  }
  CrossedModule& cm = out.module;
  cm.gamma = gamma;
  cm.s = FiniteGroup(n, std::move(table), std::move(names));
  for (const auto& p : out.elements) cm.action.push_back(p.psi);
  for (int g = 0; g < gamma.order(); ++g) {
    EquivariantPair t;
    for (ObjectId x = 0; x < a.space.size(); ++x) t.f.push_back(a.act(g, x));
    t.psi = inner_automorphism(gamma, g);
    cm.mu.push_back(index.at(t));
  }
  return out;
}

}  // namespace etale
