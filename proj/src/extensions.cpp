#include "etale/extensions.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace etale {

Report validate_module(const QModule& m) {
  Report r;
  if (!m.c.is_abelian()) r.push_back("coefficient group is not abelian");
  if (m.action.empty()) return r;
  if (static_cast<int>(m.action.size()) != m.q.order()) {
    r.push_back("action table has the wrong size");
    return r;
  }
  for (int qe = 0; qe < m.q.order(); ++qe) {
    GroupMap sorted = m.action[qe];
    std::sort(sorted.begin(), sorted.end());
    GroupMap all(m.c.order());
    std::iota(all.begin(), all.end(), 0);
    if (sorted != all || !is_homomorphism(m.c, m.c, m.action[qe]))
      r.push_back("element " + m.q.name(qe) + " does not act by an automorphism");
  }
  if (!r.empty()) return r;
  for (int a = 0; a < m.q.order(); ++a)
    for (int b = 0; b < m.q.order(); ++b)
      if (m.action[m.q.mul(a, b)] != compose_maps(m.action[a], m.action[b]))
        r.push_back("action is not a homomorphism at (" + m.q.name(a) + "," + m.q.name(b) + ")");
  for (int ce = 0; ce < m.c.order(); ++ce)
    if (m.action[m.q.identity()][ce] != ce) r.push_back("identity acts nontrivially");
  return r;
}

Cochain coboundary1(const QModule& m, const Cochain& a) {
  const int nq = m.q.order();
  const FiniteGroup& c = m.c;
  Cochain out(nq * nq);
  for (int q1 = 0; q1 < nq; ++q1)
    for (int q2 = 0; q2 < nq; ++q2)
      out[q1 * nq + q2] = c.mul(c.mul(m.act(q1, a[q2]), c.inv(a[m.q.mul(q1, q2)])), a[q1]);
  return out;
}

Cochain coboundary2(const QModule& m, const Cochain& b) {
  const int nq = m.q.order();
  const FiniteGroup& c = m.c;
  Cochain out(nq * nq * nq);
  for (int q1 = 0; q1 < nq; ++q1)
    for (int q2 = 0; q2 < nq; ++q2)
      for (int q3 = 0; q3 < nq; ++q3) {
        int v = m.act(q1, b[q2 * nq + q3]);
        v = c.mul(v, c.inv(b[m.q.mul(q1, q2) * nq + q3]));
        v = c.mul(v, b[q1 * nq + m.q.mul(q2, q3)]);
        v = c.mul(v, c.inv(b[q1 * nq + q2]));
        out[(q1 * nq + q2) * nq + q3] = v;
      }
  return out;
}

bool is_normalized_cocycle(const QModule& m, const Cochain& f) {
  const int nq = m.q.order();
  if (static_cast<int>(f.size()) != nq * nq) return false;
  const int e = m.q.identity(), zero = m.c.identity();
  for (int q = 0; q < nq; ++q)
    if (f[e * nq + q] != zero || f[q * nq + e] != zero) return false;
  Cochain d = coboundary2(m, f);
  return std::all_of(d.begin(), d.end(), [&](int v) { return v == zero; });
}

namespace {

// One term of (delta b)(q1,q2,q3): the variable, whether it is acted on by q1, and its sign.
struct Term {
  int var;
  int acted_by;  // q1 or -1
  bool negative;
};
struct Constraint {
  std::vector<Term> terms;
  int target;
};

}  // namespace

void solve_coboundary_equation(const QModule& m, const Cochain& target,
                               const std::function<bool(const Cochain&)>& visit, std::size_t max_nodes) {
  const int nq = m.q.order();
  const FiniteGroup& c = m.c;
  const int e = m.q.identity(), zero = c.identity();
  if (static_cast<int>(target.size()) != nq * nq * nq) throw Error("target 3-cochain has the wrong size");
  std::vector<int> var_of(nq * nq, -1), cell_of;
  for (int q1 = 0; q1 < nq; ++q1)
    for (int q2 = 0; q2 < nq; ++q2)
      if (q1 != e && q2 != e) {
        var_of[q1 * nq + q2] = static_cast<int>(cell_of.size());
        cell_of.push_back(q1 * nq + q2);
      }
  const int nv = static_cast<int>(cell_of.size());
  std::vector<std::vector<Constraint>> bucket(nv);
  std::vector<Constraint> constant;
  for (int q1 = 0; q1 < nq; ++q1)
    for (int q2 = 0; q2 < nq; ++q2)
      for (int q3 = 0; q3 < nq; ++q3) {
        Constraint k{{}, target[(q1 * nq + q2) * nq + q3]};
        auto add = [&](int cell, int acted, bool negative) {
          if (var_of[cell] >= 0) k.terms.push_back({var_of[cell], acted, negative});
        };
        add(q2 * nq + q3, q1, false);
        add(m.q.mul(q1, q2) * nq + q3, -1, true);
        add(q1 * nq + m.q.mul(q2, q3), -1, false);
        add(q1 * nq + q2, -1, true);
        int top = -1;
        for (const Term& t : k.terms) top = std::max(top, t.var);
        (top < 0 ? constant : bucket[top]).push_back(std::move(k));
      }
  for (const Constraint& k : constant)
    if (k.target != zero) return;  // delta of normalized cochains vanishes there

  std::vector<int> value(nv, -1);
  auto term_value = [&](const Term& t, int v) {
    if (t.acted_by >= 0) v = m.act(t.acted_by, v);
    return t.negative ? c.inv(v) : v;
  };
  auto evaluate = [&](const Constraint& k) {
    int v = zero;
    for (const Term& t : k.terms) v = c.mul(v, term_value(t, value[t.var]));
    return v;
  };
  std::size_t nodes = 0;
  bool stop = false;
  std::function<void(int)> assign = [&](int var) {
    if (stop) return;
    if (++nodes > max_nodes) throw ResourceLimit("cochain search exceeded its node cap");
    if (var == nv) {
      Cochain b(nq * nq, zero);
      for (int i = 0; i < nv; ++i) b[cell_of[i]] = value[i];
      if (!visit(b)) stop = true;
      return;
    }
    // A constraint in which `var` occurs once forces its value.
    int forced = -1;
    for (const Constraint& k : bucket[var]) {
      int occurrences = 0;
      const Term* mine = nullptr;
      int rest = zero;
      for (const Term& t : k.terms) {
        if (t.var == var) {
          ++occurrences;
          mine = &t;
        } else {
          rest = c.mul(rest, term_value(t, value[t.var]));
        }
      }
      if (occurrences != 1) continue;
      int need = c.mul(k.target, c.inv(rest));
      if (mine->negative) need = c.inv(need);
      if (mine->acted_by >= 0) need = m.act(m.q.inv(mine->acted_by), need);
      forced = need;
      break;
    }
    for (int v = 0; v < c.order() && !stop; ++v) {
      if (forced >= 0 && v != forced) continue;
      value[var] = v;
      bool ok = true;
      for (const Constraint& k : bucket[var])
        if (evaluate(k) != k.target) {
          ok = false;
          break;
        }
      if (ok) assign(var + 1);
    }
    value[var] = -1;
  };
  assign(0);
}

FiniteGroup realize_extension(const QModule& m, const Cochain& f) {
  const int nq = m.q.order(), nc = m.c.order(), n = nq * nc;
  std::vector<int> table(n * n);
  std::vector<std::string> names;
  for (int q1 = 0; q1 < nq; ++q1)
    for (int c1 = 0; c1 < nc; ++c1) {
      names.push_back("(" + m.c.name(c1) + "," + m.q.name(q1) + ")");
      for (int q2 = 0; q2 < nq; ++q2)
        for (int c2 = 0; c2 < nc; ++c2) {
          int cc = m.c.mul(m.c.mul(c1, m.act(q1, c2)), f[q1 * nq + q2]);
          table[(q1 * nc + c1) * n + q2 * nc + c2] = m.q.mul(q1, q2) * nc + cc;
        }
    }
  return FiniteGroup(n, std::move(table), std::move(names));
}

ExtensionClassification classify_extensions(const QModule& m, std::size_t max_nodes) {
  Report r = validate_module(m);
  if (!r.empty()) throw Error("invalid coefficient module: " + r.front());
  const int nq = m.q.order(), nc = m.c.order();
  const int e = m.q.identity(), zero = m.c.identity();
  ExtensionClassification out;
  std::vector<Cochain> cocycles;
  solve_coboundary_equation(
      m, Cochain(nq * nq * nq, zero),
      [&](const Cochain& f) {
        cocycles.push_back(f);
        return true;
      },
      max_nodes);
  out.cocycles = cocycles.size();

  std::set<Cochain> boundaries;
  Cochain a(nq, zero);
  std::vector<int> free;
  for (int q = 0; q < nq; ++q)
    if (q != e) free.push_back(q);
  std::function<void(std::size_t)> spread = [&](std::size_t i) {
    if (i == free.size()) {
      boundaries.insert(coboundary1(m, a));
      return;
    }
    for (int v = 0; v < nc; ++v) {
      a[free[i]] = v;
      spread(i + 1);
    }
    a[free[i]] = zero;
  };
  spread(0);
  out.coboundaries = boundaries.size();

  std::set<Cochain> representatives;
  for (const Cochain& f : cocycles) {
    Cochain best;
    for (const Cochain& b : boundaries) {
      Cochain g(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) g[i] = m.c.mul(f[i], b[i]);
      if (best.empty() || g < best) best = std::move(g);
    }
    representatives.insert(best);
  }
  for (const Cochain& f : representatives) out.classes.push_back({f, realize_extension(m, f)});
  return out;
}

Obstruction extension_obstruction(const FiniteGroup& q, const FiniteGroup& n, const GroupMap& psi,
                                  std::size_t max_nodes) {
  OuterAutomorphismGroup out_n = outer_automorphism_group(n);
  if (!is_homomorphism(q, out_n.group, psi)) throw Error("psi is not a homomorphism into Out(N)");
  const int nq = q.order(), e = q.identity();
  const auto& maps = out_n.aut.maps;
  Obstruction ob;
  GroupMap identity(n.order());
  std::iota(identity.begin(), identity.end(), 0);
  for (int qe = 0; qe < nq; ++qe)
    ob.lifts.push_back(qe == e ? out_n.aut.index_of(identity) : out_n.coset_members[psi[qe]].front());

  std::vector<GroupMap> inner;
  for (int x = 0; x < n.order(); ++x) inner.push_back(inner_automorphism(n, x));
  ob.factor.assign(nq * nq, n.identity());
  for (int q1 = 0; q1 < nq; ++q1)
    for (int q2 = 0; q2 < nq; ++q2) {
      if (q1 == e || q2 == e) continue;
      GroupMap defect = compose_maps(compose_maps(maps[ob.lifts[q1]], maps[ob.lifts[q2]]),
                                     inverse_map(maps[ob.lifts[q.mul(q1, q2)]]));
      auto it = std::find(inner.begin(), inner.end(), defect);
      if (it == inner.end()) throw Error("internal: lifts do not compose up to inner automorphisms");
      ob.factor[q1 * nq + q2] = static_cast<int>(it - inner.begin());
    }

  ob.center = n.center();
  const int nz = static_cast<int>(ob.center.size());
  std::vector<int> center_index(n.order(), -1);
  for (int i = 0; i < nz; ++i) center_index[ob.center[i]] = i;
  std::vector<int> ztable(nz * nz);
  std::vector<std::string> znames;
  for (int i = 0; i < nz; ++i) {
    znames.push_back(n.name(ob.center[i]));
    for (int j = 0; j < nz; ++j) ztable[i * nz + j] = center_index[n.mul(ob.center[i], ob.center[j])];
  }
  QModule module{q, FiniteGroup(nz, std::move(ztable), std::move(znames)), {}};
  for (int qe = 0; qe < nq; ++qe) {
    GroupMap a(nz);
    for (int i = 0; i < nz; ++i) a[i] = center_index[maps[ob.lifts[qe]][ob.center[i]]];
    module.action.push_back(std::move(a));
  }

  const auto& f = ob.factor;
  ob.cocycle.assign(nq * nq * nq, 0);
  for (int q1 = 0; q1 < nq; ++q1)
    for (int q2 = 0; q2 < nq; ++q2)
      for (int q3 = 0; q3 < nq; ++q3) {
        int lhs = n.mul(maps[ob.lifts[q1]][f[q2 * nq + q3]], f[q1 * nq + q.mul(q2, q3)]);
        int rhs = n.mul(f[q1 * nq + q2], f[q.mul(q1, q2) * nq + q3]);
        int o = center_index[n.mul(lhs, n.inv(rhs))];
        if (o < 0) throw Error("internal: associativity defect is not central");
        ob.cocycle[(q1 * nq + q2) * nq + q3] = o;
      }
  solve_coboundary_equation(
      module, ob.cocycle,
      [&](const Cochain& b) {
        ob.correction = b;
        return false;
      },
      max_nodes);
  ob.vanishes = ob.correction.has_value();
  return ob;
}

GroupoidHom extension_projection(const FiniteGroup& ext, const FiniteGroup& q, int kernel_order) {
  GroupoidHom h{group_as_groupoid(ext), group_as_groupoid(q), {0}, {}};
  for (int x = 0; x < ext.order(); ++x) h.arrow_map.push_back(x / kernel_order);
  return h;
}

bool check_split_section(const GroupoidHom& phi, const FiniteGroup& gamma) {
  Report r = check_hom(phi);
  if (!r.empty()) throw Error("extension map is not a homomorphism: " + r.front());
  const FiniteGroupoid& s = *phi.source;
  const FiniteGroupoid& t = *phi.target;
  if (s.num_objects() != t.num_objects()) throw Error("extension map is not bijective on objects");
  std::vector<ObjectId> preimage_obj(t.num_objects(), kNone);
  for (ObjectId x = 0; x < s.num_objects(); ++x) {
    if (preimage_obj[phi.obj_map[x]] != kNone) throw Error("extension map is not bijective on objects");
    preimage_obj[phi.obj_map[x]] = x;
  }
  std::vector<std::vector<ArrowId>> preimages(t.num_arrows());
  for (ArrowId a = 0; a < s.num_arrows(); ++a) preimages[phi.arrow_map[a]].push_back(a);
  for (ArrowId b = 0; b < t.num_arrows(); ++b)
    if (preimages[b].empty()) throw Error("extension map is not surjective on arrows");
  for (ObjectId x = 0; x < s.num_objects(); ++x) {
    IsotropyGroup iso = isotropy(s, x);
    std::vector<int> kernel;
    for (std::size_t i = 0; i < iso.arrows.size(); ++i)
      if (phi.arrow_map[iso.arrows[i]] == t.unit[phi.obj_map[x]]) kernel.push_back(static_cast<int>(i));
    const int k = static_cast<int>(kernel.size());
    std::vector<int> table(k * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        int prod = iso.group.mul(kernel[i], kernel[j]);
        table[i * k + j] = static_cast<int>(std::find(kernel.begin(), kernel.end(), prod) - kernel.begin());
      }
    if (k != gamma.order() || find_group_isomorphism(FiniteGroup(k, std::move(table)), gamma).empty())
      throw Error("kernel at " + s.base.name(x) + " is not isomorphic to the given group");
  }

  std::vector<ArrowId> sigma(t.num_arrows(), kNone);
  std::function<bool(ArrowId)> choose = [&](ArrowId b) -> bool {
    if (b == t.num_arrows()) return true;
    std::vector<ArrowId> candidates = preimages[b];
    for (ObjectId y = 0; y < t.num_objects(); ++y)
      if (t.unit[y] == b) candidates = {s.unit[preimage_obj[y]]};
    for (ArrowId a : candidates) {
      bool ok = true;
      if (b < static_cast<int>(t.sheets.size()))
        for (auto [y, b2] : t.sheets[b]) {
          if (sigma[b2] == kNone) continue;
          ArrowId cont = s.continuation(a, preimage_obj[y]);
          if (cont != kNone && cont != sigma[b2]) ok = false;
        }
      if (!ok) continue;
      sigma[b] = a;
      if (choose(b + 1)) return true;
      sigma[b] = kNone;
    }
    return false;
  };
  return choose(0);
}

}  // namespace etale
