#include "etale/finite_group.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>

namespace etale {

Report validate_group_table(int order, const std::vector<int>& table) {
  Report report;
  if (order <= 0) {
    report.push_back("group order must be positive");
    return report;
  }
  if (static_cast<int>(table.size()) != order * order) {
    report.push_back("multiplication table has " + std::to_string(table.size()) + " entries, expected " +
                     std::to_string(order * order));
    return report;
  }
  for (int v : table) {
    if (v < 0 || v >= order) {
      report.push_back("table entry " + std::to_string(v) + " out of range");
      return report;
    }
  }
  auto mul = [&](int a, int b) { return table[a * order + b]; };
  int identity = kNone;
  for (int e = 0; e < order && identity == kNone; ++e) {
    bool ok = true;
    for (int a = 0; a < order && ok; ++a) ok = mul(e, a) == a && mul(a, e) == a;
    if (ok) identity = e;
  }
  if (identity == kNone) {
    report.push_back("no identity element");
    return report;
  }
  for (int a = 0; a < order; ++a) {
    bool has_inverse = false;
    for (int b = 0; b < order && !has_inverse; ++b) has_inverse = mul(a, b) == identity && mul(b, a) == identity;
    if (!has_inverse) report.push_back("element " + std::to_string(a) + " has no inverse");
  }
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c)
        if (mul(mul(a, b), c) != mul(a, mul(b, c))) {
          report.push_back("associativity fails at (" + std::to_string(a) + "," + std::to_string(b) + "," +
                           std::to_string(c) + ")");
          return report;
        }
  return report;
}

FiniteGroup::FiniteGroup(int order, std::vector<int> table, std::vector<std::string> names)
    : order_(order), table_(std::move(table)), names_(std::move(names)) {
  Report report = validate_group_table(order_, table_);
  if (!report.empty()) throw Error("invalid group table: " + report.front());
  for (int e = 0; e < order_; ++e) {
    bool ok = true;
    for (int a = 0; a < order_ && ok; ++a) ok = mul(e, a) == a;
    if (ok) {
      identity_ = e;
      break;
    }
  }
  inverse_.assign(order_, 0);
  for (int a = 0; a < order_; ++a)
    for (int b = 0; b < order_; ++b)
      if (mul(a, b) == identity_) inverse_[a] = b;
  if (names_.size() != static_cast<std::size_t>(order_)) {
    names_.clear();
    for (int a = 0; a < order_; ++a) names_.push_back(std::to_string(a));
  }
}

FiniteGroup FiniteGroup::trivial() { return FiniteGroup(1, {0}, {"e"}); }

FiniteGroup FiniteGroup::cyclic(int n) {
  if (n <= 0) throw Error("cyclic group order must be positive");
  std::vector<int> table(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) table[a * n + b] = (a + b) % n;
  return FiniteGroup(n, std::move(table));
}

FiniteGroup FiniteGroup::dihedral(int n) {
  if (n <= 0) throw Error("dihedral parameter must be positive");
  const int order = 2 * n;
  std::vector<int> table(order * order);
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back(k == 0 ? "e" : "r^" + std::to_string(k));
  for (int k = 0; k < n; ++k) names.push_back(k == 0 ? "s" : "s*r^" + std::to_string(k));
  auto mod = [n](int v) { return ((v % n) + n) % n; };
  for (int x = 0; x < order; ++x)
    for (int y = 0; y < order; ++y) {
      bool xs = x >= n, ys = y >= n;
      int a = x % n, b = y % n;
      int out;
      if (!xs && !ys) out = mod(a + b);
      else if (!xs && ys) out = n + mod(b - a);
      else if (xs && !ys) out = n + mod(a + b);
      else out = mod(b - a);
      table[x * order + y] = out;
    }
  return FiniteGroup(order, std::move(table), std::move(names));
}

FiniteGroup FiniteGroup::symmetric(int n) {
  if (n <= 0 || n > 5) throw Error("symmetric group supported for 1 <= n <= 5");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  std::map<std::vector<int>, int> index;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < perms.size(); ++i) {
    index[perms[i]] = static_cast<int>(i);
    std::string s = "[";
    for (int v : perms[i]) s += std::to_string(v);
    names.push_back(s + "]");
  }
  const int order = static_cast<int>(perms.size());
  std::vector<int> table(order * order);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b) {
      std::vector<int> c(n);
      for (int i = 0; i < n; ++i) c[i] = perms[a][perms[b][i]];
      table[a * order + b] = index.at(c);
    }
  return FiniteGroup(order, std::move(table), std::move(names));
}

FiniteGroup FiniteGroup::quaternion() {
  // element = 2 * unit + sign, units 1,i,j,k; sign 1 means negative
  static const int unit_mul[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static const int unit_sign[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  std::vector<int> table(64);
  std::vector<std::string> names;
  const char* unit_names[4] = {"1", "i", "j", "k"};
  for (int x = 0; x < 8; ++x) names.push_back(std::string(x % 2 ? "-" : "") + unit_names[x / 2]);
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      int u = x / 2, v = y / 2;
      int sign = (x % 2) ^ (y % 2) ^ unit_sign[u][v];
      table[x * 8 + y] = 2 * unit_mul[u][v] + sign;
    }
  return FiniteGroup(8, std::move(table), std::move(names));
}

FiniteGroup FiniteGroup::direct_product(const FiniteGroup& a, const FiniteGroup& b) {
  const int nb = b.order(), order = a.order() * nb;
  std::vector<int> table(order * order);
  std::vector<std::string> names;
  for (int x = 0; x < order; ++x) names.push_back("(" + a.name(x / nb) + "," + b.name(x % nb) + ")");
  for (int x = 0; x < order; ++x)
    for (int y = 0; y < order; ++y)
      table[x * order + y] = a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb);
  return FiniteGroup(order, std::move(table), std::move(names));
}

int FiniteGroup::power(int a, int k) const {
  int base = k < 0 ? inv(a) : a;
  int result = identity_;
  for (int i = 0; i < std::abs(k); ++i) result = mul(result, base);
  return result;
}

int FiniteGroup::element_order(int a) const {
  int k = 1;
  for (int x = a; x != identity_; x = mul(x, a)) ++k;
  return k;
}

bool FiniteGroup::is_abelian() const {
  for (int a = 0; a < order_; ++a)
    for (int b = a + 1; b < order_; ++b)
      if (mul(a, b) != mul(b, a)) return false;
  return true;
}

std::vector<int> FiniteGroup::center() const {
  std::vector<int> out;
  for (int a = 0; a < order_; ++a) {
    bool central = true;
    for (int b = 0; b < order_ && central; ++b) central = mul(a, b) == mul(b, a);
    if (central) out.push_back(a);
  }
  return out;
}

std::vector<int> FiniteGroup::generators() const {
  std::vector<int> gens;
  std::vector<char> in_sub(order_, 0);
  in_sub[identity_] = 1;
  auto close = [&]() {
    std::vector<int> elems;
    for (int a = 0; a < order_; ++a)
      if (in_sub[a]) elems.push_back(a);
    for (std::size_t i = 0; i < elems.size(); ++i)
      for (int g : gens) {
        int c = mul(elems[i], g);
        if (!in_sub[c]) {
          in_sub[c] = 1;
          elems.push_back(c);
        }
      }
  };
  for (int a = 0; a < order_; ++a)
    if (!in_sub[a]) {
      gens.push_back(a);
      close();
    }
  return gens;
}

bool is_homomorphism(const FiniteGroup& from, const FiniteGroup& to, const GroupMap& f) {
  if (static_cast<int>(f.size()) != from.order()) return false;
  for (int v : f)
    if (v < 0 || v >= to.order()) return false;
  for (int a = 0; a < from.order(); ++a)
    for (int b = 0; b < from.order(); ++b)
      if (f[from.mul(a, b)] != to.mul(f[a], f[b])) return false;
  return true;
}

namespace {

// Extends generator images to a full map; empty result if inconsistent.
GroupMap extend_from_generators(const FiniteGroup& from, const FiniteGroup& to, const std::vector<int>& gens,
                                const std::vector<int>& images) {
  GroupMap f(from.order(), kNone);
  f[from.identity()] = to.identity();
  std::vector<int> frontier{from.identity()};
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    int x = frontier[i];
    for (std::size_t k = 0; k < gens.size(); ++k) {
      int y = from.mul(x, gens[k]);
      int fy = to.mul(f[x], images[k]);
      if (f[y] == kNone) {
        f[y] = fy;
        frontier.push_back(y);
      } else if (f[y] != fy) {
        return {};
      }
    }
  }
  return f;
}

}  // namespace

std::vector<GroupMap> enumerate_homomorphisms(const FiniteGroup& from, const FiniteGroup& to) {
  std::vector<GroupMap> out;
  const std::vector<int> gens = from.generators();
  std::vector<int> images(gens.size(), 0);
  // Generator images must have order dividing the generator's order.
  std::vector<std::vector<int>> candidates(gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    int n = from.element_order(gens[k]);
    for (int y = 0; y < to.order(); ++y)
      if (n % to.element_order(y) == 0) candidates[k].push_back(y);
  }
  std::function<void(std::size_t)> assign = [&](std::size_t k) {
    if (k == gens.size()) {
      GroupMap f = extend_from_generators(from, to, gens, images);
      if (!f.empty() && is_homomorphism(from, to, f)) out.push_back(std::move(f));
      return;
    }
    for (int y : candidates[k]) {
      images[k] = y;
      assign(k + 1);
    }
  };
  assign(0);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GroupMap> enumerate_automorphisms(const FiniteGroup& g) {
  std::vector<GroupMap> out;
  for (GroupMap& f : enumerate_homomorphisms(g, g)) {
    std::vector<int> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) out.push_back(std::move(f));
  }
  // identity map is the lexicographic minimum only when it appears first; force it to the front
  GroupMap id(g.order());
  std::iota(id.begin(), id.end(), 0);
  auto it = std::find(out.begin(), out.end(), id);
  std::rotate(out.begin(), it, it + 1);
  return out;
}

GroupMap compose_maps(const GroupMap& outer, const GroupMap& inner) {
  GroupMap out(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) out[i] = outer[inner[i]];
  return out;
}

GroupMap inverse_map(const GroupMap& bijection) {
  GroupMap out(bijection.size());
  for (std::size_t i = 0; i < bijection.size(); ++i) out[bijection[i]] = static_cast<int>(i);
  return out;
}

GroupMap inner_automorphism(const FiniteGroup& g, int element) {
  GroupMap out(g.order());
  for (int x = 0; x < g.order(); ++x) out[x] = g.conj(element, x);
  return out;
}

int AutomorphismGroup::index_of(const GroupMap& m) const {
  auto it = std::find(maps.begin(), maps.end(), m);
  if (it == maps.end()) throw Error("map is not an automorphism of the group");
  return static_cast<int>(it - maps.begin());
}

AutomorphismGroup automorphism_group(const FiniteGroup& g) {
  AutomorphismGroup out;
  out.maps = enumerate_automorphisms(g);
  const int n = static_cast<int>(out.maps.size());
  std::map<GroupMap, int> index;
  for (int i = 0; i < n; ++i) index[out.maps[i]] = i;
  std::vector<int> table(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) table[a * n + b] = index.at(compose_maps(out.maps[a], out.maps[b]));
  out.group = FiniteGroup(n, std::move(table));
  return out;
}

OuterAutomorphismGroup outer_automorphism_group(const FiniteGroup& n) {
  OuterAutomorphismGroup out;
  out.aut = automorphism_group(n);
  const int na = out.aut.group.order();
  std::vector<int> inner;
  for (int x = 0; x < n.order(); ++x) inner.push_back(out.aut.index_of(inner_automorphism(n, x)));
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  out.coset_of.assign(na, kNone);
  for (int a = 0; a < na; ++a) {
    if (out.coset_of[a] != kNone) continue;
    const int id = static_cast<int>(out.coset_members.size());
    out.coset_members.emplace_back();
    for (int i : inner) {
      int m = out.aut.group.mul(a, i);
      out.coset_of[m] = id;
      out.coset_members.back().push_back(m);
    }
    std::sort(out.coset_members.back().begin(), out.coset_members.back().end());
  }
  const int no = static_cast<int>(out.coset_members.size());
  std::vector<int> table(no * no);
  for (int x = 0; x < no; ++x)
    for (int y = 0; y < no; ++y)
      table[x * no + y] = out.coset_of[out.aut.group.mul(out.coset_members[x][0], out.coset_members[y][0])];
  out.group = FiniteGroup(no, std::move(table));
  return out;
}

GroupMap find_group_isomorphism(const FiniteGroup& a, const FiniteGroup& b) {
  if (a.order() != b.order()) return {};
  for (GroupMap& f : enumerate_homomorphisms(a, b)) {
    std::vector<int> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) return f;
  }
  return {};
}

}  // namespace etale
