#pragma once

#include <string>
#include <vector>

#include "etale/types.hpp"

namespace etale {

// A finite group given by its multiplication table. Elements are 0..order-1.
class FiniteGroup {
 public:
  FiniteGroup() = default;
  // table[a * n + b] = a*b. Throws if the table is not a group.
  FiniteGroup(int order, std::vector<int> table, std::vector<std::string> names = {});

  static FiniteGroup trivial();
  static FiniteGroup cyclic(int n);
  static FiniteGroup dihedral(int n);  // order 2n: rotations r^k then reflections s r^k
  static FiniteGroup symmetric(int n);
  static FiniteGroup quaternion();  // Q8
  static FiniteGroup direct_product(const FiniteGroup& a, const FiniteGroup& b);

  int order() const { return order_; }
  int identity() const { return identity_; }
  int mul(int a, int b) const { return table_[a * order_ + b]; }
  int inv(int a) const { return inverse_[a]; }
  int conj(int g, int x) const { return mul(mul(g, x), inv(g)); }  // g x g^-1
  int power(int a, int k) const;
  int element_order(int a) const;
  const std::string& name(int a) const { return names_[a]; }
  const std::vector<int>& table() const { return table_; }

  bool is_abelian() const;
  std::vector<int> center() const;
  // Small generating set, greedy by element id.
  std::vector<int> generators() const;

  friend bool operator==(const FiniteGroup& a, const FiniteGroup& b) { return a.table_ == b.table_; }

 private:
  int order_ = 0;
  int identity_ = 0;
  std::vector<int> table_;
  std::vector<int> inverse_;
  std::vector<std::string> names_;
};

// Checks closure, identity, inverses and associativity of a raw table.
Report validate_group_table(int order, const std::vector<int>& table);

// A map between groups stored as an image table.
using GroupMap = std::vector<int>;

bool is_homomorphism(const FiniteGroup& from, const FiniteGroup& to, const GroupMap& f);

// All homomorphisms from -> to, in lexicographic order of image tables on generators.
std::vector<GroupMap> enumerate_homomorphisms(const FiniteGroup& from, const FiniteGroup& to);

// All automorphisms of g; index 0 is the identity.
std::vector<GroupMap> enumerate_automorphisms(const FiniteGroup& g);

GroupMap compose_maps(const GroupMap& outer, const GroupMap& inner);
GroupMap inverse_map(const GroupMap& bijection);
GroupMap inner_automorphism(const FiniteGroup& g, int element);

// Aut(g) as a group together with the automorphism each element represents.
struct AutomorphismGroup {
  FiniteGroup group;
  std::vector<GroupMap> maps;
  int index_of(const GroupMap& m) const;
};
AutomorphismGroup automorphism_group(const FiniteGroup& g);

// Out(N) = Aut(N)/Inn(N) with the quotient map from Aut(N).
struct OuterAutomorphismGroup {
  AutomorphismGroup aut;
  FiniteGroup group;
  std::vector<int> coset_of;                 // aut index -> Out element
  std::vector<std::vector<int>> coset_members;  // Out element -> aut indices
};
OuterAutomorphismGroup outer_automorphism_group(const FiniteGroup& n);

// Exhaustive isomorphism search; returns an isomorphism or an empty map.
GroupMap find_group_isomorphism(const FiniteGroup& a, const FiniteGroup& b);

}  // namespace etale
