#pragma once

#include <string>
#include <vector>

#include "etale/groupoid.hpp"

namespace etale {

// A psi-equivariant continuous map f: X -> X'.
struct EquivariantPair {
  std::vector<ObjectId> f;
  GroupMap psi;
  friend bool operator==(const EquivariantPair&, const EquivariantPair&) = default;
  friend auto operator<=>(const EquivariantPair&, const EquivariantPair&) = default;
};

struct PairCheck {
  bool ok = false;
  std::string violation;  // empty when ok
};
PairCheck check_equivariant_pair(const EquivariantPair& pair, const GroupAction& source, const GroupAction& target);

// All pairs, sorted. Throws unless the source space is a tree.
std::vector<EquivariantPair> enumerate_equivariant_pairs(const GroupAction& source, const GroupAction& target);

// gamma'.(f, psi) = (t_gamma' o f, Ad(gamma') o psi)
EquivariantPair act_on_pair(const GroupAction& target, int gamma, const EquivariantPair& pair);

// The homomorphism (gamma, x) -> (psi(gamma), f(x)) between action groupoids.
GroupoidHom pair_to_hom(const EquivariantPair& pair, const GroupAction& source, const GroupAction& target,
                        const GroupoidPtr& source_groupoid, const GroupoidPtr& target_groupoid);

// mu: Gamma -> S with S acting on Gamma by automorphisms; action[s] is the automorphism for s.
struct CrossedModule {
  FiniteGroup gamma;
  FiniteGroup s;
  GroupMap mu;
  std::vector<GroupMap> action;
};
// Homomorphism, action by automorphisms, equivariance and the Peiffer identity.
Report validate_crossed_module(const CrossedModule& cm);

// Aut(Gamma) with mu = Ad.
CrossedModule inner_crossed_module(const FiniteGroup& gamma);

struct SelfEquivalences {
  CrossedModule module;
  std::vector<EquivariantPair> elements;  // element i of module.s; f is a graph automorphism, psi in Aut
};
SelfEquivalences selfequivalence_crossed_module(const GroupAction& a);

// Edge-preserving permutations of a graph, identity first.
std::vector<std::vector<ObjectId>> graph_automorphisms(const ObjectGraph& g);

}  // namespace etale
