#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "etale/groupoid.hpp"

namespace etale {

// An abelian group C with Q acting by automorphisms; action[q] is the automorphism of q.
struct QModule {
  FiniteGroup q;
  FiniteGroup c;
  std::vector<GroupMap> action;  // empty means trivial

  int act(int qe, int ce) const { return action.empty() ? ce : action[qe][ce]; }
};
Report validate_module(const QModule& m);

// Normalized cochains are stored densely: c(q1, q2) = values[q1 * |Q| + q2], and so on.
using Cochain = std::vector<int>;

Cochain coboundary1(const QModule& m, const Cochain& a);  // (delta a)(q1,q2)
Cochain coboundary2(const QModule& m, const Cochain& b);  // (delta b)(q1,q2,q3)
bool is_normalized_cocycle(const QModule& m, const Cochain& f);

// Solves delta b = target for a normalized 2-cochain b; `visit` sees every solution and returns
// false to stop. Throws ResourceLimit once `max_nodes` search nodes have been explored.
void solve_coboundary_equation(const QModule& m, const Cochain& target,
                               const std::function<bool(const Cochain&)>& visit,
                               std::size_t max_nodes = 50'000'000);

struct ExtensionClass {
  Cochain representative;  // lexicographically least factor set in the class
  FiniteGroup group;       // element (c, q) has index q * |C| + c
};
struct ExtensionClassification {
  std::vector<ExtensionClass> classes;
  std::size_t cocycles = 0;
  std::size_t coboundaries = 0;
};
ExtensionClassification classify_extensions(const QModule& m, std::size_t max_nodes = 50'000'000);

// (c1,q1)(c2,q2) = (c1 + q1.c2 + f(q1,q2), q1 q2)
FiniteGroup realize_extension(const QModule& m, const Cochain& f);

struct Obstruction {
  bool vanishes = false;
  std::vector<int> lifts;          // Aut(N) index per q
  Cochain factor;                  // f(q1,q2) in N
  Cochain cocycle;                 // o(q1,q2,q3) in Z(N)
  std::vector<int> center;         // Z(N) as element ids of N; cocycle values index into it
  std::optional<Cochain> correction;  // b with delta b = o when it vanishes
};
// psi maps Q into Out(N) (element ids of outer_automorphism_group(N).group).
Obstruction extension_obstruction(const FiniteGroup& q, const FiniteGroup& n, const GroupMap& psi,
                                  std::size_t max_nodes = 50'000'000);

// Projection of a realized extension onto Q, as one-object groupoids.
GroupoidHom extension_projection(const FiniteGroup& ext, const FiniteGroup& q, int kernel_order);

// Whether a surjective hom with kernel Gamma at every object admits a unit-preserving
// section, continuous along sheets. Throws when the kernel is not of that form.
bool check_split_section(const GroupoidHom& phi, const FiniteGroup& gamma);

}  // namespace etale
