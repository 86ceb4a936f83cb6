#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "etale/finite_group.hpp"
#include "etale/types.hpp"

namespace etale {

// Finite stand-in for the space of objects: adjacency models the topology.
class ObjectGraph {
 public:
  ObjectGraph() = default;
  // Throws on unknown endpoints, self-loops or duplicate names.
  ObjectGraph(std::vector<std::string> names, std::vector<std::pair<ObjectId, ObjectId>> edges);

  static ObjectGraph discrete(int n);
  static ObjectGraph path(std::vector<std::string> names);
  static ObjectGraph cycle(int n);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(ObjectId x) const { return names_.at(x); }
  const std::vector<std::string>& names() const { return names_; }
  ObjectId find(const std::string& name) const;  // kNone when absent
  const std::vector<std::pair<ObjectId, ObjectId>>& edges() const { return edges_; }
  const std::vector<ObjectId>& neighbors(ObjectId x) const { return adjacency_.at(x); }
  bool adjacent(ObjectId x, ObjectId y) const;
  bool adjacent_or_equal(ObjectId x, ObjectId y) const { return x == y || adjacent(x, y); }

  // Graph-connected components of `subset` (all objects when empty).
  std::vector<std::vector<ObjectId>> components(const std::vector<ObjectId>& subset = {}) const;
  bool is_connected_subset(const std::vector<ObjectId>& subset) const;
  bool is_tree() const;

  friend bool operator==(const ObjectGraph& a, const ObjectGraph& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::pair<ObjectId, ObjectId>> edges_;  // normalized (min, max), sorted
  std::vector<std::vector<ObjectId>> adjacency_;
};

// Continuation of an arrow (or bundle element) along the edges at its source:
// entry (y, a) means the sheet through the item passes over y at a.
using Sheets = std::vector<std::vector<std::pair<ObjectId, int>>>;

// A finite groupoid over an object graph, stored extensionally.
// compose(g, h) = g∘h is defined exactly when src(g) == tgt(h).
struct FiniteGroupoid {
  ObjectGraph base;
  std::vector<std::string> arrow_names;
  std::vector<ObjectId> src;
  std::vector<ObjectId> tgt;
  std::vector<ArrowId> unit;  // indexed by object
  std::vector<ArrowId> inv;
  std::unordered_map<std::uint64_t, ArrowId> comp;
  Sheets sheets;  // indexed by arrow; may be partial

  int num_objects() const { return base.size(); }
  int num_arrows() const { return static_cast<int>(src.size()); }

  static std::uint64_t key(ArrowId g, ArrowId h) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(g)) << 32) | static_cast<std::uint32_t>(h);
  }
  ArrowId compose(ArrowId g, ArrowId h) const;
  void set_compose(ArrowId g, ArrowId h, ArrowId gh) { comp[key(g, h)] = gh; }

  // Arrow on the sheet through g over the neighbor y of src(g); kNone if undefined.
  ArrowId continuation(ArrowId g, ObjectId y) const;
  // As continuation, but returns g itself when y == src(g).
  ArrowId continuation_or_self(ArrowId g, ObjectId y) const {
    return y == src[g] ? g : continuation(g, y);
  }

  std::vector<ArrowId> arrows_between(ObjectId from, ObjectId to) const;
  std::vector<ArrowId> arrows_from(ObjectId x) const;
  std::string describe_arrow(ArrowId g) const;

  // Composition table as a sorted list of (g, h, g∘h), for deterministic output.
  std::vector<std::tuple<ArrowId, ArrowId, ArrowId>> composition_list() const;
};

using GroupoidPtr = std::shared_ptr<const FiniteGroupoid>;

bool structurally_equal(const FiniteGroupoid& a, const FiniteGroupoid& b);

// Adds unit continuations (1_x -> 1_y for each edge) where missing.
void add_unit_sheets(FiniteGroupoid& g);

Report validate_groupoid(const FiniteGroupoid& g);

// Orbit blocks sorted by minimum object id; each block sorted.
std::vector<std::vector<ObjectId>> orbits(const FiniteGroupoid& g);

// Connected in the sense of the orbit space: graph edges together with arrows.
bool is_connected(const FiniteGroupoid& g);

struct IsotropyGroup {
  ObjectId object = kNone;
  std::vector<ArrowId> arrows;  // element i of `group` is arrows[i]
  FiniteGroup group;
  int index_of(ArrowId g) const;
};
IsotropyGroup isotropy(const FiniteGroupoid& g, ObjectId x);

// A finite group acting on an object graph; table[g * n + x] = g·x.
struct GroupAction {
  FiniteGroup group;
  ObjectGraph space;
  std::vector<ObjectId> table;

  ObjectId act(int g, ObjectId x) const { return table[g * space.size() + x]; }
  static GroupAction trivial_on(ObjectGraph space);
};
Report validate_action(const GroupAction& a);

// Γ⋉X; arrow (γ, x) has id γ * |X| + x, source x and target γ·x.
GroupoidPtr action_groupoid(const GroupAction& a);
inline ArrowId action_arrow(const GroupAction& a, int gamma, ObjectId x) { return gamma * a.space.size() + x; }

GroupoidPtr point_groupoid();
GroupoidPtr trivial_groupoid(const ObjectGraph& base);
GroupoidPtr group_as_groupoid(const FiniteGroup& g);
GroupoidPtr product_groupoid(const FiniteGroupoid& h, const FiniteGroupoid& g);
inline ObjectId product_object(const FiniteGroupoid& g, ObjectId v, ObjectId x) { return v * g.num_objects() + x; }
inline ArrowId product_arrow(const FiniteGroupoid& g, ArrowId a, ArrowId b) { return a * g.num_arrows() + b; }

// Homomorphism (continuous functor) between finite groupoids.
struct GroupoidHom {
  GroupoidPtr source;
  GroupoidPtr target;
  std::vector<ObjectId> obj_map;
  std::vector<ArrowId> arrow_map;

  friend bool operator==(const GroupoidHom& a, const GroupoidHom& b) {
    return a.obj_map == b.obj_map && a.arrow_map == b.arrow_map;
  }
};

// Functoriality, then continuity along sheets.
Report check_hom(const GroupoidHom& phi);
GroupoidHom identity_hom(const GroupoidPtr& g);
GroupoidHom compose_homs(const GroupoidHom& outer, const GroupoidHom& inner);

struct EquivalenceVerdict {
  bool equivalence = false;
  std::string witness;  // first failure, or a short confirmation
};
EquivalenceVerdict is_equivalence_hom(const GroupoidHom& phi);

struct NaturalTransformation {
  std::vector<ArrowId> component;  // object of source -> arrow of target
};
bool is_natural_transformation(const GroupoidHom& phi, const GroupoidHom& phi2, const NaturalTransformation& h);
std::optional<NaturalTransformation> find_natural_transformation(const GroupoidHom& phi, const GroupoidHom& phi2);

struct Restriction {
  GroupoidPtr groupoid;
  GroupoidHom inclusion;
};
Restriction restrict_groupoid(const GroupoidPtr& g, std::vector<ObjectId> subset);

struct OpenCover {
  std::vector<std::vector<ObjectId>> pieces;

  static OpenCover trivial(int num_objects);
  static OpenCover by_edges(const ObjectGraph& graph);  // closed edges plus isolated points
  std::vector<int> pieces_containing(ObjectId x) const;
};
Report validate_cover(const FiniteGroupoid& g, const OpenCover& cover);

// The localization G_U: objects (i, x) with x in U_i, arrows (j, g, i).
struct Localization {
  GroupoidPtr groupoid;
  GroupoidHom projection;
  OpenCover cover;
  std::vector<std::pair<int, ObjectId>> object_label;          // local object -> (i, x)
  std::vector<std::tuple<int, ArrowId, int>> arrow_label;      // local arrow -> (j, g, i)
  std::map<std::pair<int, ObjectId>, ObjectId> object_index;
  std::map<std::tuple<int, ArrowId, int>, ArrowId> arrow_index;

  ObjectId object(int piece, ObjectId x) const;
  ArrowId arrow(int to_piece, ArrowId g, int from_piece) const;
};
Localization localize(const GroupoidPtr& g, const OpenCover& cover);

struct HomSearchOptions {
  std::size_t max_candidates = 5'000'000;
  bool injective_on_objects = false;
  // Optional fixed object images (kNone entries are free).
  std::vector<ObjectId> fixed_objects;
};
// Enumerates every continuous functor source -> target; the callback returns false to stop.
// Throws ResourceLimit when the candidate budget is exhausted.
void for_each_hom(const GroupoidPtr& source, const GroupoidPtr& target,
                  const std::function<bool(const GroupoidHom&)>& visit, const HomSearchOptions& options = {});
std::vector<GroupoidHom> enumerate_homs(const GroupoidPtr& source, const GroupoidPtr& target,
                                        const HomSearchOptions& options = {});

// Exhaustive search for an isomorphism preserving edges and sheets.
std::optional<GroupoidHom> find_groupoid_isomorphism(const GroupoidPtr& a, const GroupoidPtr& b);

}  // namespace etale
