#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etale/extensions.hpp"
#include "etale/geometry.hpp"
#include "etale/groupoid.hpp"

namespace etale {

enum class SpecKind { GroupoidExplicit, GroupoidAction, Group, Orbifold, Cover, Hom, Module };

std::string kind_name(SpecKind k);

// Schema problems, each prefixed with "line N:" when the position is known.
class SpecError : public Error {
 public:
  explicit SpecError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct OrbifoldSpec {
  Geometry geometry;
  std::vector<IsometryElement> generators;
  std::vector<std::string> names;
  int word_bound = 3;
};

// Name-level data; resolved against the referenced files by resolve_hom / resolve_module.
struct HomSpec {
  std::string source_path, target_path;  // relative to the hom file
  std::map<std::string, std::string> objects;
  std::map<std::string, std::string> arrows;     // explicit groupoids
  std::map<std::string, std::string> group_map;  // action groupoids: (g, x) -> (psi g, f x)
};

struct SpecFile {
  SpecKind kind = SpecKind::Group;
  std::string version;
  std::string origin;     // path or "<text>"
  std::uint64_t digest = 0;  // of the raw text

  std::optional<FiniteGroup> group;        // group, groupoid-action
  std::optional<GroupAction> action;       // groupoid-action
  GroupoidPtr groupoid;                    // groupoid kinds and group
  std::optional<OrbifoldSpec> orbifold;
  std::vector<std::vector<std::string>> cover;  // pieces by object name
  std::optional<HomSpec> hom;
  std::map<std::string, std::vector<std::string>> module_action;  // quotient element -> kernel images
};

// Throws SpecError with every problem found.
SpecFile parse_spec_text(const std::string& text, const std::string& origin = "<text>");
SpecFile parse_spec_file(const std::string& path);

std::uint64_t text_digest(const std::string& text);

OpenCover resolve_cover(const SpecFile& cover, const FiniteGroupoid& g);
GroupoidHom resolve_hom(const SpecFile& hom);
QModule resolve_module(const SpecFile& module, const FiniteGroup& q, const FiniteGroup& c);

}  // namespace etale
