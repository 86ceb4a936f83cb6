#include "etale/spec_file.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "etale/developable.hpp"

namespace etale {

std::string kind_name(SpecKind k) {
  switch (k) {
    case SpecKind::GroupoidExplicit: return "groupoid-explicit";
    case SpecKind::GroupoidAction: return "groupoid-action";
    case SpecKind::Group: return "group";
    case SpecKind::Orbifold: return "orbifold";
    case SpecKind::Cover: return "cover";
    case SpecKind::Hom: return "hom";
    case SpecKind::Module: return "module";
  }
  return "unknown";
}

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

SpecError::SpecError(std::vector<std::string> errors)
    : Error(errors.empty() ? "invalid spec file" : join(errors, "; ")), errors_(std::move(errors)) {}

std::uint64_t text_digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

// Collects problems with line references; aborting only when nothing further can be checked.
struct Parser {
  std::vector<std::string> errors;

  struct Abort {};

  void fail(const YAML::Node& at, const std::string& msg) {
    if (at && at.Mark().line >= 0)
      errors.push_back("line " + std::to_string(at.Mark().line + 1) + ": " + msg);
    else
      errors.push_back(msg);
  }
  [[noreturn]] void fatal(const YAML::Node& at, const std::string& msg) {
    fail(at, msg);
    throw Abort{};
  }

  YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& context) {
    YAML::Node n = map[key];
    if (!n) fatal(map, context + " is missing '" + key + "'");
    return n;
  }

  std::string scalar(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fatal(n, what + " must be a scalar");
    return n.as<std::string>();
  }

  int integer(const YAML::Node& n, const std::string& what) {
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      fatal(n, what + " must be an integer");
    }
  }

  double number(const YAML::Node& n, const std::string& what) {
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fatal(n, what + " must be a number");
    }
  }

  std::vector<std::string> names(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fatal(n, what + " must be a list");
    std::vector<std::string> out;
    for (const auto& item : n) out.push_back(scalar(item, what + " entry"));
    return out;
  }

  FiniteGroup group(const YAML::Node& n) {
    if (!n.IsMap()) fatal(n, "group must be a mapping");
    if (n["builtin"]) {
      const std::string b = scalar(n["builtin"], "builtin");
      auto arg = [&] { return integer(require(n, "n", "builtin group " + b), "n"); };
      if (b == "trivial") return FiniteGroup::trivial();
      if (b == "quaternion") return FiniteGroup::quaternion();
      int k = arg();
      if (k < 1 || k > 64) fatal(n["n"], "n must lie in 1..64");
      if (b == "cyclic") return FiniteGroup::cyclic(k);
      if (b == "dihedral") return FiniteGroup::dihedral(k);
      if (b == "symmetric") {
        if (k > 5) fatal(n["n"], "symmetric groups are limited to n <= 5");
        return FiniteGroup::symmetric(k);
      }
      fatal(n["builtin"], "unknown builtin group '" + b + "'");
    }
    std::vector<std::string> el = names(require(n, "elements", "group"), "elements");
    std::map<std::string, int> idx;
    for (std::size_t i = 0; i < el.size(); ++i)
      if (!idx.emplace(el[i], static_cast<int>(i)).second) fatal(n["elements"], "duplicate element '" + el[i] + "'");
    YAML::Node rows = require(n, "table", "group");
    if (!rows.IsSequence() || rows.size() != el.size()) fatal(rows, "table must have one row per element");
    std::vector<int> table;
    for (std::size_t i = 0; i < el.size(); ++i) {
      std::vector<std::string> row = names(rows[i], "table row");
      if (row.size() != el.size()) fatal(rows[i], "table row " + el[i] + " has the wrong length");
      for (const auto& name : row) {
        auto it = idx.find(name);
        if (it == idx.end()) fatal(rows[i], "table row " + el[i] + " names unknown element '" + name + "'");
        table.push_back(it->second);
      }
    }
    Report r = validate_group_table(static_cast<int>(el.size()), table);
    if (!r.empty()) fatal(rows, "table is not a group: " + r.front());
    return FiniteGroup(static_cast<int>(el.size()), table, el);
  }

  int element(const FiniteGroup& g, const YAML::Node& at, const std::string& name) {
    for (int i = 0; i < g.order(); ++i)
      if (g.name(i) == name) return i;
    fatal(at, "unknown group element '" + name + "'");
  }

  ObjectGraph graph(const YAML::Node& objects, const YAML::Node& edges) {
    std::vector<std::string> obj = names(objects, "objects");
    std::set<std::string> seen;
    for (const auto& o : obj)
      if (!seen.insert(o).second) fatal(objects, "duplicate object '" + o + "'");
    std::vector<std::pair<ObjectId, ObjectId>> e;
    if (edges) {
      if (!edges.IsSequence()) fatal(edges, "edges must be a list of pairs");
      for (const auto& pair : edges) {
        std::vector<std::string> ends = names(pair, "edge");
        if (ends.size() != 2) fatal(pair, "an edge has exactly two endpoints");
        ObjectId a = kNone, b = kNone;
        for (std::size_t i = 0; i < obj.size(); ++i) {
          if (obj[i] == ends[0]) a = static_cast<ObjectId>(i);
          if (obj[i] == ends[1]) b = static_cast<ObjectId>(i);
        }
        if (a == kNone || b == kNone) fatal(pair, "edge " + ends[0] + "-" + ends[1] + " names an unknown object");
        if (a == b) fatal(pair, "edge " + ends[0] + "-" + ends[1] + " is a self-loop");
        e.push_back({a, b});
      }
    }
    return ObjectGraph(obj, e);
  }

  // Extends a partial assignment on group elements to the whole group through `combine`,
  // which must be multiplicative: value(a b) = combine(value(a), value(b)).
  template <class V>
  std::vector<V> close_over_group(const FiniteGroup& g, std::map<int, V> known, V identity,
                                  const std::function<V(const V&, const V&)>& combine, const YAML::Node& at,
                                  const std::string& what) {
    if (auto it = known.find(g.identity()); it != known.end() && it->second != identity)
      fatal(at, what + " sends the identity to a non-identity");
    known[g.identity()] = identity;
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<std::pair<int, V>> snapshot(known.begin(), known.end());
      for (const auto& [a, va] : snapshot)
        for (const auto& [b, vb] : snapshot) {
          int c = g.mul(a, b);
          V vc = combine(va, vb);
          auto it = known.find(c);
          if (it == known.end()) {
            known.emplace(c, std::move(vc));
            changed = true;
          } else if (it->second != vc) {
            fatal(at, what + " is inconsistent at " + g.name(a) + "*" + g.name(b));
          }
        }
    }
    if (static_cast<int>(known.size()) != g.order()) {
      for (int i = 0; i < g.order(); ++i)
        if (!known.count(i)) fatal(at, what + " does not determine element " + g.name(i));
    }
    std::vector<V> out;
    for (auto& [k, v] : known) out.push_back(std::move(v));
    return out;
  }

  GroupAction action(const YAML::Node& root) {
    FiniteGroup g = group(require(root, "group", "groupoid-action"));
    YAML::Node space = require(root, "space", "groupoid-action");
    ObjectGraph x = graph(require(space, "objects", "space"), space["edges"]);
    YAML::Node act = require(root, "action", "groupoid-action");
    if (!act.IsMap()) fatal(act, "action must map group elements to object images");
    std::map<int, std::vector<ObjectId>> known;
    for (const auto& kv : act) {
      int e = element(g, kv.first, scalar(kv.first, "group element"));
      std::vector<std::string> img = names(kv.second, "action images");
      if (static_cast<int>(img.size()) != x.size()) fatal(kv.second, "action of " + g.name(e) + " needs one image per object");
      std::vector<ObjectId> perm;
      for (const auto& name : img) {
        ObjectId o = x.find(name);
        if (o == kNone) fatal(kv.second, "action of " + g.name(e) + " names unknown object '" + name + "'");
        perm.push_back(o);
      }
      known[e] = perm;
    }
    std::vector<ObjectId> id(x.size());
    for (int i = 0; i < x.size(); ++i) id[i] = i;
    auto perms = close_over_group<std::vector<ObjectId>>(
        g, known, id,
        [](const std::vector<ObjectId>& a, const std::vector<ObjectId>& b) {
          std::vector<ObjectId> c(b.size());
          for (std::size_t i = 0; i < b.size(); ++i) c[i] = a[b[i]];
          return c;
        },
        act, "action");
    GroupAction out{g, x, {}};
    for (const auto& p : perms) out.table.insert(out.table.end(), p.begin(), p.end());
    Report r = validate_action(out);
    if (!r.empty()) fatal(act, "invalid action: " + r.front());
    return out;
  }

  GroupoidPtr explicit_groupoid(const YAML::Node& root) {
    ObjectGraph base = graph(require(root, "objects", "groupoid-explicit"), root["edges"]);
    auto g = std::make_shared<FiniteGroupoid>();
    g->base = base;
    std::map<std::string, ArrowId> arrow;
    for (ObjectId x = 0; x < base.size(); ++x) {
      g->unit.push_back(static_cast<ArrowId>(g->src.size()));
      arrow["1_" + base.name(x)] = g->unit.back();
      g->arrow_names.push_back("1_" + base.name(x));
      g->src.push_back(x);
      g->tgt.push_back(x);
    }
    if (YAML::Node arrows = root["arrows"]) {
      if (!arrows.IsSequence()) fatal(arrows, "arrows must be a list of [name, source, target]");
      for (const auto& a : arrows) {
        std::vector<std::string> f = names(a, "arrow");
        if (f.size() != 3) fatal(a, "an arrow is [name, source, target]");
        ObjectId s = base.find(f[1]), t = base.find(f[2]);
        if (s == kNone || t == kNone) {
          fail(a, "arrow " + f[0] + " references unknown object '" + (s == kNone ? f[1] : f[2]) + "'");
          continue;
        }
        if (!arrow.emplace(f[0], static_cast<ArrowId>(g->src.size())).second) fatal(a, "duplicate arrow " + f[0]);
        g->arrow_names.push_back(f[0]);
        g->src.push_back(s);
        g->tgt.push_back(t);
      }
    }
    if (!errors.empty()) throw Abort{};
    auto lookup = [&](const YAML::Node& at, const std::string& name) {
      auto it = arrow.find(name);
      if (it == arrow.end()) fatal(at, "unknown arrow '" + name + "'");
      return it->second;
    };
    const int n = g->num_arrows();
    for (ArrowId a = 0; a < n; ++a) {
      g->set_compose(g->unit[g->tgt[a]], a, a);
      g->set_compose(a, g->unit[g->src[a]], a);
    }
    if (YAML::Node comp = root["compose"]) {
      if (!comp.IsSequence()) fatal(comp, "compose must be a list of [g, h, g*h]");
      for (const auto& c : comp) {
        std::vector<std::string> f = names(c, "composition");
        if (f.size() != 3) fatal(c, "a composition is [g, h, g*h]");
        ArrowId a = lookup(c, f[0]), b = lookup(c, f[1]), ab = lookup(c, f[2]);
        if (g->src[a] != g->tgt[b]) fatal(c, "composition " + f[0] + "*" + f[1] + " is not composable");
        g->set_compose(a, b, ab);
      }
    }
    g->inv.assign(n, kNone);
    for (ArrowId a = 0; a < n; ++a)
      for (ArrowId b = 0; b < n && g->inv[a] == kNone; ++b)
        if (g->src[a] == g->tgt[b] && g->compose(a, b) == g->unit[g->tgt[a]] && g->compose(b, a) == g->unit[g->src[a]])
          g->inv[a] = b;
    for (ArrowId a = 0; a < n; ++a)
      if (g->inv[a] == kNone) fail(root["compose"] ? root["compose"] : root, "arrow " + g->arrow_names[a] + " has no inverse");
    g->sheets.assign(n, {});
    if (YAML::Node sh = root["sheets"]) {
      if (!sh.IsSequence()) fatal(sh, "sheets must be a list of [arrow, neighbor, continued arrow]");
      for (const auto& s : sh) {
        std::vector<std::string> f = names(s, "sheet");
        if (f.size() != 3) fatal(s, "a sheet entry is [arrow, neighbor, continued arrow]");
        ArrowId a = lookup(s, f[0]), b = lookup(s, f[2]);
        ObjectId y = base.find(f[1]);
        if (y == kNone) fatal(s, "sheet of arrow " + f[0] + " references unknown object '" + f[1] + "'");
        g->sheets[a].push_back({y, b});
      }
    }
    add_unit_sheets(*g);
    if (!errors.empty()) throw Abort{};
    Report r = validate_groupoid(*g);
    for (const auto& msg : r) fail(root, msg);
    return g;
  }

  OrbifoldSpec orbifold(const YAML::Node& root) {
    OrbifoldSpec o;
    const std::string geo = scalar(require(root, "geometry", "orbifold"), "geometry");
    int d = 0;
    if (geo == "flat") {
      d = integer(require(root, "dimension", "flat orbifold"), "dimension");
      if (d != 2 && d != 3) fatal(root["dimension"], "flat dimension must be 2 or 3");
      o.geometry = Geometry::flat(d);
    } else if (geo == "sphere") {
      d = 3;
      if (root["dimension"] && integer(root["dimension"], "dimension") != 2)
        fatal(root["dimension"], "the sphere has dimension 2");
      o.geometry = Geometry::sphere();
    } else {
      fatal(root["geometry"], "unknown geometry '" + geo + "'");
    }
    o.word_bound = root["word_bound"] ? integer(root["word_bound"], "word_bound") : 3;
    if (o.word_bound < 0 || o.word_bound > 12) fatal(root["word_bound"], "word_bound must lie in 0..12");
    YAML::Node gens = require(root, "generators", "orbifold");
    if (!gens.IsSequence()) fatal(gens, "generators must be a list");
    for (const auto& gn : gens) {
      const std::string name = scalar(require(gn, "name", "generator"), "generator name");
      IsometryElement e;
      e.word = name;
      YAML::Node lin = require(gn, "linear", "generator " + name);
      if (!lin.IsSequence() || static_cast<int>(lin.size()) != d)
        fatal(lin, "generator " + name + ": linear part needs " + std::to_string(d) + " rows");
      for (int i = 0; i < d; ++i) {
        if (!lin[i].IsSequence() || static_cast<int>(lin[i].size()) != d)
          fatal(lin[i], "generator " + name + ": row " + std::to_string(i + 1) + " needs " + std::to_string(d) + " entries");
        for (int j = 0; j < d; ++j) e.linear(i, j) = number(lin[i][j], "matrix entry");
      }
      if (YAML::Node tr = gn["translation"]) {
        if (o.geometry.kind() == GeometryKind::Sphere) fatal(tr, "generator " + name + ": sphere isometries have no translation");
        if (!tr.IsSequence() || static_cast<int>(tr.size()) != d)
          fatal(tr, "generator " + name + ": translation needs " + std::to_string(d) + " entries");
        for (int i = 0; i < d; ++i) e.translation(i) = number(tr[i], "translation entry");
      }
      Mat gram = e.linear * e.linear.transpose() - Mat::Identity();
      for (int i = 0; i < d; ++i)
        if (gram.row(i).cwiseAbs().maxCoeff() > 1e-9) {
          std::ostringstream row;
          row << "[";
          for (int j = 0; j < d; ++j) row << (j ? ", " : "") << e.linear(i, j);
          row << "]";
          fail(lin[i], "generator " + name + ": linear part is not orthogonal at row " + std::to_string(i + 1) + " " + row.str());
          break;
        }
      o.names.push_back(name);
      o.generators.push_back(e);
    }
    std::set<std::string> seen;
    for (const auto& n : o.names)
      if (!seen.insert(n).second) fail(gens, "duplicate generator name '" + n + "'");
    return o;
  }

  std::map<std::string, std::string> string_map(const YAML::Node& n, const std::string& what) {
    std::map<std::string, std::string> out;
    if (!n) return out;
    if (!n.IsMap()) fatal(n, what + " must be a mapping");
    for (const auto& kv : n) out[scalar(kv.first, what + " key")] = scalar(kv.second, what + " value");
    return out;
  }
};

}  // namespace

SpecFile parse_spec_text(const std::string& text, const std::string& origin) {
  Parser p;
  SpecFile out;
  out.origin = origin;
  out.digest = text_digest(text);
  try {
    YAML::Node root;
    try {
      root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
      p.errors.push_back("line " + std::to_string(e.mark.line + 1) + ": malformed syntax: " + e.msg);
      throw Parser::Abort{};
    }
    if (!root.IsMap()) p.fatal(root, "a spec file is a mapping with 'version' and 'kind'");
    out.version = p.scalar(p.require(root, "version", "spec file"), "version");
    if (out.version != "1") p.fatal(root["version"], "unsupported version '" + out.version + "'");
    const std::string kind = p.scalar(p.require(root, "kind", "spec file"), "kind");
    if (kind == "group") {
      out.kind = SpecKind::Group;
      out.group = p.group(p.require(root, "group", "group spec"));
      out.groupoid = group_as_groupoid(*out.group);
    } else if (kind == "groupoid-action") {
      out.kind = SpecKind::GroupoidAction;
      out.action = p.action(root);
      out.group = out.action->group;
      out.groupoid = action_groupoid(*out.action);
    } else if (kind == "groupoid-explicit") {
      out.kind = SpecKind::GroupoidExplicit;
      out.groupoid = p.explicit_groupoid(root);
    } else if (kind == "orbifold") {
      out.kind = SpecKind::Orbifold;
      out.orbifold = p.orbifold(root);
    } else if (kind == "cover") {
      out.kind = SpecKind::Cover;
      YAML::Node pieces = p.require(root, "pieces", "cover");
      if (!pieces.IsSequence()) p.fatal(pieces, "pieces must be a list of object lists");
      for (const auto& piece : pieces) out.cover.push_back(p.names(piece, "piece"));
    } else if (kind == "hom") {
      out.kind = SpecKind::Hom;
      HomSpec h;
      h.source_path = p.scalar(p.require(root, "source", "hom"), "source");
      h.target_path = p.scalar(p.require(root, "target", "hom"), "target");
      h.objects = p.string_map(p.require(root, "objects", "hom"), "objects");
      h.arrows = p.string_map(root["arrows"], "arrows");
      h.group_map = p.string_map(root["group_map"], "group_map");
      if (!h.arrows.empty() && !h.group_map.empty()) p.fail(root, "give either 'arrows' or 'group_map', not both");
      out.hom = std::move(h);
    } else if (kind == "module") {
      out.kind = SpecKind::Module;
      YAML::Node act = p.require(root, "action", "module");
      if (!act.IsMap()) p.fatal(act, "action must map quotient elements to kernel images");
      for (const auto& kv : act) out.module_action[p.scalar(kv.first, "quotient element")] = p.names(kv.second, "images");
    } else {
      p.fatal(root["kind"], "unknown kind '" + kind + "'");
    }
  } catch (const Parser::Abort&) {
  } catch (const YAML::Exception& e) {
    p.errors.push_back("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    p.errors.push_back(e.what());
  }
  if (!p.errors.empty()) throw SpecError(p.errors);
  return out;
}

SpecFile parse_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec_text(ss.str(), path);
  } catch (const SpecError& e) {
    std::vector<std::string> errs;
    for (const auto& m : e.errors()) errs.push_back(path + ": " + m);
    throw SpecError(errs);
  }
}

OpenCover resolve_cover(const SpecFile& cover, const FiniteGroupoid& g) {
  if (cover.kind != SpecKind::Cover) throw Error(cover.origin + " is not a cover file");
  OpenCover out;
  for (const auto& piece : cover.cover) {
    std::vector<ObjectId> ids;
    for (const auto& name : piece) {
      ObjectId x = g.base.find(name);
      if (x == kNone) throw Error("cover names unknown object '" + name + "'");
      ids.push_back(x);
    }
    out.pieces.push_back(ids);
  }
  Report r = validate_cover(g, out);
  if (!r.empty()) throw Error("invalid cover: " + r.front());
  return out;
}

namespace {

int element_named(const FiniteGroup& g, const std::string& name) {
  for (int i = 0; i < g.order(); ++i)
    if (g.name(i) == name) return i;
  throw Error("unknown group element '" + name + "'");
}

// Extends a partial group map multiplicatively; throws when it is not a homomorphism.
GroupMap close_group_map(const FiniteGroup& from, const FiniteGroup& to, std::map<int, int> known) {
  known[from.identity()] = to.identity();
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<int, int>> snap(known.begin(), known.end());
    for (auto [a, fa] : snap)
      for (auto [b, fb] : snap) {
        int c = from.mul(a, b), fc = to.mul(fa, fb);
        auto it = known.find(c);
        if (it == known.end()) {
          known[c] = fc;
          changed = true;
        } else if (it->second != fc) {
          throw Error("group map is not a homomorphism at " + from.name(a) + "*" + from.name(b));
        }
      }
  }
  if (static_cast<int>(known.size()) != from.order()) throw Error("group map does not determine every element");
  GroupMap out(from.order());
  for (auto [a, fa] : known) out[a] = fa;
  return out;
}

}  // namespace

GroupoidHom resolve_hom(const SpecFile& spec) {
  if (spec.kind != SpecKind::Hom || !spec.hom) throw Error(spec.origin + " is not a hom file");
  const HomSpec& h = *spec.hom;
  namespace fs = std::filesystem;
  fs::path dir = spec.origin == "<text>" ? fs::path(".") : fs::path(spec.origin).parent_path();
  SpecFile src = parse_spec_file((dir / h.source_path).string());
  SpecFile tgt = parse_spec_file((dir / h.target_path).string());
  if (!src.groupoid || !tgt.groupoid) throw Error("hom endpoints must be groupoid or group files");
  GroupoidHom phi{src.groupoid, tgt.groupoid, {}, {}};
  const FiniteGroupoid& s = *src.groupoid;
  const FiniteGroupoid& t = *tgt.groupoid;
  for (ObjectId x = 0; x < s.num_objects(); ++x) {
    auto it = h.objects.find(s.base.name(x));
    if (it == h.objects.end()) throw Error("hom does not map object " + s.base.name(x));
    ObjectId y = t.base.find(it->second);
    if (y == kNone) throw Error("hom maps " + s.base.name(x) + " to unknown object '" + it->second + "'");
    phi.obj_map.push_back(y);
  }
  if (!h.group_map.empty() || (src.action && tgt.action && h.arrows.empty())) {
    if (!src.group || !tgt.group) throw Error("group_map needs group or action endpoints");
    std::map<int, int> known;
    for (const auto& [a, b] : h.group_map) known[element_named(*src.group, a)] = element_named(*tgt.group, b);
    GroupMap psi = close_group_map(*src.group, *tgt.group, known);
    GroupAction sa = src.action ? *src.action : GroupAction{*src.group, ObjectGraph({"*"}, {}), std::vector<ObjectId>(src.group->order(), 0)};
    GroupAction ta = tgt.action ? *tgt.action : GroupAction{*tgt.group, ObjectGraph({"*"}, {}), std::vector<ObjectId>(tgt.group->order(), 0)};
    phi.arrow_map = pair_to_hom(EquivariantPair{phi.obj_map, psi}, sa, ta, src.groupoid, tgt.groupoid).arrow_map;
  } else {
    for (ArrowId a = 0; a < s.num_arrows(); ++a) {
      if (s.unit[s.src[a]] == a) {
        phi.arrow_map.push_back(t.unit[phi.obj_map[s.src[a]]]);
        continue;
      }
      auto it = h.arrows.find(s.describe_arrow(a));
      if (it == h.arrows.end()) throw Error("hom does not map arrow " + s.describe_arrow(a));
      ArrowId b = kNone;
      for (ArrowId c = 0; c < t.num_arrows(); ++c)
        if (t.describe_arrow(c) == it->second) b = c;
      if (b == kNone) throw Error("hom maps arrow " + s.describe_arrow(a) + " to unknown arrow '" + it->second + "'");
      phi.arrow_map.push_back(b);
    }
  }
  Report r = check_hom(phi);
  if (!r.empty()) throw Error("not a homomorphism: " + r.front());
  return phi;
}

QModule resolve_module(const SpecFile& spec, const FiniteGroup& q, const FiniteGroup& c) {
  if (spec.kind != SpecKind::Module) throw Error(spec.origin + " is not a module file");
  AutomorphismGroup aut = automorphism_group(c);
  std::map<int, int> known;
  for (const auto& [qname, images] : spec.module_action) {
    if (static_cast<int>(images.size()) != c.order())
      throw Error("action of " + qname + " needs one image per kernel element");
    GroupMap m;
    for (const auto& name : images) m.push_back(element_named(c, name));
    int a = aut.index_of(m);  // throws unless m is an automorphism
    known[element_named(q, qname)] = a;
  }
  GroupMap psi = close_group_map(q, aut.group, known);
  QModule out{q, c, {}};
  for (int x = 0; x < q.order(); ++x) out.action.push_back(aut.maps[psi[x]]);
  Report r = validate_module(out);
  if (!r.empty()) throw Error("invalid module: " + r.front());
  return out;
}

}  // namespace etale
