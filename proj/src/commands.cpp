#include "etale/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "etale/bundle.hpp"
#include "etale/developable.hpp"
#include "etale/extensions.hpp"
#include "etale/loops.hpp"
#include "etale/morphisms.hpp"
#include "etale/spec_file.hpp"

namespace etale {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : Error {
  using Error::Error;
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Options {
  std::string out;
  std::string format = "structured";
  std::size_t max_size = 0;  // 0: module defaults
  std::uint64_t seed = 0;
  bool timing = false;
};

// Shared report skeleton; `rows` feeds the csv format when a command has a tabular result.
struct Output {
  json report;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

json input_entry(const SpecFile& s) {
  return json{{"path", s.origin}, {"kind", kind_name(s.kind)}, {"digest", hex(s.digest)}};
}

json names_of(const ObjectGraph& g, const std::vector<ObjectId>& ids) {
  json a = json::array();
  for (ObjectId x : ids) a.push_back(g.name(x));
  return a;
}

const FiniteGroupoid& groupoid_of(const SpecFile& s) {
  if (!s.groupoid) throw Error(s.origin + " does not describe a groupoid (kind " + kind_name(s.kind) + ")");
  return *s.groupoid;
}

ObjectId object_named(const FiniteGroupoid& g, const std::string& name) {
  if (name.empty()) return 0;
  ObjectId x = g.base.find(name);
  if (x == kNone) throw Error("unknown object '" + name + "'");
  return x;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

// ------------------------------------------------------------------ commands

Output cmd_validate(const std::string& path) {
  SpecFile s = parse_spec_file(path);
  Output o;
  o.report["command"] = "validate";
  o.report["inputs"] = json::array({input_entry(s)});
  json r;
  r["valid"] = true;
  r["kind"] = kind_name(s.kind);
  if (s.groupoid) {
    r["objects"] = s.groupoid->num_objects();
    r["arrows"] = s.groupoid->num_arrows();
    r["edges"] = s.groupoid->base.edges().size();
  }
  if (s.group) r["group_order"] = s.group->order();
  if (s.orbifold) {
    r["geometry"] = s.orbifold->geometry.describe();
    r["generators"] = s.orbifold->names;
    r["word_bound"] = s.orbifold->word_bound;
  }
  if (s.kind == SpecKind::Cover) r["pieces"] = s.cover.size();
  o.report["result"] = r;
  return o;
}

Output cmd_orbits(const std::string& path) {
  SpecFile s = parse_spec_file(path);
  const FiniteGroupoid& g = groupoid_of(s);
  Output o;
  o.report["command"] = "orbits";
  o.report["inputs"] = json::array({input_entry(s)});
  json blocks = json::array();
  o.csv_header = {"orbit", "object", "isotropy_order"};
  int i = 0;
  for (const auto& block : orbits(g)) {
    json b;
    b["objects"] = names_of(g.base, block);
    b["isotropy_order"] = isotropy(g, block.front()).group.order();
    blocks.push_back(b);
    for (ObjectId x : block)
      o.csv_rows.push_back({std::to_string(i), g.base.name(x), std::to_string(isotropy(g, x).group.order())});
    ++i;
  }
  o.report["result"] = json{{"orbit_count", blocks.size()}, {"orbits", blocks}};
  return o;
}

Output cmd_localize(const std::string& path, const std::string& cover_path) {
  SpecFile s = parse_spec_file(path);
  const FiniteGroupoid& g = groupoid_of(s);
  Output o;
  o.report["command"] = "localize";
  json inputs = json::array({input_entry(s)});
  OpenCover cover;
  if (cover_path.empty()) {
    cover = OpenCover::by_edges(g.base);
  } else {
    SpecFile c = parse_spec_file(cover_path);
    inputs.push_back(input_entry(c));
    cover = resolve_cover(c, g);
  }
  o.report["inputs"] = inputs;
  Localization loc = localize(s.groupoid, cover);
  const FiniteGroupoid& l = *loc.groupoid;
  EquivalenceVerdict v = is_equivalence_hom(loc.projection);
  json pieces = json::array();
  for (const auto& p : cover.pieces) pieces.push_back(names_of(g.base, p));
  json objects = json::array();
  for (ObjectId x = 0; x < l.num_objects(); ++x) objects.push_back(l.base.name(x));
  o.report["result"] = json{{"pieces", pieces},
                            {"local_objects", objects},
                            {"local_arrows", l.num_arrows()},
                            {"valid", validate_groupoid(l).empty()},
                            {"projection_is_equivalence", v.equivalence},
                            {"witness", v.witness},
                            {"orbits_before", orbits(g).size()},
                            {"orbits_after", orbits(l).size()}};
  o.csv_header = {"local_object", "piece", "object"};
  for (ObjectId x = 0; x < l.num_objects(); ++x)
    o.csv_rows.push_back({l.base.name(x), std::to_string(loc.object_label[x].first), g.base.name(loc.object_label[x].second)});
  return o;
}

Output cmd_morphisms(const std::string& source, const std::string& target, const std::string& star, bool as_groupoid,
                     const Options& opt) {
  SpecFile s = parse_spec_file(source), t = parse_spec_file(target);
  const FiniteGroupoid& g = groupoid_of(s);
  groupoid_of(t);
  MorphismOptions mo;
  if (opt.max_size) mo.max_candidates = opt.max_size;
  ObjectId x = object_named(g, star);
  Output o;
  o.report["command"] = "morphisms";
  o.report["inputs"] = json::array({input_entry(s), input_entry(t)});
  o.report["options"] = json{{"star", g.base.name(x)}, {"mode", as_groupoid ? "groupoid" : "enumerate"}};
  MorphismSpace space = enumerate_pointed_morphisms(s.groupoid, t.groupoid, x, mo);
  json classes = json::array();
  o.csv_header = {"class", "size", "target_anchor", "digest"};
  for (std::size_t i = 0; i < space.classes.size(); ++i) {
    const MorphismClass& c = space.classes[i];
    std::string anchor = t.groupoid->base.name(c.target_anchor);
    classes.push_back(json{{"class", "z" + std::to_string(i)},
                           {"size", c.representative.bundle.size()},
                           {"target_anchor", anchor},
                           {"digest", hex(c.digest)}});
    o.csv_rows.push_back({"z" + std::to_string(i), std::to_string(c.representative.bundle.size()), anchor, hex(c.digest)});
  }
  json r;
  r["class_count"] = space.classes.size();
  r["unpointed_class_count"] = unpointed_classes(space).size();
  r["classes"] = classes;
  if (as_groupoid) {
    MorphismGroupoid mor = morphism_groupoid(std::move(space));
    const FiniteGroupoid& m = *mor.groupoid;
    json edges = json::array();
    for (auto [a, b] : m.base.edges()) edges.push_back(json::array({m.base.name(a), m.base.name(b)}));
    json blocks = json::array();
    for (const auto& block : orbits(m)) blocks.push_back(names_of(m.base, block));
    r["groupoid"] = json{{"objects", m.num_objects()},
                         {"arrows", m.num_arrows()},
                         {"edges", edges},
                         {"orbits", blocks},
                         {"valid", validate_groupoid(m).empty()}};
  }
  o.report["result"] = r;
  return o;
}

json bundle_summary(const PointedBundle& p) {
  CanonicalForm c = canonical_form(p);
  const Bundle& b = c.bundle.bundle;
  json elements = json::array();
  for (ElementId e = 0; e < b.size(); ++e)
    elements.push_back(json{{"s", b.right->base.name(b.s[e])}, {"t", b.left->base.name(b.t[e])}});
  return json{{"size", b.size()}, {"digest", hex(c.digest)}, {"elements", elements},
              {"left_action", b.left_act}, {"right_action", b.right_act}};
}

Output cmd_bundles(const std::string& mode, const std::vector<std::string>& files, const std::string& star,
                   const Options& opt) {
  Output o;
  o.report["command"] = "bundles";
  json inputs = json::array();
  std::vector<GroupoidHom> homs;
  for (const auto& f : files) {
    SpecFile s = parse_spec_file(f);
    inputs.push_back(input_entry(s));
    homs.push_back(resolve_hom(s));
  }
  o.report["inputs"] = inputs;
  o.report["options"] = json{{"mode", mode}};
  const std::size_t need = mode == "invert" ? 1 : 2;
  if (homs.size() != need) throw UsageError("--" + mode + " takes " + std::to_string(need) + " hom file(s)");
  const GroupoidHom& phi = homs[0];
  ObjectId x = object_named(*phi.source, star);
  json r;
  if (mode == "invert") {
    PointedBundle e = hom_bundle(phi, x);
    r["bundle"] = bundle_summary(e);
    std::optional<Bundle> inv = invert_bundle(e.bundle);
    r["invertible"] = inv.has_value();
    if (inv) {
      r["inverse_size"] = inv->size();
      r["inverse_then_bundle_is_unit"] =
          bundle_isomorphism(compose_bundles(*inv, e.bundle), unit_bundle(phi.source)).has_value();
    }
  } else if (mode == "compose") {
    const GroupoidHom& psi = homs[1];
    if (!same_groupoid(phi.target, psi.source)) throw Error("homs are not composable");
    PointedBundle inner = hom_bundle(phi, x);
    PointedBundle outer = hom_bundle(psi, phi.obj_map[x]);
    Bundle composed = compose_bundles(outer.bundle, inner.bundle);
    PointedBundle direct = hom_bundle(compose_homs(psi, phi), x);
    r["composite_size"] = composed.size();
    r["direct"] = bundle_summary(direct);
    r["isomorphic_to_direct"] = bundle_isomorphism(composed, direct.bundle).has_value();
  } else {
    const GroupoidHom& psi = homs[1];
    PointedBundle a = hom_bundle(phi, x), b = hom_bundle(psi, x);
    PointedIsoResult res = pointed_isomorphism(a, b, opt.seed ? std::optional<std::uint64_t>(opt.seed) : std::nullopt);
    r["isomorphic"] = res.map.has_value();
    if (res.map) r["map"] = *res.map;
    else r["conflict"] = res.conflict;
  }
  o.report["result"] = r;
  return o;
}

Output cmd_geodesics(const std::string& path, const std::vector<std::string>& twist_words, int samples, double tol,
                     int seeds, const Options& opt) {
  SpecFile s = parse_spec_file(path);
  if (!s.orbifold) throw Error(path + " is not an orbifold file");
  const OrbifoldSpec& orb = *s.orbifold;
  IsometryGroup group = enumerate_isometries(orb.geometry, orb.generators, orb.word_bound, orb.names);
  std::vector<IsometryElement> twists;
  if (twist_words.empty()) {
    twists = group.elements;
  } else {
    for (const auto& w : twist_words) twists.push_back(parse_word(w, orb.generators, orb.names));
  }
  MinimizeOptions mo;
  mo.grad_tol = tol;
  if (opt.max_size) mo.max_iter = static_cast<long>(opt.max_size);
  std::vector<SpectrumRow> rows = length_spectrum(group, twists, samples, seeds, opt.seed, mo);

  Output o;
  o.report["command"] = "geodesics";
  o.report["inputs"] = json::array({input_entry(s)});
  o.report["options"] = json{{"samples", samples}, {"tol", tol}, {"seeds", seeds}, {"seed", opt.seed}};
  json table = json::array();
  o.csv_header = {"class_word", "min_length", "iterations", "converged", "degenerate"};
  for (const auto& r : rows) {
    json row{{"class_word", r.class_word}, {"min_length", r.min_length}, {"iterations", r.iterations},
             {"converged", r.converged}, {"degenerate", r.degenerate}};
    if (r.degenerate) row["note"] = "degenerate: fixed locus reached";
    table.push_back(row);
    o.csv_rows.push_back({r.class_word, fmt_double(r.min_length), std::to_string(r.iterations),
                          r.converged ? "true" : "false", r.degenerate ? "true" : "false"});
  }
  o.report["result"] = json{{"geometry", orb.geometry.describe()}, {"group_elements", group.elements.size()},
                            {"spectrum", table}};
  return o;
}

json names_of_group(const FiniteGroup& g, const std::vector<int>& ids) {
  json a = json::array();
  for (int x : ids) a.push_back(g.name(x));
  return a;
}

Output cmd_extensions(const std::string& qpath, const std::string& npath, const std::string& apath,
                      const Options& opt) {
  SpecFile qs = parse_spec_file(qpath), ns = parse_spec_file(npath);
  if (!qs.group || !ns.group) throw Error("--quotient and --kernel must describe groups");
  const FiniteGroup& q = *qs.group;
  const FiniteGroup& n = *ns.group;
  const std::size_t cap = opt.max_size ? opt.max_size : 50'000'000;
  Output o;
  o.report["command"] = "extensions";
  json inputs = json::array({input_entry(qs), input_entry(ns)});
  json r;
  r["quotient_order"] = q.order();
  r["kernel_order"] = n.order();
  r["kernel_abelian"] = n.is_abelian();
  std::optional<QModule> module;
  if (!apath.empty()) {
    SpecFile as = parse_spec_file(apath);
    inputs.push_back(input_entry(as));
    if (!n.is_abelian()) throw Error("--action needs an abelian kernel");
    module = resolve_module(as, q, n);
  } else if (n.is_abelian()) {
    module = QModule{q, n, {}};
  }
  o.report["inputs"] = inputs;
  if (module) {
    ExtensionClassification cls = classify_extensions(*module, cap);
    json classes = json::array();
    for (const auto& c : cls.classes)
      classes.push_back(json{{"factor_set", c.representative},
                             {"group_order", c.group.order()},
                             {"abelian", c.group.is_abelian()},
                             {"group_axioms_hold", validate_group_table(c.group.order(), c.group.table()).empty()},
                             {"table", c.group.table()}});
    r["classification"] = json{{"class_count", cls.classes.size()},
                               {"cocycles", cls.cocycles},
                               {"coboundaries", cls.coboundaries},
                               {"classes", classes}};
  }
  OuterAutomorphismGroup out = outer_automorphism_group(n);
  json obs = json::array();
  o.csv_header = {"psi", "vanishes"};
  for (const GroupMap& psi : enumerate_homomorphisms(q, out.group)) {
    Obstruction ob = extension_obstruction(q, n, psi, cap);
    std::string label;
    for (int x = 0; x < q.order(); ++x) label += (x ? " " : "") + std::to_string(psi[x]);
    obs.push_back(json{{"psi", psi}, {"vanishes", ob.vanishes}});
    o.csv_rows.push_back({label, ob.vanishes ? "true" : "false"});
  }
  r["outer_automorphism_order"] = out.group.order();
  r["obstructions"] = obs;
  o.report["result"] = r;
  return o;
}

Output cmd_crossed_module(const std::string& path) {
  SpecFile s = parse_spec_file(path);
  Output o;
  o.report["command"] = "crossed-module";
  o.report["inputs"] = json::array({input_entry(s)});
  CrossedModule cm;
  std::string construction;
  if (s.action) {
    cm = selfequivalence_crossed_module(*s.action).module;
    construction = "self-equivalences";
  } else if (s.group) {
    cm = inner_crossed_module(*s.group);
    construction = "inner";
  } else {
    throw Error(path + " must describe a group or a group action");
  }
  Report v = validate_crossed_module(cm);
  json action = json::array();
  for (const auto& a : cm.action) action.push_back(a);
  o.report["result"] = json{{"construction", construction},
                            {"gamma_order", cm.gamma.order()},
                            {"s_order", cm.s.order()},
                            {"mu", names_of_group(cm.s, cm.mu)},
                            {"action", action},
                            {"valid", v.empty()},
                            {"violations", v}};
  o.csv_header = {"gamma", "mu"};
  for (int g = 0; g < cm.gamma.order(); ++g) o.csv_rows.push_back({cm.gamma.name(g), cm.s.name(cm.mu[g])});
  return o;
}

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string emit(const Output& o, const std::string& format) {
  if (format == "structured") return o.report.dump(2) + "\n";
  if (o.csv_header.empty()) throw UsageError("this command has no comma-separated output");
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
    out += "\n";
  };
  line(o.csv_header);
  for (const auto& r : o.csv_rows) line(r);
  return out;
}

}  // namespace

CommandResult run_command(const std::vector<std::string>& args) {
  CLI::App app{"Finite etale groupoid workbench", "etale"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--out", opt.out, "Write the report to this path");
  app.add_option("--format", opt.format, "structured or csv")->check(CLI::IsMember({"structured", "csv"}));
  app.add_option("--max-size", opt.max_size, "Cap on exhaustive searches");
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_flag("--timing", opt.timing, "Include wall-clock timing (breaks byte-identical output)");

  std::string spec, cover, source, target, star, quotient, kernel, action;
  std::vector<std::string> twists, files;
  int samples = 256, seeds = 1;
  double tol = 1e-7;
  bool enumerate = false, as_groupoid = false, compose = false, invert = false, pointed = false;

  auto* validate = app.add_subcommand("validate", "Parse and validate a spec file");
  validate->add_option("spec", spec)->required();
  auto* orbit_cmd = app.add_subcommand("orbits", "Orbit blocks and isotropy orders");
  orbit_cmd->add_option("spec", spec)->required();
  auto* localize_cmd = app.add_subcommand("localize", "Localize over a cover (edge cover by default)");
  localize_cmd->add_option("spec", spec)->required();
  localize_cmd->add_option("--cover", cover);
  auto* morph = app.add_subcommand("morphisms", "Pointed morphism classes");
  morph->add_option("--source", source)->required();
  morph->add_option("--target", target)->required();
  morph->add_option("--star", star);
  auto* m_enum = morph->add_flag("--enumerate", enumerate);
  morph->add_flag("--groupoid", as_groupoid)->excludes(m_enum);
  auto* bundles = app.add_subcommand("bundles", "Bundle composition, inversion and pointed isomorphism");
  bundles->add_option("homs", files)->required();
  bundles->add_option("--star", star);
  auto* b1 = bundles->add_flag("--compose", compose);
  auto* b2 = bundles->add_flag("--invert", invert)->excludes(b1);
  bundles->add_flag("--pointed-iso", pointed)->excludes(b1)->excludes(b2);
  auto* geo = app.add_subcommand("geodesics", "Closed geodesics by twisted-loop energy descent");
  geo->add_option("spec", spec)->required();
  geo->add_option("--twist", twists);
  geo->add_option("--samples", samples)->check(CLI::Range(8, 1 << 16));
  geo->add_option("--tol", tol)->check(CLI::PositiveNumber);
  geo->add_option("--seeds", seeds)->check(CLI::Range(1, 1000));
  auto* ext = app.add_subcommand("extensions", "Extension classes and obstructions");
  ext->add_option("--quotient", quotient)->required();
  ext->add_option("--kernel", kernel)->required();
  ext->add_option("--action", action);
  auto* crossed = app.add_subcommand("crossed-module", "Crossed module of a group or group action");
  crossed->add_option("spec", spec)->required();

  CommandResult res;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    res.output = app.help();
    return res;
  } catch (const CLI::ParseError& e) {
    res.exit_code = 2;
    res.error = e.what();
    return res;
  }

  const auto start = std::chrono::steady_clock::now();
  Output o;
  try {
    try {
      if (validate->parsed()) {
        o = cmd_validate(spec);
      } else if (orbit_cmd->parsed()) {
        o = cmd_orbits(spec);
      } else if (localize_cmd->parsed()) {
        o = cmd_localize(spec, cover);
      } else if (morph->parsed()) {
        o = cmd_morphisms(source, target, star, as_groupoid, opt);
      } else if (bundles->parsed()) {
        if (!compose && !invert && !pointed) throw UsageError("bundles needs --compose, --invert or --pointed-iso");
        o = cmd_bundles(compose ? "compose" : invert ? "invert" : "pointed-iso", files, star, opt);
      } else if (geo->parsed()) {
        o = cmd_geodesics(spec, twists, samples, tol, seeds, opt);
      } else if (ext->parsed()) {
        o = cmd_extensions(quotient, kernel, action, opt);
      } else {
        o = cmd_crossed_module(spec);
      }
    } catch (const SpecError& e) {
      res.exit_code = 1;
      for (const auto& m : e.errors()) res.error += m + "\n";
      if (!validate->parsed()) return res;
      // validate still reports the errors in structured form.
      o.report = json{{"command", "validate"},
                      {"inputs", json::array({json{{"path", spec}}})},
                      {"result", json{{"valid", false}, {"errors", e.errors()}}}};
    }
    if (opt.timing)
      o.report["timing_ms"] =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::string bytes = emit(o, opt.format);
    if (!opt.out.empty()) {
      std::ofstream f(opt.out, std::ios::binary);
      if (!f) throw Error("cannot write " + opt.out);
      f << bytes;
    } else {
      res.output = std::move(bytes);
    }
  } catch (const UsageError& e) {
    res.exit_code = 2;
    res.error = e.what();
  } catch (const Error& e) {
    res.exit_code = 1;
    res.error = e.what();
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = std::string("internal error: ") + e.what();
  }
  return res;
}

}  // namespace etale
