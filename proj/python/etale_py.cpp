#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "etale/commands.hpp"
#include "etale/developable.hpp"
#include "etale/loops.hpp"
#include "etale/morphisms.hpp"
#include "etale/spec_file.hpp"

namespace py = pybind11;
using namespace etale;

namespace {

using Samples = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

Geometry geometry_named(const std::string& name) {
  if (name == "flat" || name == "flat2") return Geometry::flat(2);
  if (name == "flat3") return Geometry::flat(3);
  if (name == "sphere") return Geometry::sphere();
  throw Error("unknown geometry '" + name + "' (flat, flat3, sphere)");
}

IsometryElement isometry(const Mat& linear, const Vec& translation) {
  IsometryElement e;
  e.linear = linear;
  e.translation = translation;
  return e;
}

TwistedLoop loop_from(const std::string& geometry, const Samples& samples, const Mat& linear, const Vec& translation) {
  TwistedLoop l{geometry_named(geometry), {}, isometry(linear, translation)};
  for (Eigen::Index k = 0; k < samples.rows(); ++k) l.samples.push_back(samples.row(k).transpose());
  return l;
}

Samples samples_of(const TwistedLoop& l) {
  Samples s(l.size(), 3);
  for (int k = 0; k < l.size(); ++k) s.row(k) = l.samples[k].transpose();
  return s;
}

SpecFile load(const std::string& path) { return parse_spec_file(path); }

GroupoidPtr groupoid_of(const std::string& path) {
  SpecFile s = load(path);
  if (!s.groupoid) throw Error(path + " does not describe a groupoid");
  return s.groupoid;
}

GroupAction action_of(const std::string& path) {
  SpecFile s = load(path);
  if (!s.action) throw Error(path + " does not describe a group action");
  return *s.action;
}

FiniteGroup group_of(const std::string& path) {
  SpecFile s = load(path);
  if (!s.group) throw Error(path + " does not describe a group");
  return *s.group;
}

}  // namespace

PYBIND11_MODULE(_etale, m) {
  m.doc() = "Finite etale groupoids, their bundles and morphism spaces, and twisted loops";

  // Translators run newest first, so the subclass goes last.
  py::register_exception<Error>(m, "EtaleError", PyExc_RuntimeError);
  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);

  py::class_<FiniteGroupoid, std::shared_ptr<FiniteGroupoid>>(m, "Groupoid")
      .def_property_readonly("num_objects", &FiniteGroupoid::num_objects)
      .def_property_readonly("num_arrows", &FiniteGroupoid::num_arrows)
      .def_property_readonly("object_names", [](const FiniteGroupoid& g) { return g.base.names(); })
      .def_property_readonly("edges", [](const FiniteGroupoid& g) { return g.base.edges(); })
      .def_readonly("src", &FiniteGroupoid::src)
      .def_readonly("tgt", &FiniteGroupoid::tgt)
      .def("compose", &FiniteGroupoid::compose, py::arg("g"), py::arg("h"))
      .def("validate", [](const FiniteGroupoid& g) { return validate_groupoid(g); })
      .def("orbits", [](const FiniteGroupoid& g) { return orbits(g); })
      .def("isotropy_order", [](const FiniteGroupoid& g, ObjectId x) { return isotropy(g, x).group.order(); })
      .def("is_connected", [](const FiniteGroupoid& g) { return is_connected(g); })
      .def("__repr__", [](const FiniteGroupoid& g) {
        return "<Groupoid objects=" + std::to_string(g.num_objects()) + " arrows=" + std::to_string(g.num_arrows()) + ">";
      });

  m.def("load_groupoid", [](const std::string& path) { return std::const_pointer_cast<FiniteGroupoid>(groupoid_of(path)); },
        py::arg("path"), "Groupoid described by a spec file (explicit, action or group kinds).");
  m.def("point_groupoid", [] { return std::const_pointer_cast<FiniteGroupoid>(point_groupoid()); });
  m.def("spec_kind", [](const std::string& path) { return kind_name(load(path).kind); }, py::arg("path"));

  m.def(
      "localize_edges",
      [](const std::shared_ptr<FiniteGroupoid>& g) {
        Localization loc = localize(g, OpenCover::by_edges(g->base));
        return py::make_tuple(std::const_pointer_cast<FiniteGroupoid>(loc.groupoid),
                              is_equivalence_hom(loc.projection).equivalence);
      },
      py::arg("groupoid"), "Localization over the edge cover; returns (groupoid, projection_is_equivalence).");

  m.def(
      "pointed_morphism_count",
      [](const std::shared_ptr<FiniteGroupoid>& g, const std::shared_ptr<FiniteGroupoid>& gp, ObjectId star) {
        return enumerate_pointed_morphisms(g, gp, star).classes.size();
      },
      py::arg("source"), py::arg("target"), py::arg("star"));
  m.def(
      "morphism_groupoid",
      [](const std::shared_ptr<FiniteGroupoid>& g, const std::shared_ptr<FiniteGroupoid>& gp, ObjectId star) {
        return std::const_pointer_cast<FiniteGroupoid>(morphism_groupoid(g, gp, star).groupoid);
      },
      py::arg("source"), py::arg("target"), py::arg("star"));

  m.def(
      "equivariant_pairs",
      [](const std::string& source, const std::string& target) {
        std::vector<std::pair<std::vector<ObjectId>, GroupMap>> out;
        for (const auto& p : enumerate_equivariant_pairs(action_of(source), action_of(target))) out.emplace_back(p.f, p.psi);
        return out;
      },
      py::arg("source"), py::arg("target"), "Pairs (f, psi) between two group-action spec files.");

  m.def(
      "crossed_module",
      [](const std::string& path) {
        SelfEquivalences se = selfequivalence_crossed_module(action_of(path));
        py::dict d;
        d["gamma_order"] = se.module.gamma.order();
        d["s_order"] = se.module.s.order();
        d["mu"] = se.module.mu;
        d["violations"] = validate_crossed_module(se.module);
        return d;
      },
      py::arg("path"), "Crossed module of self-equivalences of a group action.");

  m.def(
      "classify_extensions",
      [](const std::string& quotient, const std::string& kernel, std::optional<std::string> module) {
        FiniteGroup q = group_of(quotient), c = group_of(kernel);
        QModule qm = module ? resolve_module(load(*module), q, c) : QModule{q, c, {}};
        py::list out;
        for (const auto& cls : classify_extensions(qm).classes) {
          py::dict d;
          d["factor_set"] = cls.representative;
          d["order"] = cls.group.order();
          d["abelian"] = cls.group.is_abelian();
          d["table"] = cls.group.table();
          out.append(d);
        }
        return out;
      },
      py::arg("quotient"), py::arg("kernel"), py::arg("module") = py::none(),
      "One entry per extension class of an abelian kernel by the quotient.");

  m.def(
      "seed_loop",
      [](const std::string& geometry, const Mat& linear, const Vec& translation, int samples, std::uint64_t seed,
         double amplitude) {
        return samples_of(seed_loop(geometry_named(geometry), isometry(linear, translation), samples, seed, amplitude));
      },
      py::arg("geometry"), py::arg("linear"), py::arg("translation"), py::arg("samples") = 64, py::arg("seed") = 0,
      py::arg("amplitude") = 0.1);

  m.def(
      "loop_measurements",
      [](const std::string& geometry, const Samples& samples, const Mat& linear, const Vec& translation) {
        LoopMeasurements lm = loop_measurements(loop_from(geometry, samples, linear, translation));
        py::dict d;
        d["energy"] = lm.energy;
        d["length"] = lm.length;
        d["max_gap"] = lm.max_gap;
        return d;
      },
      py::arg("geometry"), py::arg("samples"), py::arg("linear"), py::arg("translation"));

  m.def(
      "energy_gradient",
      [](const std::string& geometry, const Samples& samples, const Mat& linear, const Vec& translation) {
        TwistedLoop l = loop_from(geometry, samples, linear, translation);
        SectionField g = energy_gradient(l);
        l.samples = g.v;
        return samples_of(l);
      },
      py::arg("geometry"), py::arg("samples"), py::arg("linear"), py::arg("translation"));

  m.def(
      "minimize_loop",
      [](const std::string& geometry, const Samples& samples, const Mat& linear, const Vec& translation, long max_iter,
         double grad_tol) {
        TwistedLoop l = loop_from(geometry, samples, linear, translation);
        validate_loop(l);
        MinimizeOptions opts;
        opts.max_iter = max_iter;
        opts.grad_tol = grad_tol;
        MinimizeResult r;
        {
          py::gil_scoped_release release;
          r = minimize_energy(l, opts);
        }
        py::dict d;
        d["samples"] = samples_of(r.loop);
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["degenerate"] = r.degenerate;
        d["length"] = r.measurements.length;
        d["energy"] = r.measurements.energy;
        d["grad_norm"] = r.grad_norm;
        return d;
      },
      py::arg("geometry"), py::arg("samples"), py::arg("linear"), py::arg("translation"),
      py::arg("max_iter") = MinimizeOptions{}.max_iter, py::arg("grad_tol") = MinimizeOptions{}.grad_tol);

  m.def(
      "length_spectrum",
      [](const std::string& path, const std::vector<std::string>& twists, int samples, int seeds, std::uint64_t seed) {
        SpecFile s = load(path);
        if (!s.orbifold) throw Error(path + " does not describe an orbifold");
        const OrbifoldSpec& orb = *s.orbifold;
        IsometryGroup group = enumerate_isometries(orb.geometry, orb.generators, orb.word_bound, orb.names);
        std::vector<IsometryElement> elems;
        for (const auto& w : twists) elems.push_back(parse_word(w, orb.generators, orb.names));
        std::vector<SpectrumRow> rows;
        {
          py::gil_scoped_release release;
          rows = length_spectrum(group, elems, samples, seeds, seed);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["class_word"] = r.class_word;
          d["min_length"] = r.min_length;
          d["iterations"] = r.iterations;
          d["converged"] = r.converged;
          d["degenerate"] = r.degenerate;
          out.append(d);
        }
        return out;
      },
      py::arg("path"), py::arg("twists"), py::arg("samples") = 128, py::arg("seeds") = 1, py::arg("seed") = 0);

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        CommandResult r;
        {
          py::gil_scoped_release release;
          r = run_command(args);
        }
        return py::make_tuple(r.exit_code, r.output, r.error);
      },
      py::arg("args"), "Runs a CLI command in-process; returns (exit_code, output, error).");
}
