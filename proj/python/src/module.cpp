#include "parabest/checks.hpp"
#include "parabest/errors.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace parabest;

namespace {

py::dict preset_dict(const RunPreset &p) {
  py::dict d;
  d["name"] = p.name;
  d["problem"] = to_string(p.problem);
  d["degree"] = p.degree;
  d["k"] = p.k;
  d["h0"] = p.h1;
  d["tau0"] = p.tau1;
  d["runs"] = p.runs;
  return d;
}

py::dict run_dict(const RunResult &r) {
  const RunRow f = r.final_row();
  py::dict d;
  d["run"] = r.run;
  d["h"] = r.h;
  d["tau"] = r.tau;
  d["steps"] = r.steps;
  d["elements"] = r.elements;
  d["dofs"] = r.dofs;
  d["seconds"] = r.seconds;
  d["max_pointwise_defect"] = r.max_pointwise_defect;
  d["max_elliptic_agreement"] = r.max_elliptic_agreement;
  d["eff_LinfL2"] = py::make_tuple(r.min_eff_LinfL2, r.max_eff_LinfL2);
  d["eff_L2H1"] = py::make_tuple(r.min_eff_L2H1, r.max_eff_L2H1);
  d["err_LinfL2"] = f.err.LinfL2;
  d["err_L2H1"] = f.err.L2H1;
  d["err_LinfH1"] = f.err.LinfH1;
  d["err_H1L2"] = f.err.H1L2;
  d["total_32"] = f.est.total_32;
  d["total_33"] = f.est.total_33;
  d["high_total_H1L2"] = f.est.high_total_H1L2;
  d["high_total_LinfH1"] = f.est.high_total_LinfH1;
  return d;
}

RunPreset resolve(const std::string &name, const py::dict &overrides) {
  RunPreset p = preset(name);
  for (const auto &[k, v] : overrides) {
    const auto key = k.cast<std::string>();
    if (key == "problem")
      p.problem = parse_problem(v.cast<std::string>());
    else if (key == "degree")
      p.degree = v.cast<int>();
    else if (key == "k")
      p.k = v.cast<int>();
    else if (key == "h0")
      p.h1 = v.cast<double>();
    else if (key == "tau0")
      p.tau1 = v.cast<double>();
    else if (key == "runs")
      p.runs = v.cast<int>();
    else
      throw InvalidArgument("unknown preset field '" + key + "'");
  }
  return p;
}

} // namespace

PYBIND11_MODULE(_parabest, m) {
  m.doc() = "Backward Euler heat solver with a posteriori estimators";
  m.attr("__version__") = "0.1.0";

  py::register_exception<IncompatibleMeshes>(m, "IncompatibleMeshes", PyExc_ValueError);

  m.def("preset_names", &preset_names);
  m.def("preset", [](const std::string &name) { return preset_dict(preset(name)); }, py::arg("name"));
  m.def("eoc", &eoc, py::arg("values"), py::arg("hs"));

  m.def(
      "run_preset",
      [](const std::string &name, const py::dict &overrides, int jobs, bool rows) {
        RunConfig c;
        c.preset = resolve(name, overrides);
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_preset(c, jobs);
        }
        py::dict out;
        out["preset"] = preset_dict(c.preset);
        py::list runs;
        for (const auto &run : r.runs)
          runs.append(run_dict(run));
        out["runs"] = runs;
        py::dict eocs;
        for (const auto &[k, v] : r.eocs)
          eocs[py::str(k)] = v;
        out["eoc"] = eocs;
        if (rows) {
          std::ostringstream os;
          write_rows_csv(os, r);
          out["rows_csv"] = os.str();
        }
        return out;
      },
      py::arg("name") = "1", py::arg("overrides") = py::dict(), py::arg("jobs") = 1, py::arg("rows") = false);

  m.def("run_checks", [] {
    std::vector<CheckResult> results;
    {
      py::gil_scoped_release release;
      results = run_all_checks();
    }
    py::list out;
    for (const auto &c : results) {
      py::dict d;
      d["name"] = c.name;
      d["passed"] = c.passed;
      d["measured"] = c.measured;
      d["threshold"] = c.threshold;
      d["detail"] = c.detail;
      out.append(d);
    }
    return out;
  });

  py::class_<Triangulation>(m, "Mesh")
      .def_property_readonly("element_count", &Triangulation::element_count)
      .def_property_readonly("vertex_count", &Triangulation::vertex_count)
      .def_property_readonly("edge_count", &Triangulation::edge_count)
      .def("vertices",
           [](const Triangulation &t) {
             std::vector<std::pair<double, double>> v;
             for (int i = 0; i < t.vertex_count(); ++i)
               v.emplace_back(t.vertex(i).x, t.vertex(i).y);
             return v;
           })
      .def("elements",
           [](const Triangulation &t) {
             std::vector<std::array<int, 3>> e;
             for (int i = 0; i < t.element_count(); ++i)
               e.push_back(t.element_vertices(i));
             return e;
           })
      .def("meshsize", [](const Triangulation &t) { return meshsize(t); })
      .def("refine", [](const Triangulation &t, int levels) { return uniform_refine(t, levels); },
           py::arg("levels") = 1)
      .def("bisect", [](const Triangulation &t, const std::vector<int> &marked) { return bisect_marked(t, marked); })
      .def("refines", [](const Triangulation &fine, const Triangulation &coarse) { return refines(fine, coarse); })
      .def("__eq__", [](const Triangulation &a, const Triangulation &b) { return a == b; });

  m.def("macro_square", &build_macro_square, py::arg("subdivisions") = 1);
  m.def("common_refinement", &coarsest_common_refinement);
  m.def("common_coarsening", &finest_common_coarsening);
}
