#include "gridfeas/errors.hpp"
#include "gridfeas/feasibility.hpp"
#include "gridfeas/grid.hpp"
#include "gridfeas/powerflow.hpp"
#include "gridfeas/report.hpp"
#include "gridfeas/specmat.hpp"
#include "gridfeas/stability.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gridfeas;

namespace {

// JSON documents cross the boundary as text; the Python layer decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

DemandVector demand_arg(const VectorXd& v) { return DemandVector(v); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feasibility and stability of DC grids with constant power loads";

  // Module-lifetime class object; carries the error code as `code`.
  static PyObject* grid_error = py::exception<Error>(m, "GridfeasError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(grid_error)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(grid_error, exc.ptr());
    }
  });

  py::class_<GridModel>(m, "GridModel")
      .def_property_readonly("load_count", &GridModel::load_count)
      .def_property_readonly("source_count", &GridModel::source_count)
      .def_property_readonly("kirchhoff", &GridModel::kirchhoff)
      .def_property_readonly("y_ll", &GridModel::y_ll)
      .def_property_readonly("y_ls", &GridModel::y_ls)
      .def_property_readonly("y_ss", &GridModel::y_ss)
      .def_property_readonly("source_voltages", &GridModel::source_voltages)
      .def_property_readonly("v_star", &GridModel::open_circuit_voltages)
      .def_property_readonly("i_star", &GridModel::source_currents)
      .def_property_readonly("load_ids", &GridModel::load_ids)
      .def_property_readonly("source_ids", &GridModel::source_ids)
      .def_property_readonly("load_components", &GridModel::load_components)
      .def("spec_json", [](const GridModel& g) { return dump(grid_spec_to_json(g.spec())); });

  m.def(
      "load_grid",
      [](const std::string& path, bool allow_reducible) {
        return build_model(load_grid_file(path), {.allow_reducible_loads = allow_reducible});
      },
      py::arg("path"), py::arg("allow_reducible") = false);
  m.def(
      "grid_from_json",
      [](const std::string& text, bool allow_reducible) {
        return build_model(grid_spec_from_json(nlohmann::json::parse(text)), {.allow_reducible_loads = allow_reducible});
      },
      py::arg("text"), py::arg("allow_reducible") = false);

  m.def("demand_of", [](const GridModel& g, const VectorXd& v) {
    return powerflow::demand_of(g, v, powerflow::Positivity::Unrestricted).values();
  });
  m.def("jacobian", &powerflow::jacobian);
  m.def("p_max", [](const GridModel& g) {
    auto pm = powerflow::p_max(g);
    return py::make_tuple(pm.demand.values(), pm.voltage);
  });
  m.def("dissipation", [](const GridModel& g, const VectorXd& v) {
    auto d = powerflow::dissipation(g, v);
    return py::make_tuple(d.full, d.reduced);
  });
  m.def("solve_single_load", &powerflow::solve_single_load);
  m.def("enumerate_solutions",
        [](const GridModel& g, const VectorXd& p) { return powerflow::enumerate_solutions(g, demand_arg(p)); });

  m.def(
      "classify_point",
      [](const GridModel& g, const VectorXd& v, double tol) {
        return std::string(to_string(stability::classify_point(g, v, tol)));
      },
      py::arg("grid"), py::arg("voltage"), py::arg("tol") = 1e-9);
  m.def("param_to_voltage", [](const GridModel& g, const VectorXd& lambda, double r) {
    return stability::param_to_voltage(g, {lambda, r});
  });
  m.def("voltage_to_param", [](const GridModel& g, const VectorXd& v) {
    auto p = stability::voltage_to_param(g, v);
    return py::make_tuple(p.lambda, p.r);
  });
  m.def("phi", &stability::phi);
  m.def("h_of", &stability::h_of);
  m.def("perron", [](const MatrixXd& a) {
    auto d = specmat::perron(a);
    return py::make_tuple(d.root, d.vector);
  });

  m.def("halfspace_value", [](const GridModel& g, const VectorXd& lambda) {
    auto c = feasibility::halfspace_value(g, lambda);
    return py::make_tuple(c.s, c.support.values());
  });
  m.def("assemble_lmi", [](const GridModel& g, const VectorXd& nu, const VectorXd& p) {
    return dump(report::to_json(feasibility::assemble_lmi(g, nu, demand_arg(p))));
  });
  m.def("solve_json", [](const GridModel& g, const VectorXd& p) {
    return dump(report::to_json(feasibility::solve_operating_point(g, demand_arg(p)).verdict));
  });
  m.def(
      "analyze_json",
      [](const GridModel& g, const VectorXd& p, double tol, bool trace, bool oracle) {
        return dump(report::to_json(report::analyze(g, demand_arg(p), {tol, trace, oracle})));
      },
      py::arg("grid"), py::arg("demand"), py::arg("tol") = 1e-9, py::arg("trace") = false, py::arg("oracle") = false);
  m.def("certify_json", [](const GridModel& g, const VectorXd& p) -> std::optional<std::string> {
    auto lmi = feasibility::certify_infeasible(g, demand_arg(p));
    if (!lmi) return std::nullopt;
    return dump(report::to_json(*lmi));
  });
  m.def("ray_boundary", [](const GridModel& g, const VectorXd& direction) {
    auto c = feasibility::ray_boundary(g, direction);
    return py::make_tuple(c.t_star, c.demand.values(), c.voltage, c.lambda);
  });
  m.def(
      "boundary_json",
      [](const GridModel& g, int rays, int tails) {
        feasibility::ScanOptions opt;
        opt.tail_rays = tails;
        std::vector<feasibility::BoundaryVertex> vertices;
        {
          py::gil_scoped_release release;
          vertices = feasibility::boundary_scan(g, rays, opt);
        }
        return dump(report::boundary_json(vertices));
      },
      py::arg("grid"), py::arg("rays") = 256, py::arg("tails") = 0);
  m.def("verify_report", [](const std::string& text) {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (auto& c : report::verify_report(nlohmann::json::parse(text))) out.emplace_back(c.name, c.passed, c.detail);
    return out;
  });
}
