#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ohmgrad/circuit.hpp"
#include "ohmgrad/error.hpp"
#include "ohmgrad/gradients.hpp"
#include "ohmgrad/graph.hpp"
#include "ohmgrad/topology.hpp"

namespace py = pybind11;
using namespace ohmgrad;

namespace {

py::dict estimate_dict(const GradientEstimate& g) {
  py::dict d;
  d["g"] = g.g;
  d["estimator"] = to_string(g.estimator);
  d["beta"] = g.beta;
  d["i_free"] = g.i_free;
  d["prediction"] = g.prediction;
  d["loss"] = g.loss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ohmgrad, m) {
  m.doc() = "Resistor-network simulator with projector and two-phase gradients";

  py::register_exception<Error>(m, "OhmgradError", PyExc_RuntimeError);

  py::class_<CircuitGraph>(m, "CircuitGraph")
      .def(py::init([](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
             std::vector<Edge> es;
             for (const auto& [t, h] : edges) es.push_back({t, h});
             return CircuitGraph(n, std::move(es));
           }),
           py::arg("num_nodes"), py::arg("edges"))
      .def_property_readonly("num_nodes", &CircuitGraph::num_nodes)
      .def_property_readonly("num_edges", &CircuitGraph::num_edges)
      .def_property_readonly("num_cycles", &CircuitGraph::num_cycles)
      .def_property_readonly("edges",
                             [](const CircuitGraph& g) {
                               std::vector<std::pair<std::size_t, std::size_t>> out;
                               for (const auto& e : g.edges()) out.emplace_back(e.tail, e.head);
                               return out;
                             })
      .def("incidence", &CircuitGraph::incidence);

  m.def("grid_graph", &grid_graph, py::arg("rows"), py::arg("cols"));
  m.def(
      "cycle_matrix", [](const CircuitGraph& g) { return fundamental_cycle_matrix(g).A; }, py::arg("graph"));

  py::class_<Selectors>(m, "Selectors")
      .def_property_readonly("input", &Selectors::input)
      .def_property_readonly("output", &Selectors::output)
      .def("input_matrix", &Selectors::input_matrix)
      .def("output_matrix", &Selectors::output_matrix);
  m.def("make_selectors", &make_selectors, py::arg("graph"), py::arg("input"), py::arg("output"));
  m.def("choose_io_edges", &choose_io_edges, py::arg("graph"), py::arg("n_in"), py::arg("n_out"), py::arg("seed"));

  py::class_<Circuit>(m, "Circuit")
      .def(py::init([](const CircuitGraph& g, const Eigen::VectorXd& r, double r_min, double r_max) {
             return Circuit(g, r, ResistanceBounds{r_min, r_max});
           }),
           py::arg("graph"), py::arg("r"), py::arg("r_min") = 0.1, py::arg("r_max") = 10.0)
      .def_property_readonly("resistances", &Circuit::resistances)
      .def_property_readonly("projector", &Circuit::projector)
      .def("current_response", &Circuit::current_response)
      .def("set_resistances", &Circuit::set_resistances, py::arg("r"));

  m.def(
      "solve", [](const Circuit& c, const Eigen::VectorXd& s) {
        const SteadyState st = solve_voltage_mode(c, s);
        return py::make_tuple(st.v, st.i);
      },
      py::arg("circuit"), py::arg("s"), "Voltage-mode solve; returns (v, i).");
  m.def(
      "io_map", [](const Circuit& c, const Selectors& s, double gamma) { return io_map(c, s, gamma).W; },
      py::arg("circuit"), py::arg("selectors"), py::arg("gamma") = 1.0);
  m.def(
      "analytical_gradient",
      [](const Circuit& c, const Selectors& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
        return estimate_dict(analytical_gradient_ls(c, s, x, y, gamma));
      },
      py::arg("circuit"), py::arg("selectors"), py::arg("x"), py::arg("y"), py::arg("gamma") = 1.0);
  m.def(
      "two_phase_gradient",
      [](const Circuit& c, const Selectors& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma,
         double beta) { return estimate_dict(two_phase_gradient(c, s, x, y, gamma, beta)); },
      py::arg("circuit"), py::arg("selectors"), py::arg("x"), py::arg("y"), py::arg("gamma") = 1.0,
      py::arg("beta") = 0.3);
  m.def(
      "two_phase_limit",
      [](const Circuit& c, const Selectors& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
        return estimate_dict(two_phase_limit(c, s, x, y, gamma));
      },
      py::arg("circuit"), py::arg("selectors"), py::arg("x"), py::arg("y"), py::arg("gamma") = 1.0);
  m.def(
      "hinge_subgradient",
      [](const Circuit& c, const Selectors& s, const Eigen::VectorXd& x, int label, double gamma) {
        return estimate_dict(hinge_subgradient(c, s, x, label, gamma));
      },
      py::arg("circuit"), py::arg("selectors"), py::arg("x"), py::arg("label"), py::arg("gamma") = 1.0);
  m.def(
      "nanowire_graph",
      [](std::size_t n, double l, std::uint64_t seed) { return generate_nanowire_network(n, l, seed).graph; },
      py::arg("n"), py::arg("l"), py::arg("seed"));
}
