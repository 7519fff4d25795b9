#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ct/chordal.hpp"
#include "ct/engine.hpp"
#include "ct/generators.hpp"
#include "ct/graph.hpp"
#include "ct/oracle.hpp"
#include "ct/replay.hpp"

namespace py = pybind11;
using namespace ct;

namespace {

SolveMode mode_from_string(const std::string& mode) {
    if (mode == "auto") return SolveMode::automatic;
    if (mode == "thmA") return SolveMode::thm_a;
    if (mode == "thmB") return SolveMode::thm_b;
    if (mode == "basic") return SolveMode::basic;
    throw ParseError("unknown mode " + mode);
}

py::dict solve_to_dict(const Graph& g, const std::string& mode, bool with_trace) {
    TransversalResult res = solve(g, mode_from_string(mode));
    py::dict out;
    out["red"] = res.red;
    out["size"] = res.red.size();
    out["bound"] = bound(std::max<long long>(res.n, 1));
    out["saved"] = res.saved;
    out["t"] = res.t;
    out["bound_ok"] = res.bound_ok;
    if (with_trace) out["trace"] = trace_to_jsonl(res.trace);
    return out;
}

}  // namespace

PYBIND11_MODULE(ctgraph, m) {
    m.doc() = "clique transversals of 4-chordal graphs, size at most floor(2(n-1)/7)";

    py::register_exception<ParseError>(m, "GraphParseError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<BoundMissError>(m, "BoundMissError", PyExc_RuntimeError);

    py::class_<Graph>(m, "Graph")
        .def(py::init<int, std::vector<std::pair<Vertex, Vertex>>>(), py::arg("n"),
             py::arg("edges"))
        .def_property_readonly("n", &Graph::n)
        .def_property_readonly("m", &Graph::m)
        .def("has_edge", &Graph::has_edge)
        .def("neighbors", &Graph::neighbors)
        .def("edges", &Graph::edges)
        .def("__repr__", [](const Graph& g) {
            return "Graph(n=" + std::to_string(g.n()) + ", m=" + std::to_string(g.m()) + ")";
        });

    m.def("parse_graph", [](const std::string& text) { return parse_graph(text); },
          "parse the text graph format (p/e lines, 1-indexed)");
    m.def("format_graph", &format_graph);

    m.def("bound", [](long long n) { return bound(n); },
          "floor(2(n-1)/7), the guaranteed transversal size for n >= 5");
    m.def("is_four_chordal", &is_four_chordal);
    m.def("is_chordal", [](const Graph& g) { return std::holds_alternative<Peo>(is_chordal(g)); });
    m.def("count_maximal_triangles", &count_maximal_triangles);
    m.def("maximal_cliques", [](const Graph& g) {
        auto chord = is_chordal(g);
        if (auto* peo = std::get_if<Peo>(&chord)) return maximal_cliques(g, *peo);
        return bron_kerbosch(g);
    });

    m.def("solve", &solve_to_dict, py::arg("graph"), py::arg("mode") = "auto",
          py::arg("with_trace") = false,
          "construct a verified clique transversal; dict with red, size, bound, saved, t");
    m.def("is_transversal",
          [](const Graph& g, const std::vector<Vertex>& s) { return is_transversal(g, s); });
    m.def("min_transversal",
          [](const Graph& g, int cap) {
              auto res = min_transversal_exact(g, cap);
              py::dict out;
              out["minimum"] = res.minimum_size;
              out["witness"] = res.witness;
              out["cap_exceeded"] = res.cap_exceeded;
              out["explored"] = res.explored;
              return out;
          },
          py::arg("graph"), py::arg("cap") = 16);
    m.def("replay_verify",
          [](const std::string& trace_text, const Graph& g) -> py::object {
              auto verdict = replay_verify(trace_from_jsonl(trace_text), g);
              if (verdict) return py::str(*verdict);
              return py::none();
          },
          "None when the trace replays cleanly, else the violation message");

    m.def("h_graph", &h_graph, py::arg("k"));
    m.def("lower_bound_graph", &lower_bound_graph, py::arg("n"));
    m.def("complete_graph", &complete_graph, py::arg("n"));
    m.def("random_four_chordal", &random_four_chordal, py::arg("seed"), py::arg("target_nodes"),
          py::arg("max_bag"));
}
