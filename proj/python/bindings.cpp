#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "sagsim/graph.hpp"
#include "sagsim/harness.hpp"
#include "sagsim/verify.hpp"

namespace py = pybind11;
using namespace sagsim;

namespace {

OverflowPolicy parse_overflow(const std::string& s) {
  if (s == "shrink") return OverflowPolicy::shrink;
  if (s == "abort") return OverflowPolicy::abort;
  throw ConfigError("unknown overflow policy '" + s + "' (shrink, abort)");
}

py::dict verdict_dict(const Verdict& v) {
  py::dict d;
  d["check"] = v.check;
  d["pass"] = v.pass;
  d["witness"] = v.witness;
  d["measured"] = v.measured;
  d["bound"] = v.bound;
  d["detail"] = v.detail;
  return d;
}

// Returns the run record as JSON text; the Python side decodes it.
std::string run_json(const Graph& g, const std::string& algo, const std::string& engine, std::optional<int> beta,
                     double epsilon, const std::string& memory, std::uint64_t seed,
                     std::optional<double> f, std::optional<int> ell, const std::string& overflow,
                     bool direct_only, bool emit_set, const std::string& label) {
  RunConfig cfg;
  cfg.algorithm = parse_algorithm(algo);
  if (cfg.algorithm == Algorithm::beta_ruling_set) {
    cfg.beta = beta.value_or(2);
    if (cfg.beta < 2) throw ConfigError("beta must be at least 2");
  } else {
    if (beta) throw ConfigError("beta applies only to brs");
    cfg.beta = cfg.algorithm == Algorithm::two_ruling_set ? 2 : 1;
  }
  cfg.options.engine.engine = parse_engine(engine);
  cfg.options.engine.epsilon = epsilon;
  cfg.options.engine.memory = parse_memory_mode(memory);
  cfg.options.engine.force_ell = ell;
  cfg.options.engine.overflow = parse_overflow(overflow);
  cfg.options.engine.direct_only = direct_only;
  cfg.options.seed = seed;
  cfg.options.f = f;
  cfg.graph = label;

  RunRecord rec;
  rec.config = cfg;
  rec.graph = graph_stats(g);
  rec.emit_set = emit_set;
  {
    py::gil_scoped_release release;
    const auto t0 = std::chrono::steady_clock::now();
    rec.result = execute(g, cfg);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return rec.to_json(-1);
}

}  // namespace

PYBIND11_MODULE(_sagsim, m) {
  m.doc() = "Ruling-set simulator core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ExecutionError>(m, "ExecutionError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());

  py::class_<Graph>(m, "Graph")
      .def(py::init<>())
      .def_static("from_edges", &Graph::from_edges, py::arg("n"), py::arg("edges"))
      .def_static(
          "generate",
          [](const std::string& model, std::size_t n, double p, std::size_t d, std::size_t k,
             std::uint64_t seed) {
            GenParams gp;
            gp.n = n;
            gp.p = p;
            gp.d = d;
            gp.k = k;
            return gen_graph(parse_graph_model(model), gp, seed);
          },
          py::arg("model"), py::arg("n"), py::arg("p") = 0.0, py::arg("d") = 0, py::arg("k") = 0,
          py::arg("seed") = 1)
      .def_static("load", [](const std::string& path) { return load_graph(path); }, py::arg("path"))
      .def("save", [](const Graph& g, const std::string& path) { save_graph(g, path); }, py::arg("path"))
      .def_property_readonly("n", &Graph::num_nodes)
      .def_property_readonly("m", &Graph::num_edges)
      .def_property_readonly("max_degree", &Graph::max_degree)
      .def("degree", &Graph::degree)
      .def("neighbors",
           [](const Graph& g, NodeId v) {
             if (v >= g.num_nodes()) throw py::index_error("node out of range");
             auto s = g.neighbors(v);
             return std::vector<NodeId>(s.begin(), s.end());
           })
      .def("has_edge", &Graph::has_edge)
      .def("edges", &Graph::edges)
      .def("stats",
           [](const Graph& g) {
             const GraphStats s = graph_stats(g);
             py::dict d;
             d["n"] = s.n;
             d["m"] = s.m;
             d["max_degree"] = s.max_degree;
             d["components"] = s.components;
             d["degree_histogram"] = s.degree_histogram;
             return d;
           })
      .def(py::self == py::self)
      .def("__len__", &Graph::num_nodes)
      .def("__repr__", [](const Graph& g) {
        return "Graph(n=" + std::to_string(g.num_nodes()) + ", m=" + std::to_string(g.num_edges()) + ")";
      });

  m.def("_run_json", &run_json, py::arg("graph"), py::arg("algo"), py::arg("engine"), py::arg("beta"),
        py::arg("epsilon"), py::arg("memory"), py::arg("seed"), py::arg("f"), py::arg("ell"),
        py::arg("overflow"), py::arg("direct_only"), py::arg("emit_set"), py::arg("label"));

  m.def("verify_independent",
        [](const Graph& g, const std::vector<NodeId>& s) { return verdict_dict(verify_independent(g, s)); },
        py::arg("graph"), py::arg("nodes"));
  m.def("verify_domination",
        [](const Graph& g, const std::vector<NodeId>& s, int beta) {
          return verdict_dict(verify_domination(g, s, beta));
        },
        py::arg("graph"), py::arg("nodes"), py::arg("beta"));
  m.def("verify_maximal_independent",
        [](const Graph& g, const std::vector<NodeId>& s) {
          return verdict_dict(verify_maximal_independent(g, s));
        },
        py::arg("graph"), py::arg("nodes"));
  m.def("sparsify_degree_bound", &sparsify_degree_bound, py::arg("f"), py::arg("c"), py::arg("n"));

  m.attr("RUN_SCHEMA") = kRunSchemaVersion;
}
