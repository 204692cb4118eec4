#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bimgt/community.hpp"
#include "bimgt/errors.hpp"
#include "bimgt/experiment.hpp"
#include "bimgt/graph.hpp"
#include "bimgt/mia.hpp"
#include "bimgt/rng.hpp"
#include "bimgt/selection.hpp"
#include "bimgt/shapley.hpp"

namespace py = pybind11;
using namespace bimgt;

namespace {

std::vector<NodeId> resolve(const Graph& g, const std::vector<std::string>& labels) {
  std::vector<NodeId> out;
  for (const auto& l : labels) {
    auto u = g.find(l);
    if (!u) throw ValidationError("unknown node '" + l + "'");
    out.push_back(*u);
  }
  return out;
}

std::vector<std::string> labels_of(const Graph& g, const std::vector<NodeId>& ids) {
  std::vector<std::string> out;
  for (auto u : ids) out.push_back(g.label(u));
  return out;
}

CostAssignment to_costs(const Graph& g, const std::vector<std::int64_t>& c) {
  if (c.size() != g.node_count()) throw ValidationError("need one cost per node");
  CostAssignment a;
  a.cost = c;
  a.provenance = CostAssignment::Provenance::kFile;
  return a;
}

py::dict seed_set_dict(const Graph& g, const SeedSet& s) {
  py::dict d;
  d["method"] = std::string(method_name(s.method));
  d["seeds"] = labels_of(g, s.seeds);
  d["total_cost"] = s.total_cost;
  d["budget"] = s.budget;
  d["remaining"] = s.remaining;
  d["spread"] = s.spread;
  return d;
}

}  // namespace

PYBIND11_MODULE(_bimgt, m) {
  m.doc() = "Budgeted influence maximization with Shapley-value seed selection";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<StaleCacheError>(m, "StaleCacheError", PyExc_RuntimeError);
  py::register_exception<ExperimentError>(m, "ExperimentError", PyExc_RuntimeError);

  py::class_<Graph>(m, "Graph")
      .def_static("load", &load_edge_list, py::arg("path"), py::arg("directed") = false)
      .def_static("parse", &parse_edge_list, py::arg("text"), py::arg("directed") = false)
      .def_static(
          "from_edges",
          [](std::size_t n, const std::vector<std::tuple<NodeId, NodeId, double>>& edges, bool directed) {
            std::vector<Edge> e;
            for (auto [u, v, p] : edges) e.push_back({u, v, p});
            return Graph::build(n, e, directed);
          },
          py::arg("node_count"), py::arg("edges"), py::arg("directed") = false)
      .def_property_readonly("node_count", &Graph::node_count)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def_property_readonly("directed", &Graph::directed)
      .def_property_readonly("labels", &Graph::labels)
      .def_property_readonly("fingerprint", &Graph::fingerprint)
      .def("find", &Graph::find)
      .def("degree", &Graph::degree)
      .def("prob", &Graph::prob)
      .def("with_scheme",
           [](const Graph& g, const std::string& scheme, std::uint64_t seed) {
             return assign_probabilities(g, ProbabilityScheme::parse(scheme, seed));
           },
           py::arg("scheme"), py::arg("seed") = 0, "Copy with probabilities from uniform:<p>, trivalency or wc")
      .def("save", &write_edge_list)
      .def("__len__", &Graph::node_count);

  m.def("assign_costs",
        [](const Graph& g, std::int64_t lo, std::int64_t hi, std::uint64_t seed) {
          return assign_costs(g, lo, hi, seed).cost;
        },
        py::arg("graph"), py::arg("lo") = kDefaultCostLo, py::arg("hi") = kDefaultCostHi, py::arg("seed"));

  m.def("max_influence_path",
        [](const Graph& g, const std::string& u, const std::string& v) {
          auto ids = resolve(g, {u, v});
          auto p = max_influence_path(g, ids[0], ids[1]);
          return py::make_tuple(labels_of(g, p.nodes), p.probability);
        });

  py::class_<MiiaCache>(m, "MiiaCache")
      .def_property_readonly("theta", &MiiaCache::theta)
      .def_property_readonly("total_tree_size", &MiiaCache::total_tree_size)
      .def("tree_arcs", [](const MiiaCache& c, const Graph& g, const std::string& root) {
        auto arcs = c.tree(resolve(g, {root})[0]).arcs();
        std::vector<std::pair<std::string, std::string>> out;
        for (auto [a, b] : arcs) out.emplace_back(g.label(a), g.label(b));
        return out;
      });
  m.def("build_miia_cache", &build_miia_cache, py::arg("graph"), py::arg("theta") = kDefaultTheta,
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("sigma",
        [](const Graph& g, const MiiaCache& c, const std::vector<std::string>& seeds, unsigned workers) {
          return sigma(g, c, resolve(g, seeds), workers);
        },
        py::arg("graph"), py::arg("cache"), py::arg("seeds"), py::arg("workers") = 1);

  m.def("marginal_gain_range", [](const Graph& g, const std::string& u) {
    auto r = marginal_gain_range(g, resolve(g, {u})[0]);
    return py::make_tuple(r.lo, r.hi);
  });
  m.def("aggregate_range", &aggregate_range);
  m.def("sample_bound", &sample_bound, py::arg("epsilon"), py::arg("delta"), py::arg("range"));

  m.def("estimate_shapley",
        [](const Graph& g, const MiiaCache& c, double epsilon, double delta, std::optional<std::uint64_t> tau_cap,
           std::optional<std::uint64_t> permutations, std::uint32_t repetitions, std::uint64_t seed,
           unsigned workers) {
          BimGame game(g, c);
          auto plan = permutations ? SamplingPlan::fixed(*permutations, repetitions)
                                   : SamplingPlan::make(epsilon, delta, aggregate_range(g), tau_cap, repetitions);
          py::gil_scoped_release release;
          return estimate_shapley(game, plan, seed, workers).phi;
        },
        py::arg("graph"), py::arg("cache"), py::arg("epsilon") = 0.1, py::arg("delta") = 0.1,
        py::arg("tau_cap") = py::none(), py::arg("permutations") = py::none(), py::arg("repetitions") = 1,
        py::arg("seed") = 1, py::arg("workers") = 1,
        "Shapley values indexed like graph.labels");
  m.def("exact_shapley",
        [](const Graph& g, const MiiaCache& c, std::size_t limit) { return exact_shapley(BimGame(g, c), limit); },
        py::arg("graph"), py::arg("cache"), py::arg("limit") = kDefaultExactLimit);

  m.def("detect_communities",
        [](const Graph& g, std::uint64_t seed, double resolution) {
          auto p = detect_communities(g, seed, resolution);
          py::dict d;
          d["assignment"] = p.assignment;
          d["count"] = p.count();
          d["largest"] = p.largest;
          d["modularity"] = p.modularity;
          return d;
        },
        py::arg("graph"), py::arg("seed") = 1, py::arg("resolution") = 1.0);
  m.def("modularity",
        [](const Graph& g, const std::vector<CommunityId>& assignment, double resolution) {
          return modularity(g, assignment, resolution);
        },
        py::arg("graph"), py::arg("assignment"), py::arg("resolution") = 1.0);
  m.def("clustering_coefficient",
        [](const Graph& g, const std::string& u) { return clustering_coefficient(g, resolve(g, {u})[0]); });

  m.def("select",
        [](const Graph& g, const std::vector<std::int64_t>& costs, double budget, const std::string& method,
           std::optional<std::vector<double>> phi, std::optional<std::vector<CommunityId>> communities,
           std::uint64_t seed) {
          const auto c = to_costs(g, costs);
          const auto which = parse_method(method);
          SeedSet s;
          if (which == Method::kBimgt || which == Method::kBimgtc) {
            if (!phi) throw ValidationError(std::string(method_name(which)) + " needs phi");
            if (which == Method::kBimgt) {
              s = select_bimgt(g, c, budget, *phi);
            } else {
              auto part = communities ? make_partition(g, *communities) : detect_communities(g, seed);
              s = select_bimgtc(g, c, budget, *phi, part);
            }
          } else {
            s = select_baseline(g, c, budget, which, seed);
          }
          return seed_set_dict(g, s);
        },
        py::arg("graph"), py::arg("costs"), py::arg("budget"), py::arg("method"), py::arg("phi") = py::none(),
        py::arg("communities") = py::none(), py::arg("seed") = 0);

  m.def("run_experiment",
        [](const std::string& config_text) {
          auto config = ExperimentConfig::parse(config_text);
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(config);
          }
          py::dict d;
          d["csv"] = format_results(r, ResultFormat::kCsv);
          d["json"] = format_results(r, ResultFormat::kJson);
          d["rows"] = r.rows.size();
          d["shapley_runs"] = r.stats.shapley_runs;
          return d;
        },
        py::arg("config_text"), "Run a sweep from key-value config text; returns CSV and JSON text");
  m.attr("CSV_HEADER") = kCsvHeader;
  m.attr("DEFAULT_THETA") = kDefaultTheta;
}
