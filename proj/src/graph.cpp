#include "bimgt/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bimgt/errors.hpp"
#include "bimgt/rng.hpp"
#include "text.hpp"

namespace bimgt {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
}

}  // namespace

Graph Graph::build(std::size_t node_count, std::span<const Edge> edges, bool directed,
                   std::vector<std::string> labels) {
  Graph g;
  g.directed_ = directed;

  std::vector<Edge> arcs;
  arcs.reserve(directed ? edges.size() : 2 * edges.size());
  for (const auto& e : edges) {
    if (e.from >= node_count || e.to >= node_count) {
      throw DomainError("edge endpoint out of range");
    }
    if (e.from == e.to) continue;
    if (!(e.prob > 0.0 && e.prob <= 1.0)) {
      throw DomainError("edge probability must lie in (0, 1]");
    }
    arcs.push_back(e);
    if (!directed) arcs.push_back({e.to, e.from, e.prob});
  }
  // Stable so that the first occurrence of a duplicate keeps its probability.
  std::stable_sort(arcs.begin(), arcs.end(), [](const Edge& a, const Edge& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  arcs.erase(std::unique(arcs.begin(), arcs.end(),
                         [](const Edge& a, const Edge& b) { return a.from == b.from && a.to == b.to; }),
             arcs.end());
  if (!directed) {
    // An undirected duplicate given in opposite orientation can leave the two
    // arcs with different probabilities; the smaller endpoint's arc wins.
    for (auto& a : arcs) {
      if (a.from > a.to) {
        auto it = std::lower_bound(arcs.begin(), arcs.end(), Edge{a.to, a.from},
                                   [](const Edge& x, const Edge& y) {
                                     return x.from != y.from ? x.from < y.from : x.to < y.to;
                                   });
        a.prob = it->prob;
      }
    }
  }

  g.edge_count_ = directed ? arcs.size() : arcs.size() / 2;
  g.out_offsets_.assign(node_count + 1, 0);
  for (const auto& a : arcs) ++g.out_offsets_[a.from + 1];
  std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
  g.targets_.reserve(arcs.size());
  g.probs_.reserve(arcs.size());
  for (const auto& a : arcs) {
    g.targets_.push_back(a.to);
    g.probs_.push_back(a.prob);
  }

  if (labels.empty()) {
    labels.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) labels.push_back(std::to_string(i));
  } else if (labels.size() != node_count) {
    throw DomainError("label count does not match node count");
  }
  g.labels_ = std::move(labels);
  g.index_.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!g.index_.emplace(g.labels_[i], static_cast<NodeId>(i)).second) {
      throw DomainError("duplicate node label '" + g.labels_[i] + "'");
    }
  }
  g.finalize();
  return g;
}

void Graph::finalize() {
  const auto n = node_count();
  in_offsets_.assign(n + 1, 0);
  for (auto t : targets_) ++in_offsets_[t + 1];
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  sources_.assign(targets_.size(), 0);
  in_arc_ids_.assign(targets_.size(), 0);
  std::vector<ArcId> fill(in_offsets_.begin(), in_offsets_.end() - (n > 0 ? 1 : 0));
  // Sources are visited in increasing order, so in-lists come out sorted.
  for (NodeId u = 0; u < n; ++u) {
    for (ArcId a = out_offsets_[u]; a < out_offsets_[u + 1]; ++a) {
      const auto slot = fill[targets_[a]]++;
      sources_[slot] = u;
      in_arc_ids_[slot] = a;
    }
  }
  max_degree_ = 0;
  for (NodeId u = 0; u < n; ++u) max_degree_ = std::max(max_degree_, out_degree(u));

  std::uint64_t h = kFnvOffset;
  fnv_mix(h, n);
  fnv_mix(h, directed_ ? 1 : 0);
  for (auto o : out_offsets_) fnv_mix(h, o);
  for (auto t : targets_) fnv_mix(h, t);
  for (auto p : probs_) fnv_mix(h, std::bit_cast<std::uint64_t>(p));
  fingerprint_ = h;
}

double Graph::prob(NodeId u, NodeId v) const {
  auto nbrs = out_neighbors(u);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
  if (it == nbrs.end() || *it != v) return 0.0;
  return probs_[out_offsets_[u] + static_cast<ArcId>(it - nbrs.begin())];
}

bool Graph::has_arc(NodeId u, NodeId v) const {
  auto nbrs = out_neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<NodeId> Graph::undirected_neighbors(NodeId u) const {
  auto out = out_neighbors(u);
  if (!directed_) return {out.begin(), out.end()};
  auto in = in_neighbors(u);
  std::vector<NodeId> merged;
  merged.reserve(out.size() + in.size());
  std::set_union(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(merged));
  return merged;
}

std::optional<NodeId> Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Graph Graph::with_probabilities(std::vector<double> probs) const {
  if (probs.size() != probs_.size()) throw DomainError("probability vector size mismatch");
  for (double p : probs) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("edge probability must lie in (0, 1]");
  }
  Graph g = *this;
  g.probs_ = std::move(probs);
  g.finalize();
  return g;
}

// --- edge lists ---------------------------------------------------------------

Graph parse_edge_list(std::string_view text, bool directed) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> ids;
  std::vector<Edge> edges;
  auto intern = [&](std::string_view token) {
    auto [it, inserted] = ids.emplace(std::string(token), static_cast<NodeId>(labels.size()));
    if (inserted) labels.emplace_back(token);
    return it->second;
  };
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') return;
    auto tokens = detail::split_ws(body);
    if (tokens.size() != 2) {
      throw ParseError("line " + std::to_string(line_no) + ": expected two node identifiers, got " +
                       std::to_string(tokens.size()) + " tokens");
    }
    const auto u = intern(tokens[0]);
    const auto v = intern(tokens[1]);
    edges.push_back({u, v, 1.0});
  });
  const auto n = labels.size();
  return Graph::build(n, edges, directed, std::move(labels));
}

Graph load_edge_list(const std::filesystem::path& path, bool directed) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const std::runtime_error& e) {
    throw ParseError(e.what());
  }
  try {
    return parse_edge_list(text, directed);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_edge_list(const Graph& graph, const std::filesystem::path& path) {
  std::string out;
  out += graph.directed() ? "# directed\n" : "# undirected\n";
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (graph.out_degree(u) == 0 && graph.in_degree(u) == 0) {
      out += graph.label(u) + ' ' + graph.label(u) + '\n';
      continue;
    }
    for (auto v : graph.out_neighbors(u)) {
      if (!graph.directed() && v < u) continue;
      out += graph.label(u) + ' ' + graph.label(v) + '\n';
    }
  }
  detail::write_file(path, out);
}

// --- probabilities ---------------------------------------------------------------

ProbabilityScheme ProbabilityScheme::parse(std::string_view text, std::uint64_t seed) {
  ProbabilityScheme s;
  s.seed = seed;
  text = detail::trim(text);
  if (text == "trivalency") {
    s.kind = Kind::kTrivalency;
  } else if (text == "wc" || text == "weighted-cascade") {
    s.kind = Kind::kWeightedCascade;
  } else if (text.starts_with("uniform:")) {
    auto p = detail::parse_number<double>(text.substr(8));
    if (!p) throw ValidationError("bad uniform probability in '" + std::string(text) + "'");
    s.kind = Kind::kUniform;
    s.uniform_p = *p;
  } else {
    throw ValidationError("unknown probability scheme '" + std::string(text) + "'");
  }
  s.validate();
  return s;
}

std::string ProbabilityScheme::name() const {
  switch (kind) {
    case Kind::kUniform: return "uniform:" + detail::format_double(uniform_p);
    case Kind::kTrivalency: return "trivalency";
    case Kind::kWeightedCascade: return "wc";
  }
  return {};
}

void ProbabilityScheme::validate() const {
  if (kind == Kind::kUniform && !(uniform_p > 0.0 && uniform_p <= 1.0)) {
    throw ValidationError("uniform probability must lie in (0, 1]");
  }
}

Graph assign_probabilities(const Graph& graph, const ProbabilityScheme& scheme) {
  scheme.validate();
  std::vector<double> probs(graph.arc_count());
  switch (scheme.kind) {
    case ProbabilityScheme::Kind::kUniform:
      std::fill(probs.begin(), probs.end(), scheme.uniform_p);
      break;
    case ProbabilityScheme::Kind::kTrivalency: {
      Rng rng(scheme.seed);
      auto arc_of = [&](NodeId u, NodeId v) {
        auto nbrs = graph.out_neighbors(u);
        return graph.first_out_arc(u) +
               static_cast<ArcId>(std::lower_bound(nbrs.begin(), nbrs.end(), v) - nbrs.begin());
      };
      for (NodeId u = 0; u < graph.node_count(); ++u) {
        auto nbrs = graph.out_neighbors(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
          const auto a = graph.first_out_arc(u) + static_cast<ArcId>(i);
          // The reverse arc of an undirected edge was drawn when its smaller
          // endpoint was visited.
          probs[a] = (!graph.directed() && nbrs[i] < u) ? probs[arc_of(nbrs[i], u)]
                                                        : kTrivalencyLevels[rng.below(3)];
        }
      }
      break;
    }
    case ProbabilityScheme::Kind::kWeightedCascade:
      for (NodeId u = 0; u < graph.node_count(); ++u) {
        auto nbrs = graph.out_neighbors(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
          probs[graph.first_out_arc(u) + i] = 1.0 / static_cast<double>(graph.in_degree(nbrs[i]));
        }
      }
      break;
  }
  return graph.with_probabilities(std::move(probs));
}

// --- costs ---------------------------------------------------------------------

CostAssignment assign_costs(const Graph& graph, std::int64_t lo, std::int64_t hi,
                            std::uint64_t seed) {
  if (lo < 1 || hi < lo) throw DomainError("cost interval must satisfy 1 <= lo <= hi");
  CostAssignment c;
  c.provenance = CostAssignment::Provenance::kGenerated;
  c.lo = lo;
  c.hi = hi;
  c.seed = seed;
  c.cost.resize(graph.node_count());
  Rng rng(seed);
  for (auto& x : c.cost) x = rng.between(lo, hi);
  return c;
}

CostAssignment parse_costs(const Graph& graph, std::string_view text) {
  CostAssignment c;
  c.provenance = CostAssignment::Provenance::kFile;
  c.cost.assign(graph.node_count(), 0);
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') return;
    auto fields = detail::split(body, ',');
    if (fields.size() != 2) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'identifier,cost'");
    }
    const auto id = detail::trim(fields[0]);
    auto node = graph.find(id);
    if (!node) {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown node '" +
                            std::string(id) + "'");
    }
    auto value = detail::parse_number<std::int64_t>(fields[1]);
    if (!value) throw ParseError("line " + std::to_string(line_no) + ": cost is not an integer");
    if (*value < 1) {
      throw ValidationError("node '" + std::string(id) + "' has non-positive cost " +
                            std::to_string(*value));
    }
    c.cost[*node] = *value;
  });
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (c.cost[u] == 0) throw ValidationError("node '" + graph.label(u) + "' has no cost entry");
  }
  if (!c.cost.empty()) {
    c.lo = *std::min_element(c.cost.begin(), c.cost.end());
    c.hi = *std::max_element(c.cost.begin(), c.cost.end());
  }
  return c;
}

CostAssignment load_costs(const Graph& graph, const std::filesystem::path& path) {
  auto c = parse_costs(graph, detail::read_file(path));
  c.source = path.string();
  return c;
}

void write_costs(const Graph& graph, const CostAssignment& costs, const std::filesystem::path& path) {
  std::string out;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    out += graph.label(u) + ',' + std::to_string(costs[u]) + '\n';
  }
  detail::write_file(path, out);
}

}  // namespace bimgt
