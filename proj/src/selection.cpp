#include "bimgt/selection.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "bimgt/errors.hpp"
#include "bimgt/rng.hpp"
#include "text.hpp"

namespace bimgt {
namespace {

std::vector<NodeId> by_descending(std::span<const double> score, std::span<const NodeId> nodes) {
  std::vector<NodeId> order(nodes.begin(), nodes.end());
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return score[a] != score[b] ? score[a] > score[b] : a < b;
  });
  return order;
}

std::vector<NodeId> all_nodes(const Graph& graph) {
  std::vector<NodeId> v(graph.node_count());
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

void check_inputs(const Graph& graph, const CostAssignment& costs, double budget) {
  if (costs.size() != graph.node_count()) throw DomainError("cost vector size mismatch");
  if (!(budget >= 0.0)) throw DomainError("budget must be non-negative");
}

void take(SeedSet& set, NodeId u, std::int64_t cost) {
  set.seeds.push_back(u);
  set.total_cost += cost;
}

void check_feasible(const SeedSet& set) {
  if (static_cast<double>(set.total_cost) > set.budget) {
    throw std::logic_error("seed selection exceeded its budget");
  }
}

/// Single descending pass over a metric, taking every affordable node.
SeedSet select_by_metric(const Graph& graph, const CostAssignment& costs, double budget,
                         std::span<const double> metric, Method method) {
  SeedSet set;
  set.method = method;
  set.budget = budget;
  double remaining = budget;
  for (auto u : by_descending(metric, all_nodes(graph))) {
    const auto c = costs[u];
    if (static_cast<double>(c) <= remaining) {
      take(set, u, c);
      remaining -= static_cast<double>(c);
    }
  }
  set.remaining = remaining;
  check_feasible(set);
  return set;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kBimgt: return "BIMGT";
    case Method::kBimgtc: return "BIMGTC";
    case Method::kRand: return "RAND";
    case Method::kMdh: return "MDH";
    case Method::kMcch: return "MCCH";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string upper(detail::trim(name));
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto m : {Method::kBimgt, Method::kBimgtc, Method::kRand, Method::kMdh, Method::kMcch}) {
    if (upper == method_name(m)) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

SeedSet select_bimgt(const Graph& graph, const CostAssignment& costs, double budget,
                     std::span<const double> phi) {
  check_inputs(graph, costs, budget);
  if (phi.size() != graph.node_count()) throw DomainError("Shapley vector size mismatch");
  SeedSet set;
  set.method = Method::kBimgt;
  set.budget = budget;
  std::vector<std::uint8_t> eligible(graph.node_count(), 1);
  double remaining = budget;
  for (auto u : by_descending(phi, all_nodes(graph))) {
    if (!eligible[u]) continue;
    const auto c = costs[u];
    if (static_cast<double>(c) > remaining) continue;
    take(set, u, c);
    remaining -= static_cast<double>(c);
    for (auto v : graph.out_neighbors(u)) eligible[v] = 0;
  }
  set.remaining = remaining;
  check_feasible(set);
  return set;
}

BudgetAllocation allocate_budget(const CommunityPartition& partition, double budget,
                                 std::span<const double> phi) {
  if (phi.size() != partition.assignment.size()) throw DomainError("Shapley vector size mismatch");
  BudgetAllocation alloc;
  alloc.total = budget;
  const auto count = partition.count();
  std::vector<double> mass(count, 0.0);
  double total = 0.0;
  for (std::size_t u = 0; u < phi.size(); ++u) {
    mass[partition.assignment[u]] += phi[u];
    total += phi[u];
  }
  alloc.share.resize(count);
  for (std::size_t c = 0; c < count; ++c) {
    alloc.share[c] = total > 0.0
                         ? budget * mass[c] / total
                         : budget * static_cast<double>(partition.members[c].size()) /
                               static_cast<double>(phi.size());
  }
  alloc.order.resize(count);
  std::iota(alloc.order.begin(), alloc.order.end(), CommunityId{0});
  std::stable_sort(alloc.order.begin(), alloc.order.end(), [&](CommunityId a, CommunityId b) {
    const auto sa = partition.members[a].size();
    const auto sb = partition.members[b].size();
    return sa != sb ? sa > sb : a < b;
  });
  auto it = std::find(alloc.order.begin(), alloc.order.end(), partition.largest);
  std::rotate(it, it + 1, alloc.order.end());
  return alloc;
}

SeedSet select_bimgtc(const Graph& graph, const CostAssignment& costs, double budget,
                      std::span<const double> phi, const CommunityPartition& partition) {
  check_inputs(graph, costs, budget);
  if (partition.assignment.size() != graph.node_count()) {
    throw DomainError("partition does not cover every node");
  }
  auto alloc = allocate_budget(partition, budget, phi);
  SeedSet set;
  set.method = Method::kBimgtc;
  set.budget = budget;
  auto share = alloc.share;
  for (auto c : alloc.order) {
    double& remaining = share[c];
    for (auto u : by_descending(phi, partition.members[c])) {
      const auto cost = costs[u];
      if (static_cast<double>(cost) <= remaining) {
        take(set, u, cost);
        remaining -= static_cast<double>(cost);
      }
    }
    if (c != partition.largest) {
      share[partition.largest] += remaining;
      remaining = 0.0;
    }
  }
  set.remaining = share[partition.largest];
  check_feasible(set);
  return set;
}

double clustering_coefficient(const Graph& graph, NodeId u) {
  if (u >= graph.node_count()) throw DomainError("node out of range");
  const auto nbrs = graph.undirected_neighbors(u);
  const auto d = nbrs.size();
  if (d <= 1) return 0.0;
  std::size_t links = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const auto a = nbrs[i];
    for (std::size_t j = i + 1; j < d; ++j) {
      const auto b = nbrs[j];
      if (graph.has_arc(a, b) || (graph.directed() && graph.has_arc(b, a))) ++links;
    }
  }
  return 2.0 * static_cast<double>(links) / (static_cast<double>(d) * static_cast<double>(d - 1));
}

SeedSet select_baseline(const Graph& graph, const CostAssignment& costs, double budget,
                        Method method, std::uint64_t rng_seed) {
  check_inputs(graph, costs, budget);
  const auto n = graph.node_count();
  switch (method) {
    case Method::kMdh: {
      std::vector<double> degree(n);
      for (NodeId u = 0; u < n; ++u) degree[u] = static_cast<double>(graph.degree(u));
      return select_by_metric(graph, costs, budget, degree, method);
    }
    case Method::kMcch: {
      std::vector<double> cc(n);
      for (NodeId u = 0; u < n; ++u) cc[u] = clustering_coefficient(graph, u);
      return select_by_metric(graph, costs, budget, cc, method);
    }
    case Method::kRand: break;
    default: throw DomainError("not a baseline method");
  }

  SeedSet set;
  set.method = Method::kRand;
  set.budget = budget;
  double remaining = budget;
  Rng rng(rng_seed);
  auto pool = all_nodes(graph);
  auto cheapest = [&] {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (auto u : pool) best = std::min(best, costs[u]);
    return best;
  };
  std::size_t misses = 0;
  auto min_cost = cheapest();
  while (!pool.empty() && static_cast<double>(min_cost) <= remaining && misses < n) {
    const auto k = static_cast<std::size_t>(rng.below(pool.size()));
    const auto u = pool[k];
    if (static_cast<double>(costs[u]) > remaining) {
      ++misses;
      continue;
    }
    misses = 0;
    take(set, u, costs[u]);
    remaining -= static_cast<double>(costs[u]);
    pool[k] = pool.back();
    pool.pop_back();
    min_cost = cheapest();
  }
  set.remaining = remaining;
  check_feasible(set);
  return set;
}

void write_seed_set(const Graph& graph, const SeedSet& set, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["method"] = method_name(set.method);
  j["budget"] = set.budget;
  auto& ids = j["seeds"] = nlohmann::json::array();
  for (auto u : set.seeds) ids.push_back(graph.label(u));
  j["total_cost"] = set.total_cost;
  j["spread"] = set.spread;
  detail::write_file(path, j.dump(2) + '\n');
}

std::vector<NodeId> load_seed_ids(const Graph& graph, const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  std::vector<std::string> ids;
  const auto body = detail::trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
      for (const auto& s : j.at("seeds")) ids.push_back(s.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  } else {
    detail::for_each_line(text, [&](std::size_t, std::string_view line) {
      auto t = detail::trim(line);
      if (!t.empty() && t.front() != '#') ids.emplace_back(t);
    });
  }
  std::vector<NodeId> seeds;
  for (const auto& id : ids) {
    auto u = graph.find(id);
    if (!u) throw ValidationError(path.string() + ": unknown node '" + id + "'");
    seeds.push_back(*u);
  }
  return seeds;
}

}  // namespace bimgt
