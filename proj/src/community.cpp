#include "bimgt/community.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "bimgt/errors.hpp"
#include "bimgt/rng.hpp"
#include "text.hpp"

namespace bimgt {
namespace {

// Moves must beat staying put by more than this (in units of edge weight).
constexpr double kMinGain = 1e-10;

/// Symmetric weighted graph for one Louvain level. self_[i] holds the
/// diagonal entry A_ii (twice the weight of edges folded inside i).
struct LevelGraph {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> nbrs;
  std::vector<double> weights;
  std::vector<double> self;
  std::vector<double> degree;  // k_i = sum_j A_ij, diagonal included
  double total = 0.0;          // 2m

  std::size_t size() const { return self.size(); }
};

LevelGraph base_level(const Graph& graph) {
  LevelGraph lg;
  const auto n = graph.node_count();
  lg.offsets.assign(n + 1, 0);
  lg.self.assign(n, 0.0);
  lg.degree.assign(n, 0.0);
  std::vector<std::vector<NodeId>> adj(n);
  for (NodeId u = 0; u < n; ++u) adj[u] = graph.undirected_neighbors(u);
  for (NodeId u = 0; u < n; ++u) {
    lg.offsets[u + 1] = lg.offsets[u] + adj[u].size();
    for (auto v : adj[u]) {
      lg.nbrs.push_back(v);
      lg.weights.push_back(1.0);
    }
    lg.degree[u] = static_cast<double>(adj[u].size());
    lg.total += lg.degree[u];
  }
  return lg;
}

/// One pass of local moves repeated until stable. Returns true if any node
/// changed community.
bool local_moves(const LevelGraph& lg, std::vector<std::uint32_t>& community, double resolution,
                 Rng& rng) {
  const auto n = lg.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += lg.degree[i];
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(std::span<std::uint32_t>(order));

  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;
  bool moved_any = false;
  const double scale = resolution / lg.total;
  for (bool moved = true; moved;) {
    moved = false;
    for (auto i : order) {
      const auto current = community[i];
      const double ki = lg.degree[i];
      for (auto e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
        const auto c = community[lg.nbrs[e]];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += lg.weights[e];
      }
      tot[current] -= ki;
      // Gain of joining c, up to a common factor: links(i, c) - resolution * tot_c * k_i / 2m.
      auto gain = [&](std::uint32_t c) { return link[c] - scale * tot[c] * ki; };
      auto best = current;
      double best_gain = gain(current);
      std::sort(touched.begin(), touched.end());
      for (auto c : touched) {
        const double g = gain(c);
        if (g > best_gain + kMinGain) {
          best = c;
          best_gain = g;
        }
      }
      tot[best] += ki;
      if (best != current) {
        community[i] = best;
        moved = true;
        moved_any = true;
      }
      for (auto c : touched) link[c] = 0.0;
      link[current] = 0.0;
      touched.clear();
    }
  }
  return moved_any;
}

/// Renumbers communities densely in order of first appearance.
std::size_t compact(std::vector<std::uint32_t>& community) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (auto& c : community) {
    auto [it, inserted] = remap.emplace(c, static_cast<std::uint32_t>(remap.size()));
    c = it->second;
  }
  return remap.size();
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::uint32_t>& community,
                     std::size_t count) {
  std::vector<std::unordered_map<std::uint32_t, double>> rows(count);
  LevelGraph next;
  next.self.assign(count, 0.0);
  next.degree.assign(count, 0.0);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    const auto ci = community[i];
    next.self[ci] += lg.self[i];
    next.degree[ci] += lg.degree[i];
    for (auto e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
      const auto cj = community[lg.nbrs[e]];
      if (ci == cj) {
        next.self[ci] += lg.weights[e];
      } else {
        rows[ci][cj] += lg.weights[e];
      }
    }
  }
  next.offsets.assign(count + 1, 0);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<std::pair<std::uint32_t, double>> row(rows[c].begin(), rows[c].end());
    std::sort(row.begin(), row.end());
    for (auto [d, w] : row) {
      next.nbrs.push_back(d);
      next.weights.push_back(w);
    }
    next.offsets[c + 1] = next.nbrs.size();
  }
  next.total = lg.total;
  return next;
}

}  // namespace

double modularity(const Graph& graph, std::span<const CommunityId> assignment, double resolution) {
  const auto n = graph.node_count();
  if (assignment.size() != n) throw DomainError("partition does not cover every node");
  std::size_t count = 0;
  for (auto c : assignment) count = std::max<std::size_t>(count, c + 1);
  std::vector<double> inside(count, 0.0);
  std::vector<double> tot(count, 0.0);
  double two_m = 0.0;
  for (NodeId u = 0; u < n; ++u) {
    for (auto v : graph.undirected_neighbors(u)) {
      two_m += 1.0;
      tot[assignment[u]] += 1.0;
      if (assignment[u] == assignment[v]) inside[assignment[u]] += 1.0;
    }
  }
  if (two_m == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    const double frac = tot[c] / two_m;
    q += inside[c] / two_m - resolution * frac * frac;
  }
  return q;
}

double modularity(const Graph& graph, const CommunityPartition& partition, double resolution) {
  return modularity(graph, partition.assignment, resolution);
}

CommunityPartition make_partition(const Graph& graph, std::span<const CommunityId> assignment,
                                  double resolution) {
  if (assignment.size() != graph.node_count()) throw DomainError("partition does not cover every node");
  CommunityPartition p;
  std::unordered_map<CommunityId, CommunityId> remap;
  p.assignment.resize(assignment.size());
  // Nodes are visited in id order, so numbering follows each community's smallest member.
  for (std::size_t u = 0; u < assignment.size(); ++u) {
    auto [it, inserted] = remap.emplace(assignment[u], static_cast<CommunityId>(remap.size()));
    p.assignment[u] = it->second;
  }
  p.members.resize(remap.size());
  for (NodeId u = 0; u < assignment.size(); ++u) p.members[p.assignment[u]].push_back(u);
  p.largest = 0;
  for (CommunityId c = 1; c < p.members.size(); ++c) {
    if (p.members[c].size() > p.members[p.largest].size()) p.largest = c;
  }
  p.modularity = modularity(graph, p.assignment, resolution);
  return p;
}

CommunityPartition detect_communities(const Graph& graph, std::uint64_t seed, double resolution) {
  const auto n = graph.node_count();
  if (n == 0) throw DomainError("community detection needs at least one node");
  std::vector<std::uint32_t> node_comm(n);
  std::iota(node_comm.begin(), node_comm.end(), 0u);
  std::vector<double> history;

  LevelGraph level = base_level(graph);
  for (std::uint64_t depth = 0;; ++depth) {
    std::vector<std::uint32_t> community(level.size());
    std::iota(community.begin(), community.end(), 0u);
    Rng rng(derive_seed(seed, depth));
    const bool moved = level.total > 0.0 && local_moves(level, community, resolution, rng);
    if (!moved) break;
    const auto count = compact(community);
    for (auto& c : node_comm) c = community[c];
    history.push_back(modularity(graph, node_comm, resolution));
    if (count == level.size()) break;
    level = aggregate(level, community, count);
  }
  auto partition = make_partition(graph, node_comm, resolution);
  partition.level_modularity = std::move(history);
  return partition;
}

void write_partition(const Graph& graph, const CommunityPartition& partition,
                     const std::filesystem::path& path) {
  std::string out;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    out += graph.label(u) + ',' + std::to_string(partition.assignment[u]) + '\n';
  }
  detail::write_file(path, out);
}

CommunityPartition load_partition(const Graph& graph, const std::filesystem::path& path) {
  constexpr auto kUnset = ~CommunityId{0};
  std::vector<CommunityId> assignment(graph.node_count(), kUnset);
  detail::for_each_line(detail::read_file(path), [&](std::size_t line_no, std::string_view line) {
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') return;
    auto fields = detail::split(body, ',');
    auto value = fields.size() == 2 ? detail::parse_number<CommunityId>(fields[1]) : std::nullopt;
    if (!value) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": expected 'identifier,community'");
    }
    auto node = graph.find(detail::trim(fields[0]));
    if (!node) throw ValidationError(path.string() + ": unknown node '" + std::string(fields[0]) + "'");
    assignment[*node] = *value;
  });
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (assignment[u] == kUnset) {
      throw ValidationError(path.string() + ": node '" + graph.label(u) + "' has no community");
    }
  }
  return make_partition(graph, assignment);
}

}  // namespace bimgt
