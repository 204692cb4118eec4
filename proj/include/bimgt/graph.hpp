#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bimgt {

using NodeId = std::uint32_t;
using ArcId = std::uint32_t;

struct Edge {
  NodeId from;
  NodeId to;
  double prob = 1.0;
};

/// Directed or undirected graph with one influence probability per arc.
///
/// An undirected edge {u, v} is stored as the two arcs u->v and v->u, so every
/// algorithm can treat the graph as directed. edge_count() reports input
/// edges (undirected pairs count once); arc_count() reports stored arcs.
/// Adjacency lists are sorted by neighbor id. Immutable once built.
class Graph {
 public:
  Graph() = default;

  /// Drops self-loops and collapses duplicate edges (first occurrence wins).
  /// For undirected graphs (u,v) and (v,u) are the same edge.
  static Graph build(std::size_t node_count, std::span<const Edge> edges, bool directed,
                     std::vector<std::string> labels = {});

  std::size_t node_count() const { return out_offsets_.empty() ? 0 : out_offsets_.size() - 1; }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t arc_count() const { return targets_.size(); }
  bool directed() const { return directed_; }

  std::span<const NodeId> out_neighbors(NodeId u) const {
    return {targets_.data() + out_offsets_[u], targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const double> out_probs(NodeId u) const {
    return {probs_.data() + out_offsets_[u], probs_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {sources_.data() + in_offsets_[v], sources_.data() + in_offsets_[v + 1]};
  }
  /// Arc ids of the incoming arcs of v, parallel to in_neighbors(v).
  std::span<const ArcId> in_arcs(NodeId v) const {
    return {in_arc_ids_.data() + in_offsets_[v], in_arc_ids_.data() + in_offsets_[v + 1]};
  }

  ArcId first_out_arc(NodeId u) const { return out_offsets_[u]; }
  NodeId arc_target(ArcId a) const { return targets_[a]; }
  double arc_prob(ArcId a) const { return probs_[a]; }

  /// Probability of arc u->v, 0 when absent.
  double prob(NodeId u, NodeId v) const;
  bool has_arc(NodeId u, NodeId v) const;

  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }
  /// Out-degree; equals the ordinary degree for undirected graphs.
  std::size_t degree(NodeId u) const { return out_degree(u); }
  std::size_t max_degree() const { return max_degree_; }

  /// Neighbors ignoring direction, sorted and unique.
  std::vector<NodeId> undirected_neighbors(NodeId u) const;

  const std::string& label(NodeId u) const { return labels_[u]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;

  /// Hash of topology and probabilities; used to detect stale caches.
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Copy of this graph with per-arc probabilities replaced (indexed by ArcId).
  Graph with_probabilities(std::vector<double> probs) const;

 private:
  void finalize();

  bool directed_ = false;
  std::size_t edge_count_ = 0;
  std::size_t max_degree_ = 0;
  std::vector<ArcId> out_offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> probs_;
  std::vector<ArcId> in_offsets_;
  std::vector<NodeId> sources_;
  std::vector<ArcId> in_arc_ids_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::uint64_t fingerprint_ = 0;
};

/// Reads a SNAP-style edge list: two whitespace-separated tokens per line,
/// '#' comment lines. Tokens are arbitrary strings and are numbered densely in
/// order of first appearance. A self-loop line still registers its node.
Graph load_edge_list(const std::filesystem::path& path, bool directed);
Graph parse_edge_list(std::string_view text, bool directed);

/// Writes the graph in the format load_edge_list reads. Isolated nodes are
/// written as self-loop lines so that a reload preserves node_count().
void write_edge_list(const Graph& graph, const std::filesystem::path& path);

// --- influence probabilities -------------------------------------------------

struct ProbabilityScheme {
  enum class Kind { kUniform, kTrivalency, kWeightedCascade };

  Kind kind = Kind::kWeightedCascade;
  double uniform_p = 0.1;
  std::uint64_t seed = 0;

  static ProbabilityScheme uniform(double p) { return {Kind::kUniform, p, 0}; }
  static ProbabilityScheme trivalency(std::uint64_t seed) { return {Kind::kTrivalency, 0.1, seed}; }
  static ProbabilityScheme weighted_cascade() { return {Kind::kWeightedCascade, 0.1, 0}; }

  /// Accepts "uniform:<p>", "trivalency", "wc" / "weighted-cascade".
  static ProbabilityScheme parse(std::string_view text, std::uint64_t seed = 0);
  /// Inverse of parse (without the seed).
  std::string name() const;
  void validate() const;
};

inline constexpr double kTrivalencyLevels[3] = {0.1, 0.01, 0.001};

/// Uniform: every arc p. Trivalency: one draw from {0.1, 0.01, 0.001} per edge
/// (both arcs of an undirected edge share it). Weighted cascade: arc u->v gets
/// 1 / indeg(v), which is 1 / deg(v) for undirected graphs.
Graph assign_probabilities(const Graph& graph, const ProbabilityScheme& scheme);

// --- selection costs ---------------------------------------------------------

struct CostAssignment {
  enum class Provenance { kGenerated, kFile };

  std::vector<std::int64_t> cost;
  Provenance provenance = Provenance::kGenerated;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::uint64_t seed = 0;
  std::string source;

  std::int64_t operator[](NodeId u) const { return cost[u]; }
  std::size_t size() const { return cost.size(); }
};

inline constexpr std::int64_t kDefaultCostLo = 50;
inline constexpr std::int64_t kDefaultCostHi = 100;

/// Integer costs drawn uniformly from [lo, hi], deterministic in seed.
CostAssignment assign_costs(const Graph& graph, std::int64_t lo, std::int64_t hi,
                            std::uint64_t seed);
/// Reads "identifier,cost" lines; every node must be present with cost >= 1.
CostAssignment load_costs(const Graph& graph, const std::filesystem::path& path);
CostAssignment parse_costs(const Graph& graph, std::string_view text);
void write_costs(const Graph& graph, const CostAssignment& costs, const std::filesystem::path& path);

}  // namespace bimgt
