#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bimgt/graph.hpp"

namespace bimgt {

inline constexpr double kDefaultTheta = 0.01;

/// Membership mask over node ids; nonzero entries are seeds.
using SeedMask = std::vector<std::uint8_t>;

SeedMask make_mask(std::size_t node_count, std::span<const NodeId> seeds);

struct MaxInfluencePath {
  std::vector<NodeId> nodes;  // source first, target last; empty when unreachable
  double probability = 0.0;
  double log_probability = -std::numeric_limits<double>::infinity();

  bool reachable() const { return !nodes.empty(); }
};

/// Highest-probability path from u to v (shortest path under -ln P). Among
/// equally likely paths the one with the lexicographically smaller sequence of
/// next hops wins.
MaxInfluencePath max_influence_path(const Graph& graph, NodeId u, NodeId v);

/// Maximum influence in-arborescence of a root: the union of the best paths
/// into the root whose probability is at least theta.
///
/// Nodes are stored in the order the search settled them, root first, so a
/// node always appears after its parent. Positions in that order are the
/// "local" indices used by every accessor.
class MiiaTree {
 public:
  static constexpr std::uint32_t kNoParent = ~std::uint32_t{0};

  NodeId root() const { return nodes_.front(); }
  std::size_t size() const { return nodes_.size(); }
  std::span<const NodeId> nodes() const { return nodes_; }

  NodeId node(std::uint32_t local) const { return nodes_[local]; }
  /// Local index of the next hop toward the root; kNoParent for the root.
  std::uint32_t parent(std::uint32_t local) const { return parent_[local]; }
  /// Probability of the arc node(local) -> node(parent(local)).
  double arc_prob(std::uint32_t local) const { return arc_prob_[local]; }
  /// Probability of the best path from node(local) to the root.
  double path_prob(std::uint32_t local) const { return path_prob_[local]; }
  std::span<const std::uint32_t> children(std::uint32_t local) const {
    return {child_list_.data() + child_offsets_[local],
            child_list_.data() + child_offsets_[local + 1]};
  }

  std::optional<std::uint32_t> local_index(NodeId u) const;
  bool contains(NodeId u) const { return local_index(u).has_value(); }

  /// Tree arcs as (from, to) pairs pointing toward the root, sorted.
  std::vector<std::pair<NodeId, NodeId>> arcs() const;

 private:
  friend class MiiaBuilder;
  void index();

  std::vector<NodeId> nodes_;
  std::vector<std::uint32_t> parent_;
  std::vector<double> arc_prob_;
  std::vector<double> path_prob_;
  std::vector<std::uint32_t> child_offsets_;
  std::vector<std::uint32_t> child_list_;
  std::vector<std::pair<NodeId, std::uint32_t>> lookup_;  // sorted by node
};

MiiaTree build_miia(const Graph& graph, NodeId root, double theta);

/// Activation probability of one tree node given the seeds:
///   ap(x) = 1 if x is a seed, otherwise 1 - prod over children c of (1 - ap(c) * P(c->x)),
/// which is 0 for a non-seed leaf. Evaluated children-before-parents.
double node_activation(const MiiaTree& tree, std::span<const double> ap, std::uint32_t local,
                       bool is_seed);

/// ap for every tree node, indexed by local index.
std::vector<double> activation_probabilities(const MiiaTree& tree, const SeedMask& seeds);

/// ap of the root only; allocation-free when scratch has capacity.
double root_activation(const MiiaTree& tree, const SeedMask& seeds, std::vector<double>& scratch);

/// Throws DomainError when u is not in the tree.
double activation_probability(const MiiaTree& tree, const SeedMask& seeds, NodeId u);

/// Debug listing: root, arcs with probabilities, per-node path probability.
std::string dump_miia(const Graph& graph, const MiiaTree& tree);

/// One MIIA per node plus, for each node, the trees that contain it.
class MiiaCache {
 public:
  struct Membership {
    NodeId root;
    std::uint32_t local;
  };

  double theta() const { return theta_; }
  std::uint64_t graph_fingerprint() const { return fingerprint_; }
  std::size_t node_count() const { return trees_.size(); }
  const MiiaTree& tree(NodeId root) const { return trees_[root]; }
  std::span<const MiiaTree> trees() const { return trees_; }
  /// Trees containing u (u's own tree included), ordered by root.
  std::span<const Membership> memberships(NodeId u) const {
    return {members_.data() + member_offsets_[u], members_.data() + member_offsets_[u + 1]};
  }
  std::size_t total_tree_size() const { return members_.size(); }

  /// Throws StaleCacheError if graph is not the one this cache was built from.
  void check(const Graph& graph) const;

 private:
  friend MiiaCache build_miia_cache(const Graph&, double, unsigned);

  double theta_ = kDefaultTheta;
  std::uint64_t fingerprint_ = 0;
  std::vector<MiiaTree> trees_;
  std::vector<std::uint32_t> member_offsets_;
  std::vector<Membership> members_;
};

/// workers = 0 uses all hardware threads; output does not depend on it.
MiiaCache build_miia_cache(const Graph& graph, double theta, unsigned workers = 1);

/// sigma(S) = sum over roots v of ap(v, S, MIIA(v, theta)).
double sigma(const MiiaCache& cache, const SeedMask& seeds, unsigned workers = 1);
double sigma(const MiiaCache& cache, std::span<const NodeId> seeds, unsigned workers = 1);
/// Same, after verifying the cache belongs to graph.
double sigma(const Graph& graph, const MiiaCache& cache, std::span<const NodeId> seeds,
             unsigned workers = 1);

}  // namespace bimgt
