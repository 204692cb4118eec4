#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bimgt/graph.hpp"

namespace bimgt {

using CommunityId = std::uint32_t;

/// Disjoint cover of the nodes. Communities are numbered by their smallest
/// member, so community 0 contains node 0.
struct CommunityPartition {
  std::vector<CommunityId> assignment;        // per node
  std::vector<std::vector<NodeId>> members;   // per community, ascending
  CommunityId largest = 0;                    // most members, smallest id on ties
  double modularity = 0.0;
  std::vector<double> level_modularity;       // after each Louvain level

  std::size_t count() const { return members.size(); }
};

/// Normalizes an arbitrary labelling into a partition and scores it.
/// Throws DomainError when the assignment does not cover every node.
CommunityPartition make_partition(const Graph& graph, std::span<const CommunityId> assignment,
                                  double resolution = 1.0);

/// Newman modularity on the undirected, unit-weight view of the graph:
///   Q = sum_c [ in_c / 2m - resolution * (tot_c / 2m)^2 ].
/// 0 for a graph without edges.
double modularity(const Graph& graph, std::span<const CommunityId> assignment,
                  double resolution = 1.0);
double modularity(const Graph& graph, const CommunityPartition& partition, double resolution = 1.0);

/// Louvain method: local moves in seeded random order until no move improves
/// modularity, then aggregation into community super-nodes, repeated until a
/// level makes no move. Directed graphs are symmetrized; probabilities are
/// ignored.
CommunityPartition detect_communities(const Graph& graph, std::uint64_t seed,
                                      double resolution = 1.0);

/// "identifier,community" lines.
void write_partition(const Graph& graph, const CommunityPartition& partition,
                     const std::filesystem::path& path);
CommunityPartition load_partition(const Graph& graph, const std::filesystem::path& path);

}  // namespace bimgt
