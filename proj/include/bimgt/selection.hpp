#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bimgt/community.hpp"
#include "bimgt/graph.hpp"

namespace bimgt {

enum class Method { kBimgt, kBimgtc, kRand, kMdh, kMcch };

std::string_view method_name(Method m);
/// Case-insensitive; accepts BIMGT, BIMGTC, RAND, MDH, MCCH.
Method parse_method(std::string_view name);

struct SeedSet {
  Method method = Method::kBimgt;
  std::vector<NodeId> seeds;  // in selection order
  std::int64_t total_cost = 0;
  double budget = 0.0;
  double remaining = 0.0;
  double spread = 0.0;        // filled in by the caller that evaluates sigma
};

struct BudgetAllocation {
  std::vector<double> share;       // per community, before transfers
  std::vector<CommunityId> order;  // processing order; the largest community is last
  double total = 0.0;
};

/// BIMGT. Scan nodes by descending phi (ties by id); take a node when it
/// is still eligible and affordable, then make its neighbors (out-neighbors
/// when directed) ineligible. The scan always runs to the end of the list.
SeedSet select_bimgt(const Graph& graph, const CostAssignment& costs, double budget,
                     std::span<const double> phi);

/// Budget shares proportional to each community's Shapley mass; shares fall
/// back to community sizes when the total mass is zero. Communities are
/// processed by descending size (ties by id) with the largest one moved last.
BudgetAllocation allocate_budget(const CommunityPartition& partition, double budget,
                                 std::span<const double> phi);

/// BIMGTC. Each community spends its share on its own nodes in descending
/// phi order (single pass, no neighbor exclusion); whatever a community leaves
/// unspent is added to the largest community's share.
SeedSet select_bimgtc(const Graph& graph, const CostAssignment& costs, double budget,
                      std::span<const double> phi, const CommunityPartition& partition);

/// Local clustering coefficient on the undirected view; 0 when deg <= 1.
double clustering_coefficient(const Graph& graph, NodeId u);

/// RAND, MDH or MCCH. rng_seed only affects RAND.
SeedSet select_baseline(const Graph& graph, const CostAssignment& costs, double budget,
                        Method method, std::uint64_t rng_seed);

/// JSON record: method, budget, seeds (identifiers), total cost, spread.
void write_seed_set(const Graph& graph, const SeedSet& set, const std::filesystem::path& path);
/// Reads either a record written by write_seed_set or one identifier per line.
std::vector<NodeId> load_seed_ids(const Graph& graph, const std::filesystem::path& path);

}  // namespace bimgt
