#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bimgt/graph.hpp"
#include "bimgt/mia.hpp"

namespace bimgt {

/// Cooperative game whose players are the graph's nodes and whose coalition
/// utility is the MIA spread sigma(S). Holds non-owning references.
class BimGame {
 public:
  /// Throws StaleCacheError if cache was not built from graph.
  BimGame(const Graph& graph, const MiiaCache& cache);

  std::size_t players() const { return graph_->node_count(); }
  const Graph& graph() const { return *graph_; }
  const MiiaCache& cache() const { return *cache_; }

  double value(const SeedMask& coalition) const { return sigma(*cache_, coalition); }
  double value(std::span<const NodeId> coalition) const { return sigma(*cache_, coalition); }

 private:
  const Graph* graph_;
  const MiiaCache* cache_;
};

struct GainRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// [0, c_u] with c_u = deg(u)/2 + sum over neighbors w of 1/(deg(w) - 1).
/// Directed graphs use out-degree and out-neighbors for u and in-degree for
/// w. A neighbor with deg(w) <= 1 contributes 1.
GainRange marginal_gain_range(const Graph& graph, NodeId u);

/// Mean of c_u over all nodes. Throws DomainError on an empty graph.
double aggregate_range(const Graph& graph);

/// ceil(ln(2/delta) * r^2 / (2 eps^2)), at least 1.
std::uint64_t sample_bound(double epsilon, double delta, double range);

struct SamplingPlan {
  double epsilon = 0.1;
  double delta = 0.1;
  double range = 0.0;
  std::uint64_t bound = 1;         // permutation count demanded by the bound
  std::uint64_t permutations = 1;  // permutations actually drawn
  std::optional<std::uint64_t> cap;
  std::uint32_t repetitions = 1;

  /// permutations = min(sample_bound(epsilon, delta, range), cap).
  static SamplingPlan make(double epsilon, double delta, double range,
                           std::optional<std::uint64_t> cap = std::nullopt,
                           std::uint32_t repetitions = 1);
  /// Fixed permutation count, bypassing the bound.
  static SamplingPlan fixed(std::uint64_t permutations, std::uint32_t repetitions = 1);

  bool capped() const { return permutations < bound; }
};

struct ShapleyEstimate {
  std::vector<double> phi;
  SamplingPlan plan;
  std::uint64_t master_seed = 0;
  std::vector<double> range_upper;  // c_u per node
};

/// Monte-Carlo Shapley values: the mean marginal contribution of each player
/// over plan.permutations uniformly random arrival orders. Permutation i uses
/// an RNG stream derived from (master_seed, i), and per-permutation results are
/// summed in permutation order, so the output is independent of workers.
ShapleyEstimate estimate_shapley(const BimGame& game, const SamplingPlan& plan,
                                 std::uint64_t master_seed, unsigned workers = 1);

/// Marginal contribution of each node when players arrive in the given order,
/// indexed by node. One left-to-right sweep that updates activation
/// probabilities only along the paths from the new seed to each root.
std::vector<double> prefix_marginal_gains(const BimGame& game, std::span<const NodeId> order);

inline constexpr std::size_t kDefaultExactLimit = 10;

/// Exact Shapley values from the coalition-weighted formula over all 2^n
/// coalitions. Throws DomainError when n exceeds limit.
std::vector<double> exact_shapley(const BimGame& game, std::size_t limit = kDefaultExactLimit);

/// "identifier,phi" lines.
void write_shapley(const Graph& graph, std::span<const double> phi, const std::filesystem::path& path);
std::vector<double> load_shapley(const Graph& graph, const std::filesystem::path& path);

}  // namespace bimgt
