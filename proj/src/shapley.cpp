#include "bimgt/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "bimgt/errors.hpp"
#include "bimgt/parallel.hpp"
#include "bimgt/rng.hpp"
#include "text.hpp"

namespace bimgt {
namespace {

/// Activation state of every tree of the cache while a permutation prefix
/// grows. ap_ holds one slot per (tree, local node), laid out tree by tree.
class PrefixSweep {
 public:
  explicit PrefixSweep(const MiiaCache& cache) : cache_(cache), seed_(cache.node_count(), 0) {
    offsets_.resize(cache.node_count() + 1, 0);
    for (NodeId v = 0; v < cache.node_count(); ++v) offsets_[v + 1] = offsets_[v] + cache.tree(v).size();
    ap_.assign(offsets_.back(), 0.0);
  }

  void reset() {
    std::fill(ap_.begin(), ap_.end(), 0.0);
    std::fill(seed_.begin(), seed_.end(), 0);
  }

  /// Adds u to the coalition and returns sigma(S + u) - sigma(S).
  double add(NodeId u) {
    if (seed_[u]) return 0.0;
    seed_[u] = 1;
    double gain = 0.0;
    for (const auto& m : cache_.memberships(u)) {
      const auto& tree = cache_.tree(m.root);
      std::span<double> ap(ap_.data() + offsets_[m.root], tree.size());
      const double before = ap[0];
      ap[m.local] = 1.0;
      for (auto j = tree.parent(m.local); j != MiiaTree::kNoParent; j = tree.parent(j)) {
        if (seed_[tree.node(j)]) break;
        const double updated = node_activation(tree, ap, j, false);
        if (updated == ap[j]) break;
        ap[j] = updated;
      }
      gain += ap[0] - before;
    }
    return gain;
  }

 private:
  const MiiaCache& cache_;
  std::vector<std::size_t> offsets_;
  std::vector<double> ap_;
  SeedMask seed_;
};

void validate_plan(const SamplingPlan& plan) {
  if (plan.permutations == 0) throw DomainError("permutation count must be positive");
  if (plan.repetitions == 0) throw DomainError("repetition count must be positive");
}

}  // namespace

BimGame::BimGame(const Graph& graph, const MiiaCache& cache) : graph_(&graph), cache_(&cache) {
  cache.check(graph);
}

GainRange marginal_gain_range(const Graph& graph, NodeId u) {
  if (u >= graph.node_count()) throw DomainError("node out of range");
  double hi = static_cast<double>(graph.out_degree(u)) / 2.0;
  for (auto w : graph.out_neighbors(u)) {
    const auto dw = graph.directed() ? graph.in_degree(w) : graph.degree(w);
    hi += dw <= 1 ? 1.0 : 1.0 / static_cast<double>(dw - 1);
  }
  return {0.0, hi};
}

double aggregate_range(const Graph& graph) {
  if (graph.node_count() == 0) throw DomainError("aggregate range of an empty graph");
  double total = 0.0;
  for (NodeId u = 0; u < graph.node_count(); ++u) total += marginal_gain_range(graph, u).hi;
  return total / static_cast<double>(graph.node_count());
}

std::uint64_t sample_bound(double epsilon, double delta, double range) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(range >= 0.0)) throw DomainError("range must be non-negative");
  const double bound = std::ceil(std::log(2.0 / delta) * range * range / (2.0 * epsilon * epsilon));
  if (!std::isfinite(bound) || bound > 1e18) throw DomainError("sample bound overflows");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(bound));
}

SamplingPlan SamplingPlan::make(double epsilon, double delta, double range,
                                std::optional<std::uint64_t> cap, std::uint32_t repetitions) {
  SamplingPlan plan;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.range = range;
  plan.bound = sample_bound(epsilon, delta, range);
  plan.cap = cap;
  if (cap && *cap == 0) throw DomainError("permutation cap must be positive");
  plan.permutations = cap ? std::min(plan.bound, *cap) : plan.bound;
  plan.repetitions = repetitions;
  validate_plan(plan);
  return plan;
}

SamplingPlan SamplingPlan::fixed(std::uint64_t permutations, std::uint32_t repetitions) {
  SamplingPlan plan;
  plan.bound = permutations;
  plan.permutations = permutations;
  plan.repetitions = repetitions;
  validate_plan(plan);
  return plan;
}

std::vector<double> prefix_marginal_gains(const BimGame& game, std::span<const NodeId> order) {
  PrefixSweep sweep(game.cache());
  std::vector<double> gains(game.players(), 0.0);
  for (auto u : order) {
    if (u >= game.players()) throw DomainError("node out of range");
    gains[u] = sweep.add(u);
  }
  return gains;
}

ShapleyEstimate estimate_shapley(const BimGame& game, const SamplingPlan& plan,
                                 std::uint64_t master_seed, unsigned workers) {
  validate_plan(plan);
  const auto n = game.players();
  ShapleyEstimate est;
  est.plan = plan;
  est.master_seed = master_seed;
  est.range_upper.resize(n);
  for (NodeId u = 0; u < n; ++u) est.range_upper[u] = marginal_gain_range(game.graph(), u).hi;
  est.phi.assign(n, 0.0);
  if (n == 0) return est;

  workers = resolve_workers(workers);
  const std::size_t block = std::max<std::size_t>(1, workers);
  std::vector<std::vector<double>> block_gains(block, std::vector<double>(n));
  std::vector<PrefixSweep> sweeps;
  sweeps.reserve(block);
  for (std::size_t i = 0; i < block; ++i) sweeps.emplace_back(game.cache());

  for (std::uint64_t first = 0; first < plan.permutations; first += block) {
    const auto count = static_cast<std::size_t>(std::min<std::uint64_t>(block, plan.permutations - first));
    parallel_for(count, workers, [&](std::size_t begin, std::size_t end, unsigned) {
      std::vector<NodeId> order(n);
      for (auto k = begin; k < end; ++k) {
        Rng rng(derive_seed(master_seed, first + k));
        std::iota(order.begin(), order.end(), NodeId{0});
        rng.shuffle(std::span<NodeId>(order));
        auto& gains = block_gains[k];
        std::fill(gains.begin(), gains.end(), 0.0);
        // sigma is deterministic under MIA, so every repetition sees the same
        // gains; the loop keeps the averaging structure explicit.
        for (std::uint32_t rep = 0; rep < plan.repetitions; ++rep) {
          auto& sweep = sweeps[k];
          sweep.reset();
          for (auto u : order) gains[u] += sweep.add(u);
        }
        for (auto& g : gains) g /= static_cast<double>(plan.repetitions);
      }
    });
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t u = 0; u < n; ++u) est.phi[u] += block_gains[k][u];
    }
  }
  for (auto& x : est.phi) x /= static_cast<double>(plan.permutations);
  return est;
}

std::vector<double> exact_shapley(const BimGame& game, std::size_t limit) {
  const auto n = game.players();
  if (n > limit) {
    throw DomainError("exact Shapley refused: " + std::to_string(n) + " players exceed limit " +
                      std::to_string(limit));
  }
  if (n > 24) throw DomainError("exact Shapley supports at most 24 players");
  if (n == 0) return {};
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> value(subsets);
  SeedMask mask(n);
  for (std::size_t s = 0; s < subsets; ++s) {
    for (std::size_t i = 0; i < n; ++i) mask[i] = (s >> i) & 1;
    value[s] = game.value(mask);
  }
  // weight[k] = k! (n-k-1)! / n! = 1 / (n * C(n-1, k))
  std::vector<double> weight(n);
  double binom = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    weight[k] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - k) / static_cast<double>(k + 1);
  }
  std::vector<double> phi(n, 0.0);
  for (std::size_t s = 0; s < subsets; ++s) {
    const auto size = static_cast<std::size_t>(std::popcount(s));
    for (std::size_t i = 0; i < n; ++i) {
      if ((s >> i) & 1) continue;
      phi[i] += weight[size] * (value[s | (std::size_t{1} << i)] - value[s]);
    }
  }
  return phi;
}

void write_shapley(const Graph& graph, std::span<const double> phi, const std::filesystem::path& path) {
  if (phi.size() != graph.node_count()) throw DomainError("Shapley vector size mismatch");
  std::string out;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    out += graph.label(u) + ',' + detail::format_double(phi[u]) + '\n';
  }
  detail::write_file(path, out);
}

std::vector<double> load_shapley(const Graph& graph, const std::filesystem::path& path) {
  std::vector<double> phi(graph.node_count(), 0.0);
  std::vector<std::uint8_t> seen(graph.node_count(), 0);
  detail::for_each_line(detail::read_file(path), [&](std::size_t line_no, std::string_view line) {
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') return;
    auto fields = detail::split(body, ',');
    auto value = fields.size() == 2 ? detail::parse_number<double>(fields[1]) : std::nullopt;
    if (!value) throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected 'identifier,phi'");
    auto node = graph.find(detail::trim(fields[0]));
    if (!node) throw ValidationError(path.string() + ": unknown node '" + std::string(fields[0]) + "'");
    phi[*node] = *value;
    seen[*node] = 1;
  });
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (!seen[u]) throw ValidationError(path.string() + ": no Shapley value for node '" + graph.label(u) + "'");
  }
  return phi;
}

}  // namespace bimgt
