#include "bimgt/mia.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "bimgt/errors.hpp"
#include "bimgt/parallel.hpp"
#include "text.hpp"

namespace bimgt {
namespace {

// Log-space slack under which two path weights count as tied.
constexpr double kTieTolerance = 1e-12;
// Relative slack for the ">= theta" test, so that products equal to theta up
// to rounding are kept.
constexpr double kThresholdSlack = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

}  // namespace

SeedMask make_mask(std::size_t node_count, std::span<const NodeId> seeds) {
  SeedMask mask(node_count, 0);
  for (auto s : seeds) {
    if (s >= node_count) throw DomainError("seed node out of range");
    mask[s] = 1;
  }
  return mask;
}

/// Dijkstra over reversed arcs under weights -ln P. Reusable across roots.
class MiiaBuilder {
 public:
  explicit MiiaBuilder(const Graph& graph)
      : graph_(graph),
        dist_(graph.node_count(), kInf),
        prob_(graph.node_count(), 0.0),
        arc_(graph.node_count(), 0.0),
        next_(graph.node_count(), kNone),
        state_(graph.node_count(), 0) {}

  /// Settles nodes in order of decreasing path probability to root, pruning
  /// paths below theta (theta = 0 disables pruning). Stops early once
  /// stop_at is settled.
  void search(NodeId root, double theta, NodeId stop_at = kNone) {
    reset();
    const double floor = theta * (1.0 - kThresholdSlack);
    touch(root);
    dist_[root] = 0.0;
    prob_[root] = 1.0;
    arc_[root] = 1.0;
    heap_.push({0.0, root});
    while (!heap_.empty()) {
      const auto [d, x] = heap_.top();
      heap_.pop();
      if (state_[x] == 2) continue;
      state_[x] = 2;
      order_.push_back(x);
      if (x == stop_at) break;
      auto sources = graph_.in_neighbors(x);
      auto arcs = graph_.in_arcs(x);
      for (std::size_t i = 0; i < sources.size(); ++i) {
        const NodeId w = sources[i];
        if (state_[w] == 2) continue;
        const double p = graph_.arc_prob(arcs[i]);
        const double cand_prob = prob_[x] * p;
        if (theta > 0.0 && cand_prob < floor) continue;
        const double cand = dist_[x] - std::log(p);
        if (state_[w] == 0 || cand < dist_[w] - kTieTolerance) {
          touch(w);
          dist_[w] = cand;
          prob_[w] = cand_prob;
          arc_[w] = p;
          next_[w] = x;
          heap_.push({cand, w});
        } else if (cand <= dist_[w] + kTieTolerance && x < next_[w]) {
          prob_[w] = cand_prob;
          arc_[w] = p;
          next_[w] = x;
          if (cand < dist_[w]) {
            dist_[w] = cand;
            heap_.push({cand, w});
          }
        }
      }
    }
  }

  MiiaTree tree() const {
    MiiaTree t;
    const auto size = order_.size();
    t.nodes_ = order_;
    t.parent_.resize(size);
    t.arc_prob_.resize(size);
    t.path_prob_.resize(size);
    t.lookup_.reserve(size);
    for (std::uint32_t i = 0; i < size; ++i) t.lookup_.emplace_back(order_[i], i);
    std::sort(t.lookup_.begin(), t.lookup_.end());
    for (std::uint32_t i = 0; i < size; ++i) {
      const NodeId w = order_[i];
      t.parent_[i] = i == 0 ? MiiaTree::kNoParent : *t.local_index(next_[w]);
      t.arc_prob_[i] = i == 0 ? 1.0 : arc_[w];
      t.path_prob_[i] = prob_[w];
    }
    t.index();
    return t;
  }

  bool settled(NodeId u) const { return state_[u] == 2; }
  NodeId next(NodeId u) const { return next_[u]; }
  double dist(NodeId u) const { return dist_[u]; }

 private:
  struct Entry {
    double dist;
    NodeId node;
    bool operator>(const Entry& o) const { return dist != o.dist ? dist > o.dist : node > o.node; }
  };

  void touch(NodeId u) {
    if (state_[u] == 0) {
      state_[u] = 1;
      touched_.push_back(u);
    }
  }

  void reset() {
    for (auto u : touched_) {
      dist_[u] = kInf;
      prob_[u] = 0.0;
      arc_[u] = 0.0;
      next_[u] = kNone;
      state_[u] = 0;
    }
    touched_.clear();
    order_.clear();
    heap_ = {};
  }

  const Graph& graph_;
  std::vector<double> dist_;
  std::vector<double> prob_;
  std::vector<double> arc_;
  std::vector<NodeId> next_;
  std::vector<std::uint8_t> state_;
  std::vector<NodeId> touched_;
  std::vector<NodeId> order_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

void MiiaTree::index() {
  const auto size = nodes_.size();
  child_offsets_.assign(size + 1, 0);
  for (std::uint32_t i = 1; i < size; ++i) ++child_offsets_[parent_[i] + 1];
  for (std::size_t i = 0; i < size; ++i) child_offsets_[i + 1] += child_offsets_[i];
  child_list_.assign(size == 0 ? 0 : size - 1, 0);
  std::vector<std::uint32_t> fill(child_offsets_.begin(), child_offsets_.end() - 1);
  for (std::uint32_t i = 1; i < size; ++i) child_list_[fill[parent_[i]]++] = i;
}

std::optional<std::uint32_t> MiiaTree::local_index(NodeId u) const {
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::pair<NodeId, std::uint32_t>{u, 0});
  if (it == lookup_.end() || it->first != u) return std::nullopt;
  return it->second;
}

std::vector<std::pair<NodeId, NodeId>> MiiaTree::arcs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::uint32_t i = 1; i < nodes_.size(); ++i) out.emplace_back(nodes_[i], nodes_[parent_[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

MaxInfluencePath max_influence_path(const Graph& graph, NodeId u, NodeId v) {
  if (u >= graph.node_count() || v >= graph.node_count()) throw DomainError("node out of range");
  MaxInfluencePath path;
  if (u == v) {
    path.nodes = {u};
    path.probability = 1.0;
    path.log_probability = 0.0;
    return path;
  }
  MiiaBuilder builder(graph);
  builder.search(v, 0.0, u);
  if (!builder.settled(u)) return path;
  path.log_probability = -builder.dist(u);
  path.probability = 1.0;
  for (NodeId x = u; x != v; x = builder.next(x)) {
    path.nodes.push_back(x);
    path.probability *= graph.prob(x, builder.next(x));
  }
  path.nodes.push_back(v);
  return path;
}

MiiaTree build_miia(const Graph& graph, NodeId root, double theta) {
  if (root >= graph.node_count()) throw DomainError("root out of range");
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("theta must lie in (0, 1]");
  MiiaBuilder builder(graph);
  builder.search(root, theta);
  return builder.tree();
}

double node_activation(const MiiaTree& tree, std::span<const double> ap, std::uint32_t local,
                       bool is_seed) {
  if (is_seed) return 1.0;
  double miss = 1.0;
  for (auto c : tree.children(local)) miss *= 1.0 - ap[c] * tree.arc_prob(c);
  return 1.0 - miss;
}

std::vector<double> activation_probabilities(const MiiaTree& tree, const SeedMask& seeds) {
  std::vector<double> ap(tree.size(), 0.0);
  for (auto i = tree.size(); i-- > 0;) {
    ap[i] = node_activation(tree, ap, static_cast<std::uint32_t>(i), seeds[tree.node(i)] != 0);
  }
  return ap;
}

double root_activation(const MiiaTree& tree, const SeedMask& seeds, std::vector<double>& scratch) {
  if (seeds[tree.root()]) return 1.0;
  scratch.assign(tree.size(), 0.0);
  for (auto i = tree.size(); i-- > 0;) {
    scratch[i] = node_activation(tree, scratch, static_cast<std::uint32_t>(i),
                                 seeds[tree.node(i)] != 0);
  }
  return scratch[0];
}

double activation_probability(const MiiaTree& tree, const SeedMask& seeds, NodeId u) {
  auto local = tree.local_index(u);
  if (!local) throw DomainError("node is not part of the arborescence");
  return activation_probabilities(tree, seeds)[*local];
}

std::string dump_miia(const Graph& graph, const MiiaTree& tree) {
  std::ostringstream out;
  out << "root " << graph.label(tree.root()) << '\n';
  for (auto [from, to] : tree.arcs()) {
    out << "arc " << graph.label(from) << ' ' << graph.label(to) << ' '
        << detail::format_double(graph.prob(from, to)) << '\n';
  }
  std::vector<std::pair<NodeId, double>> nodes;
  for (std::uint32_t i = 0; i < tree.size(); ++i) nodes.emplace_back(tree.node(i), tree.path_prob(i));
  std::sort(nodes.begin(), nodes.end());
  for (auto [u, p] : nodes) out << "node " << graph.label(u) << ' ' << detail::format_double(p) << '\n';
  return out.str();
}

void MiiaCache::check(const Graph& graph) const {
  if (graph.fingerprint() != fingerprint_ || graph.node_count() != trees_.size()) {
    throw StaleCacheError("MIIA cache was built for a different graph");
  }
}

MiiaCache build_miia_cache(const Graph& graph, double theta, unsigned workers) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("theta must lie in (0, 1]");
  MiiaCache cache;
  cache.theta_ = theta;
  cache.fingerprint_ = graph.fingerprint();
  const auto n = graph.node_count();
  cache.trees_.resize(n);
  parallel_for(n, resolve_workers(workers), [&](std::size_t begin, std::size_t end, unsigned) {
    MiiaBuilder builder(graph);
    for (auto v = begin; v < end; ++v) {
      builder.search(static_cast<NodeId>(v), theta);
      cache.trees_[v] = builder.tree();
    }
  });

  cache.member_offsets_.assign(n + 1, 0);
  for (const auto& t : cache.trees_) {
    for (auto u : t.nodes()) ++cache.member_offsets_[u + 1];
  }
  for (std::size_t i = 0; i < n; ++i) cache.member_offsets_[i + 1] += cache.member_offsets_[i];
  cache.members_.resize(cache.member_offsets_[n]);
  std::vector<std::uint32_t> fill(cache.member_offsets_.begin(), cache.member_offsets_.end() - 1);
  for (NodeId v = 0; v < n; ++v) {
    const auto& t = cache.trees_[v];
    for (std::uint32_t i = 0; i < t.size(); ++i) cache.members_[fill[t.node(i)]++] = {v, i};
  }
  return cache;
}

double sigma(const MiiaCache& cache, const SeedMask& seeds, unsigned workers) {
  const auto n = cache.node_count();
  if (seeds.size() != n) throw DomainError("seed mask size does not match the graph");
  std::vector<double> per_root(n, 0.0);
  parallel_for(n, resolve_workers(workers), [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<double> scratch;
    for (auto v = begin; v < end; ++v) {
      per_root[v] = root_activation(cache.tree(static_cast<NodeId>(v)), seeds, scratch);
    }
  });
  double total = 0.0;
  for (double x : per_root) total += x;
  return total;
}

double sigma(const MiiaCache& cache, std::span<const NodeId> seeds, unsigned workers) {
  return sigma(cache, make_mask(cache.node_count(), seeds), workers);
}

double sigma(const Graph& graph, const MiiaCache& cache, std::span<const NodeId> seeds,
             unsigned workers) {
  cache.check(graph);
  return sigma(cache, seeds, workers);
}

}  // namespace bimgt
