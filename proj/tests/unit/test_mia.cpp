#include <doctest.h>

#include <random>

#include "bimgt/errors.hpp"
#include "bimgt/mia.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bimgt;

namespace {

// a=0, b=1, c=2
Graph chain(double p = 0.5) { return fixture::directed(3, {{0, 1, p}, {1, 2, p}}); }

std::vector<std::uint32_t> oracle_mask_to_seeds(std::uint64_t mask, std::size_t n) {
  std::vector<std::uint32_t> s;
  for (NodeId u = 0; u < n; ++u) {
    if ((mask >> u) & 1u) s.push_back(u);
  }
  return s;
}

}  // namespace

TEST_SUITE("mia") {

TEST_CASE("path to itself") {
  auto g = chain();
  auto p = max_influence_path(g, 1, 1);
  CHECK(p.probability == 1.0);
  CHECK(p.nodes == std::vector<NodeId>{1});
}

TEST_CASE("direct arc beats a longer detour") {
  // a->b 0.5, a->c 0.2, c->b 0.9
  auto g = fixture::directed(3, {{0, 1, 0.5}, {0, 2, 0.2}, {2, 1, 0.9}});
  auto p = max_influence_path(g, 0, 1);
  CHECK(p.probability == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.nodes == std::vector<NodeId>{0, 1});
  auto o = oracle::best_path(g, 0, 1);
  CHECK(o.seq == p.nodes);
}

TEST_CASE("unreachable pair") {
  auto g = fixture::directed(4, {{0, 1, 0.5}, {2, 3, 0.5}});
  auto p = max_influence_path(g, 0, 3);
  CHECK(p.probability == 0.0);
  CHECK(p.nodes.empty());
  CHECK_FALSE(p.reachable());
  CHECK(max_influence_path(g, 1, 0).probability == 0.0);
}

TEST_CASE("equal paths resolve to the smaller next hop") {
  // 0->1->3 and 0->2->3, both 0.25
  auto g = fixture::directed(4, {{0, 2, 0.5}, {2, 3, 0.5}, {0, 1, 0.5}, {1, 3, 0.5}});
  CHECK(max_influence_path(g, 0, 3).nodes == std::vector<NodeId>{0, 1, 3});
  // certain arcs everywhere: a cycle of probability-one ties must not loop
  auto u = fixture::undirected(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto p = max_influence_path(u, 0, 2);
  CHECK(p.probability == 1.0);
  CHECK(p.nodes == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("path matches brute force on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::random_graph(rng, 7, 0.35, trial % 2 == 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      auto best = oracle::best_paths_into(g, v);
      for (NodeId u = 0; u < g.node_count(); ++u) {
        auto p = max_influence_path(g, u, v);
        CHECK(p.probability == doctest::Approx(best[u].prob).epsilon(1e-12));
        CHECK(p.nodes == best[u].seq);
      }
    }
  }
}

TEST_CASE("chain arborescences at two thresholds") {
  auto g = chain();
  auto t = build_miia(g, 2, 0.1);
  CHECK(t.root() == 2);
  CHECK(t.size() == 3);
  CHECK(t.arcs() == std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
  CHECK(t.path_prob(*t.local_index(0)) == doctest::Approx(0.25));
  CHECK(t.path_prob(*t.local_index(1)) == doctest::Approx(0.5));
  CHECK(t.parent(0) == MiiaTree::kNoParent);

  auto s = build_miia(g, 2, 0.3);
  CHECK(s.arcs() == std::vector<std::pair<NodeId, NodeId>>{{1, 2}});
  CHECK_FALSE(s.contains(0));
}

TEST_CASE("threshold boundary is inclusive") {
  auto t = build_miia(chain(), 2, 0.25);
  CHECK(t.contains(0));
}

TEST_CASE("isolated root") {
  auto g = fixture::edgeless(3);
  auto t = build_miia(g, 1, 0.01);
  CHECK(t.size() == 1);
  CHECK(t.arcs().empty());
  CHECK(t.children(0).empty());
}

TEST_CASE("invalid threshold") {
  CHECK_THROWS_AS(build_miia(chain(), 0, 0.0), DomainError);
  CHECK_THROWS_AS(build_miia(chain(), 0, 1.5), DomainError);
  CHECK_THROWS_AS(build_miia_cache(chain(), -1.0), DomainError);
}

TEST_CASE("arborescence structure matches the brute-force union of best paths") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = oracle::random_graph(rng, 8, 0.3, trial % 3 != 0);
    const double theta = trial % 2 ? 0.01 : 0.2;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      auto t = build_miia(g, v, theta);
      auto o = oracle::miia(g, v, theta);
      std::vector<std::pair<NodeId, NodeId>> expected;
      for (NodeId u = 0; u < g.node_count(); ++u) {
        CHECK(t.contains(u) == (o.parent[u] != -2));
        if (o.parent[u] >= 0) expected.emplace_back(u, static_cast<NodeId>(o.parent[u]));
      }
      CHECK(t.arcs() == expected);
      // parents precede children and every node reaches the root
      for (std::uint32_t i = 1; i < t.size(); ++i) CHECK(t.parent(i) < i);
    }
  }
}

TEST_CASE("activation probabilities") {
  auto single = fixture::directed(2, {{0, 1, 0.3}});
  auto t = build_miia(single, 1, 0.01);
  CHECK(activation_probability(t, make_mask(2, std::vector<NodeId>{0}), 1) ==
        doctest::Approx(0.3).epsilon(1e-15));
  CHECK(activation_probability(t, make_mask(2, std::vector<NodeId>{1}), 1) == 1.0);

  auto c = build_miia(chain(), 2, 0.1);
  auto mask = make_mask(3, std::vector<NodeId>{0});
  CHECK(activation_probability(c, mask, 2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(activation_probability(c, mask, 0) == 1.0);
  auto ap = activation_probabilities(c, mask);
  CHECK(ap[0] == doctest::Approx(0.25));

  auto empty = make_mask(3, {});
  CHECK(activation_probability(c, empty, 2) == 0.0);
  CHECK_THROWS_AS(activation_probability(build_miia(chain(), 2, 0.3), mask, 0), DomainError);
}

TEST_CASE("two children combine as independent chances") {
  // 0->2 (0.5) and 1->2 (0.4): 1 - 0.5 * 0.6 = 0.7
  auto g = fixture::directed(3, {{0, 2, 0.5}, {1, 2, 0.4}});
  auto t = build_miia(g, 2, 0.01);
  CHECK(activation_probability(t, make_mask(3, std::vector<NodeId>{0, 1}), 2) ==
        doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("sigma on the chain") {
  auto g = chain();
  auto cache = build_miia_cache(g, 0.1);
  CHECK(sigma(cache, std::vector<NodeId>{0}) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(sigma(cache, std::vector<NodeId>{}) == 0.0);
  CHECK(sigma(cache, std::vector<NodeId>{0, 1, 2}) == 3.0);
}

TEST_CASE("sigma of everything is n") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = oracle::random_graph(rng, 9, 0.3, true);
    auto cache = build_miia_cache(g, 0.01);
    std::vector<NodeId> all(g.node_count());
    std::iota(all.begin(), all.end(), NodeId{0});
    CHECK(sigma(cache, all) == static_cast<double>(g.node_count()));
  }
}

TEST_CASE("recursion agrees with live-arc enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = oracle::random_graph(rng, 7, 0.4, trial % 2 == 0);
    auto cache = build_miia_cache(g, 0.01);
    for (std::uint64_t mask = 0; mask < 128; mask += 9) {
      const auto seeds = oracle_mask_to_seeds(mask, 7);
      auto m = make_mask(7, seeds);
      for (NodeId v = 0; v < 7; ++v) {
        auto o = oracle::miia(g, v, 0.01);
        std::vector<double> scratch;
        CHECK(root_activation(cache.tree(v), m, scratch) ==
              doctest::Approx(oracle::live_edge_root(g, o, mask)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cache layout") {
  auto g = fixture::edgeless(4);
  auto cache = build_miia_cache(g, 0.01);
  CHECK(cache.node_count() == 4);
  CHECK(cache.total_tree_size() == 4);
  for (NodeId u = 0; u < 4; ++u) {
    CHECK(cache.tree(u).size() == 1);
    CHECK(cache.memberships(u).size() == 1);
  }

  auto c = chain();
  auto a = build_miia_cache(c, 0.1);
  for (NodeId v = 0; v < 3; ++v) CHECK(a.tree(v).arcs() == build_miia(c, v, 0.1).arcs());
  // node 0 sits in the trees of 0, 1 and 2
  auto m = a.memberships(0);
  REQUIRE(m.size() == 3);
  CHECK(m[0].root == 0);
  CHECK(m[2].root == 2);
  CHECK(a.tree(2).node(m[2].local) == 0);
}

TEST_CASE("cache build is deterministic and worker-independent") {
  std::mt19937_64 rng(8);
  auto g = oracle::random_graph(rng, 40, 0.1, false);
  auto a = build_miia_cache(g, 0.01, 1);
  auto b = build_miia_cache(g, 0.01, 4);
  REQUIRE(a.total_tree_size() == b.total_tree_size());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    CHECK(a.tree(v).arcs() == b.tree(v).arcs());
    auto na = a.tree(v).nodes();
    auto nb = b.tree(v).nodes();
    CHECK(std::equal(na.begin(), na.end(), nb.begin(), nb.end()));
  }
  std::vector<NodeId> seeds{1, 5, 9};
  CHECK(sigma(a, seeds, 1) == sigma(b, seeds, 3));
}

TEST_CASE("stale cache") {
  auto g = chain();
  auto cache = build_miia_cache(g, 0.1);
  auto h = assign_probabilities(g, ProbabilityScheme::uniform(0.9));
  CHECK_THROWS_AS(sigma(h, cache, std::vector<NodeId>{0}), StaleCacheError);
  CHECK_NOTHROW(sigma(g, cache, std::vector<NodeId>{0}));
}

TEST_CASE("sigma is monotone and submodular on random graphs") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = oracle::random_graph(rng, 8, 0.3, true);
    auto cache = build_miia_cache(g, 0.01);
    auto value = [&](std::uint64_t m) { return sigma(cache, oracle_mask_to_seeds(m, 8)); };
    for (std::uint64_t t = 0; t < 256; t += 7) {
      for (std::uint64_t s = t;; s = (s - 1) & t) {
        CHECK(value(s) <= value(t) + 1e-9);
        for (NodeId u = 0; u < 8; ++u) {
          if ((t >> u) & 1u) continue;
          const auto bit = std::uint64_t{1} << u;
          CHECK(value(s | bit) - value(s) >= value(t | bit) - value(t) - 1e-9);
        }
        if (s == 0) break;
      }
    }
  }
}

TEST_CASE("dump lists root, arcs and nodes") {
  auto g = parse_edge_list("a b\nb c\n", true);
  g = assign_probabilities(g, ProbabilityScheme::uniform(0.5));
  auto text = dump_miia(g, build_miia(g, 2, 0.1));
  CHECK(text.find("root c") == 0);
  CHECK(text.find("arc a b 0.5") != std::string::npos);
  CHECK(text.find("node a 0.25") != std::string::npos);
}

}
