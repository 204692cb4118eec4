#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "bimgt/errors.hpp"
#include "bimgt/selection.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bimgt;

namespace {

CostAssignment costs(std::vector<std::int64_t> c) {
  CostAssignment a;
  a.cost = std::move(c);
  return a;
}

bool independent(const Graph& g, const std::vector<NodeId>& s) {
  for (auto u : s) {
    for (auto v : s) {
      if (g.has_arc(u, v)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("zero budget selects nothing") {
  auto g = fixture::path(4);
  std::vector<double> phi{4, 3, 2, 1};
  auto c = costs({1, 1, 1, 1});
  CHECK(select_bimgt(g, c, 0, phi).seeds.empty());
  CHECK(select_bimgtc(g, c, 0, phi, detect_communities(g, 1)).seeds.empty());
  for (auto m : {Method::kRand, Method::kMdh, Method::kMcch}) {
    CHECK(select_baseline(g, c, 0, m, 1).seeds.empty());
  }
}

TEST_CASE("neighbours of a selected node are skipped") {
  // a=0 (phi 5, cost 60), b=1 (4, 50) adjacent to a, d=2 (3, 50) isolated
  auto g = fixture::undirected(3, {{0, 1}});
  std::vector<double> phi{5, 4, 3};
  auto s = select_bimgt(g, costs({60, 50, 50}), 120, phi);
  CHECK(s.seeds == std::vector<NodeId>{0, 2});
  CHECK(s.total_cost == 110);
  CHECK(s.remaining == 10);
}

TEST_CASE("scan continues past an unaffordable node") {
  auto g = fixture::edgeless(3);
  std::vector<double> phi{3, 2, 1};
  auto s = select_bimgt(g, costs({100, 60, 30}), 90, phi);
  CHECK(s.seeds == std::vector<NodeId>{1, 2});
}

TEST_CASE("ties in phi go to the smaller id") {
  auto g = fixture::edgeless(3);
  std::vector<double> phi{1, 2, 2};
  auto s = select_bimgt(g, costs({10, 10, 10}), 20, phi);
  CHECK(s.seeds == std::vector<NodeId>{1, 2});
}

TEST_CASE("large budget yields the greedy independent set") {
  std::mt19937_64 rng(3);
  auto g = oracle::random_graph(rng, 25, 0.15, false);
  std::vector<double> phi(25);
  for (auto& x : phi) x = std::uniform_real_distribution<double>(0, 1)(rng);
  // greedy independent set by descending phi
  std::vector<NodeId> order(25);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return phi[a] > phi[b]; });
  std::vector<NodeId> expected;
  for (auto u : order) {
    bool free = true;
    for (auto v : expected) free = free && !g.has_arc(u, v);
    if (free) expected.push_back(u);
  }
  auto s = select_bimgt(g, costs(std::vector<std::int64_t>(25, 10)), 1e9, phi);
  CHECK(s.seeds == expected);
  CHECK(independent(g, s.seeds));
}

TEST_CASE("directed exclusion only flags out-neighbours") {
  auto g = fixture::directed(2, {{1, 0, 0.5}});
  std::vector<double> phi{2, 1};
  auto s = select_bimgt(g, costs({10, 10}), 100, phi);
  CHECK(s.seeds == std::vector<NodeId>{0, 1});
}

TEST_CASE("budget shares follow Shapley mass") {
  auto g = fixture::two_triangles(1.0, false);
  auto p = make_partition(g, std::vector<CommunityId>{0, 0, 0, 1, 1, 1});
  std::vector<double> phi{1, 1, 1, 0.5, 0.25, 0.25};
  auto a = allocate_budget(p, 100, phi);
  CHECK(a.share[0] == doctest::Approx(75));
  CHECK(a.share[1] == doctest::Approx(25));
  // equal sizes: community 0 is the largest and goes last
  CHECK(a.order == std::vector<CommunityId>{1, 0});
  std::vector<double> zero(6, 0.0);
  CHECK(allocate_budget(p, 100, zero).share[1] == doctest::Approx(50));
}

TEST_CASE("leftover budget moves to the largest community") {
  // community 1 = {3, 4} (share 75), community 0 = {0, 1, 2} is largest (share 25)
  auto g = fixture::edgeless(5);
  auto p = make_partition(g, std::vector<CommunityId>{0, 0, 0, 1, 1});
  std::vector<double> phi{0.5, 0.25, 0.25, 2, 1};
  auto c = costs({40, 40, 40, 60, 50});
  auto a = allocate_budget(p, 100, phi);
  CHECK(a.share[1] == doctest::Approx(75));
  auto s = select_bimgtc(g, c, 100, phi, p);
  // node 3 (60) fits, node 4 (50) does not; 15 + 25 = 40 buys node 0
  CHECK(s.seeds == std::vector<NodeId>{3, 0});
  CHECK(s.total_cost == 100);
}

TEST_CASE("single community reduces to a top-phi pass") {
  auto g = fixture::path(5);
  auto p = make_partition(g, std::vector<CommunityId>(5, 0));
  std::vector<double> phi{1, 5, 4, 3, 2};
  auto c = costs({10, 30, 30, 20, 25});
  auto s = select_bimgtc(g, c, 80, phi, p);
  CHECK(s.seeds == std::vector<NodeId>{1, 2, 3});
}

TEST_CASE("clustering coefficient") {
  auto tri = fixture::two_triangles(1.0, false);
  CHECK(clustering_coefficient(tri, 0) == 1.0);
  CHECK(clustering_coefficient(fixture::star(5), 0) == 0.0);
  CHECK(clustering_coefficient(fixture::star(5), 1) == 0.0);
  // 0 has neighbours 1, 2, 3 and only 1-2 are linked
  auto g = fixture::undirected(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  CHECK(clustering_coefficient(g, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("MDH picks an affordable star centre first") {
  auto g = fixture::star(4);
  auto s = select_baseline(g, costs({50, 50, 50, 50, 50}), 120, Method::kMdh, 0);
  REQUIRE_FALSE(s.seeds.empty());
  CHECK(s.seeds[0] == 0);
  CHECK(s.seeds.size() == 2);
}

TEST_CASE("MCCH ranks triangle nodes above a star centre") {
  // triangle 0-1-2, star centre 3 with leaves 4, 5, 6
  auto g = fixture::undirected(7, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {3, 5}, {3, 6}});
  auto s = select_baseline(g, costs(std::vector<std::int64_t>(7, 10)), 30, Method::kMcch, 0);
  CHECK(s.seeds == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("RAND is seeded and feasible") {
  std::mt19937_64 rng(1);
  auto g = oracle::random_graph(rng, 100, 0.05, false);
  auto c = assign_costs(g, 50, 100, 4);
  auto a = select_baseline(g, c, 1000, Method::kRand, 77);
  auto b = select_baseline(g, c, 1000, Method::kRand, 77);
  CHECK(a.seeds == b.seeds);
  CHECK(a.total_cost <= 1000);
  CHECK(a.remaining < 100);  // stops only when nothing left is affordable or after n misses
  CHECK(select_baseline(g, c, 1000, Method::kRand, 78).seeds != a.seeds);
  auto sorted = a.seeds;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("every method respects the budget") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = oracle::random_graph(rng, 40, 0.1, trial % 2 == 0);
    auto c = assign_costs(g, 50, 100, trial);
    auto p = detect_communities(g, trial);
    std::vector<double> phi(40);
    for (auto& x : phi) x = std::uniform_real_distribution<double>(0, 3)(rng);
    for (double budget : {0.0, 49.0, 120.0, 700.0, 5000.0}) {
      CHECK(select_bimgt(g, c, budget, phi).total_cost <= budget);
      CHECK(select_bimgtc(g, c, budget, phi, p).total_cost <= budget);
      for (auto m : {Method::kRand, Method::kMdh, Method::kMcch}) {
        CHECK(select_baseline(g, c, budget, m, trial).total_cost <= budget);
      }
    }
  }
}

TEST_CASE("input errors") {
  auto g = fixture::path(3);
  std::vector<double> phi{1, 2, 3};
  CHECK_THROWS_AS(select_bimgt(g, costs({1, 1}), 10, phi), DomainError);
  CHECK_THROWS_AS(select_bimgt(g, costs({1, 1, 1}), -1, phi), DomainError);
  CHECK_THROWS_AS(select_bimgt(g, costs({1, 1, 1}), 10, std::vector<double>{1}), DomainError);
  CHECK_THROWS_AS(select_baseline(g, costs({1, 1, 1}), 10, Method::kBimgt, 0), DomainError);
}

TEST_CASE("method names") {
  CHECK(parse_method("bimgtc") == Method::kBimgtc);
  CHECK(parse_method(" MDH ") == Method::kMdh);
  CHECK(method_name(Method::kRand) == "RAND");
  CHECK_THROWS_AS(parse_method("greedy"), ValidationError);
}

TEST_CASE("seed files") {
  auto g = parse_edge_list("a b\nb c\n", false);
  SeedSet s;
  s.method = Method::kMdh;
  s.seeds = {2, 0};
  s.total_cost = 9;
  s.budget = 10;
  s.spread = 2.5;
  auto dir = fixture::scratch("seeds");
  write_seed_set(g, s, dir / "s.json");
  CHECK(load_seed_ids(g, dir / "s.json") == s.seeds);
  std::ofstream(dir / "plain.txt") << "# seeds\nb\nc\n";
  CHECK(load_seed_ids(g, dir / "plain.txt") == std::vector<NodeId>{1, 2});
  std::ofstream(dir / "bad.txt") << "q\n";
  CHECK_THROWS_AS(load_seed_ids(g, dir / "bad.txt"), ValidationError);
}

}
