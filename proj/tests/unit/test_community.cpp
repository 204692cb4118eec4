#include <doctest.h>

#include <random>

#include "bimgt/community.hpp"
#include "bimgt/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bimgt;

TEST_SUITE("community") {

TEST_CASE("edgeless graph gives singletons") {
  auto g = fixture::edgeless(5);
  auto p = detect_communities(g, 1);
  CHECK(p.count() == 5);
  CHECK(p.modularity == 0.0);
  CHECK(modularity(g, p) == 0.0);
}

TEST_CASE("two triangles with a bridge split at the bridge") {
  auto g = fixture::two_triangles();
  std::vector<std::uint32_t> best;
  const double q = oracle::best_modularity(g, &best);
  CHECK(best == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = detect_communities(g, seed);
    CHECK(p.count() == 2);
    CHECK(p.assignment == std::vector<CommunityId>{0, 0, 0, 1, 1, 1});
    CHECK(p.modularity == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("modularity formula") {
  auto disjoint = fixture::two_triangles(1.0, false);
  std::vector<CommunityId> halves{0, 0, 0, 1, 1, 1};
  CHECK(modularity(disjoint, halves) == doctest::Approx(0.5).epsilon(1e-15));
  std::vector<CommunityId> one(6, 0);
  CHECK(modularity(disjoint, one) == doctest::Approx(0.0));
  CHECK(modularity(fixture::two_triangles(), one) == doctest::Approx(0.0));
  CHECK(detect_communities(disjoint, 3).modularity == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("modularity agrees with the pairwise formula") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::uint32_t> label(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::random_graph(rng, 12, 0.25, trial % 2 == 0);
    std::vector<std::uint32_t> c(12);
    for (auto& x : c) x = label(rng);
    CHECK(modularity(g, c) == doctest::Approx(oracle::modularity(g, c)).epsilon(1e-12));
  }
}

TEST_CASE("reported modularity matches the returned partition") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = oracle::random_graph(rng, 60, 0.06, trial % 3 == 0);
    auto p = detect_communities(g, trial);
    CHECK(p.modularity == doctest::Approx(modularity(g, p.assignment)).epsilon(1e-12));
    CHECK(p.modularity == doctest::Approx(oracle::modularity(g, p.assignment)).epsilon(1e-12));
    CHECK_FALSE(p.level_modularity.empty());
    for (std::size_t i = 1; i < p.level_modularity.size(); ++i) {
      CHECK(p.level_modularity[i] >= p.level_modularity[i - 1] - 1e-12);
    }
  }
}

TEST_CASE("Louvain is near the brute-force optimum on small graphs") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 8; ++trial) {
    auto g = oracle::random_graph(rng, 8, 0.35, false);
    const double best = oracle::best_modularity(g);
    auto p = detect_communities(g, 1);
    CHECK(p.modularity <= best + 1e-12);
    CHECK(p.modularity >= best - 0.05);
  }
}

TEST_CASE("partition bookkeeping") {
  auto g = fixture::two_triangles();
  std::vector<CommunityId> labels{7, 7, 3, 3, 3, 3};
  auto p = make_partition(g, labels);
  CHECK(p.assignment == std::vector<CommunityId>{0, 0, 1, 1, 1, 1});
  CHECK(p.members[1] == std::vector<NodeId>{2, 3, 4, 5});
  CHECK(p.largest == 1);
  std::vector<CommunityId> tie{0, 0, 0, 1, 1, 1};
  CHECK(make_partition(g, tie).largest == 0);
  std::vector<CommunityId> short_labels{0, 0};
  CHECK_THROWS_AS(make_partition(g, short_labels), DomainError);
  CHECK_THROWS_AS(detect_communities(fixture::edgeless(0), 1), DomainError);
}

TEST_CASE("detection is seeded") {
  std::mt19937_64 rng(13);
  auto g = oracle::random_graph(rng, 200, 0.03, false);
  CHECK(detect_communities(g, 5).assignment == detect_communities(g, 5).assignment);
}

TEST_CASE("partition files") {
  auto g = parse_edge_list("a b\nb c\nd e\n", false);
  auto p = detect_communities(g, 1);
  auto dir = fixture::scratch("partition");
  write_partition(g, p, dir / "p.csv");
  auto q = load_partition(g, dir / "p.csv");
  CHECK(q.assignment == p.assignment);
  CHECK(q.modularity == doctest::Approx(p.modularity));
}

}
