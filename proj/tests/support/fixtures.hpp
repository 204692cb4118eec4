#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include "bimgt/graph.hpp"

namespace fixture {

using bimgt::Edge;
using bimgt::Graph;
using bimgt::NodeId;

// Directed graph on nodes labelled "0".."n-1".
inline Graph directed(std::size_t n, std::initializer_list<Edge> edges) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return Graph::build(n, std::vector<Edge>(edges), true, labels);
}

inline Graph undirected(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> pairs,
                        double p = 1.0) {
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) edges.push_back({u, v, p});
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return Graph::build(n, edges, false, labels);
}

inline Graph path(std::size_t n, double p = 1.0) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, p});
  return Graph::build(n, edges, false);
}

inline Graph star(std::size_t leaves, double p = 1.0) {
  std::vector<Edge> edges;
  for (NodeId i = 1; i <= leaves; ++i) edges.push_back({0, i, p});
  return Graph::build(leaves + 1, edges, false);
}

// Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
inline Graph two_triangles(double p = 1.0, bool bridge = true) {
  std::vector<Edge> edges = {{0, 1, p}, {1, 2, p}, {0, 2, p}, {3, 4, p}, {4, 5, p}, {3, 5, p}};
  if (bridge) edges.push_back({2, 3, p});
  return Graph::build(6, edges, false);
}

inline Graph edgeless(std::size_t n) { return Graph::build(n, std::vector<Edge>{}, false); }

// Fresh scratch directory per call site.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bimgt-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
