#pragma once

#include <random>
#include <string>

#include "bgm/graph.hpp"
#include "bgm/table.hpp"

namespace bgm::testing {

inline std::string data_path(const std::string& relative) { return std::string(BGM_TEST_DATA_DIR) + "/" + relative; }

inline BidirectedGraph fixture_graph(const std::string& name) { return load_graph(data_path("graphs/" + name + ".json")); }

/// Table fixture with its variables permuted into the graph's node order.
inline ContingencyTable fixture_table(const std::string& name, const BidirectedGraph& g) {
  return reorder(load_table(data_path("tables/" + name + ".csv")), g.labels());
}

inline ContingencyTable fixture_table(const std::string& name) { return load_table(data_path("tables/" + name + ".csv")); }

inline std::vector<std::string> numbered(int d) {
  std::vector<std::string> out;
  for (int v = 1; v <= d; ++v) out.push_back(std::to_string(v));
  return out;
}

/// Random graph on d numbered nodes, each edge present with probability p.
inline BidirectedGraph random_graph(int d, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < d; ++u)
    for (int v = u + 1; v < d; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  return BidirectedGraph::from_indices(numbered(d), edges);
}

/// Strictly positive random probability vector.
inline Eigen::VectorXd random_distribution(Index t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::VectorXd pi(t);
  for (Index i = 0; i < t; ++i) pi[i] = u(rng);
  return pi / pi.sum();
}

}  // namespace bgm::testing
