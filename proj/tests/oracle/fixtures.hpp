#pragma once

#include <string>
#include <vector>

#include "bgm/mll.hpp"
#include "bgm/table.hpp"
#include "support.hpp"

namespace bgm::testing {

struct SmallCase {
  std::string name;
  ContingencyTable table;
  ModelSpec model;
};

/// Every shipped fixture (and fixture margin) with at most 16 cells, paired
/// with the models fitted to it anywhere in the suite.
inline std::vector<SmallCase> small_cases() {
  std::vector<SmallCase> out;
  const auto chain = fixture_graph("chain4");
  const auto coppen = fixture_table("coppen", chain);
  const auto dset = model_from_graph(chain, coppen.levels(), SchemeKind::dset);
  out.push_back({"coppen 4-chain", coppen, dset});
  const std::vector<ParamKey> top{{chain.all(), chain.all()}};
  out.push_back({"coppen 4-chain without 1234", coppen, add_zero_blocks(dset, top)});
  out.push_back({"coppen [12][234]", coppen, model_undirected(fixture_graph("coppen_12_234"), coppen.levels())});

  for (auto [mask, edge] : {std::pair{VarSet::of({0, 1, 3}), std::pair{0, 1}}, std::pair{VarSet::of({0, 2, 3}), std::pair{1, 2}}}) {
    const auto t = marginalize(coppen, mask);
    const auto g = BidirectedGraph::from_indices(t.names(), {edge});
    out.push_back({"coppen margin " + chain.format_set(mask), t, model_from_graph(g, t.levels(), SchemeKind::dset)});
  }

  const auto lsd = fixture_table("lienert");
  for (const auto& edges : std::vector<std::vector<std::pair<int, int>>>{{{0, 1}, {1, 2}}, {{0, 2}}, {}}) {
    const auto g = BidirectedGraph::from_indices(lsd.names(), edges);
    out.push_back({"lienert " + std::to_string(edges.size()) + " edges", lsd, model_from_graph(g, lsd.levels(), SchemeKind::dset)});
  }
  return out;
}

}  // namespace bgm::testing
