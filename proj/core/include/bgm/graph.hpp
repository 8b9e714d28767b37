#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bgm/var_set.hpp"

namespace bgm {

/// Bi-directed graph on labelled nodes. A missing edge means marginal
/// independence; node order is fixed at construction and is the variable
/// order used by every downstream computation.
class BidirectedGraph {
 public:
  BidirectedGraph() = default;
  /// Throws InputError on unknown endpoints, self-loops, duplicate edges
  /// or duplicate labels.
  BidirectedGraph(std::vector<std::string> nodes,
                  const std::vector<std::pair<std::string, std::string>>& edges);

  static BidirectedGraph from_indices(std::vector<std::string> nodes,
                                      const std::vector<std::pair<int, int>>& edges);
  static BidirectedGraph complete(std::vector<std::string> nodes);

  [[nodiscard]] int size() const { return static_cast<int>(labels_.size()); }
  [[nodiscard]] VarSet all() const { return VarSet::full(size()); }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const std::string& label(int v) const { return labels_.at(static_cast<std::size_t>(v)); }
  [[nodiscard]] int index_of(std::string_view label) const;

  [[nodiscard]] bool adjacent(int u, int v) const { return neighbours_[static_cast<std::size_t>(u)].contains(v); }
  [[nodiscard]] VarSet neighbours(int v) const { return neighbours_[static_cast<std::size_t>(v)]; }
  [[nodiscard]] std::vector<std::pair<int, int>> edges() const;

  /// Subgraph induced by `subset`, nodes kept in their original order.
  [[nodiscard]] BidirectedGraph induced(VarSet subset) const;

  /// Parses a node set written either as concatenated single-character
  /// labels ("134") or as '+'-separated labels ("C+F+A").
  [[nodiscard]] VarSet parse_set(std::string_view text) const;
  [[nodiscard]] std::string format_set(VarSet s) const;

 private:
  std::vector<std::string> labels_;
  std::vector<VarSet> neighbours_;
};

/// Components of the subgraph induced by `s`, in canonical order.
std::vector<VarSet> connected_components(const BidirectedGraph& g, VarSet s);

/// True iff the induced subgraph on `s` is connected (the empty set is not).
bool is_connected(const BidirectedGraph& g, VarSet s);

/// All node subsets whose induced subgraph has at least two components,
/// in canonical order (size, then lexicographic).
std::vector<VarSet> disconnected_sets(const BidirectedGraph& g);

/// C_1 ⊥ ... ⊥ C_r for the components C_i of a disconnected set.
struct IndependenceStatement {
  std::vector<VarSet> blocks;
  VarSet source;

  friend bool operator==(const IndependenceStatement&, const IndependenceStatement&) = default;
};

/// True when the statement on `smaller` follows from the one on `larger`:
/// smaller ⊊ larger and distinct components of G_smaller sit in distinct
/// components of G_larger.
bool statement_implied_by(const BidirectedGraph& g, VarSet smaller, VarSet larger);

/// One statement per disconnected set; with `reduce`, statements implied by
/// a statement on a larger disconnected set are dropped.
std::vector<IndependenceStatement> independence_statements(const BidirectedGraph& g, bool reduce);

/// True iff every path between `a` and `b` has an inner node in `c`.
/// Throws InputError when the sets overlap or `a`/`b` is empty.
bool is_separated(const BidirectedGraph& g, VarSet a, VarSet b, VarSet c);

/// True iff some four nodes induce a chordless path u-v-w-x.
bool has_chordless_4chain(const BidirectedGraph& g);

/// All subsets of size >= 2 that are not cliques, in canonical order.
std::vector<VarSet> incomplete_sets(const BidirectedGraph& g);

/// {"nodes": [...], "edges": [[u, v], ...]}
BidirectedGraph parse_graph_json(std::string_view text);
BidirectedGraph load_graph(const std::string& path);
std::string graph_to_json(const BidirectedGraph& g);

std::string format_statement(const BidirectedGraph& g, const IndependenceStatement& s);

}  // namespace bgm
