#include "bgm/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bgm {

std::vector<VarSet> nonempty_subsets(VarSet universe) {
  std::vector<VarSet> out;
  // Standard sub-mask enumeration.
  for (std::uint32_t s = universe.bits(); s != 0; s = (s - 1) & universe.bits()) {
    out.emplace_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BidirectedGraph::BidirectedGraph(std::vector<std::string> nodes,
                                 const std::vector<std::pair<std::string, std::string>>& edges)
    : labels_(std::move(nodes)), neighbours_(labels_.size()) {
  if (labels_.empty()) throw InputError("graph has no nodes");
  if (labels_.size() > static_cast<std::size_t>(kMaxVariables)) {
    throw InputError("graph has " + std::to_string(labels_.size()) + " nodes; at most " +
                     std::to_string(kMaxVariables) + " are supported");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw InputError("empty node label");
    for (std::size_t j = 0; j < i; ++j) {
      if (labels_[i] == labels_[j]) throw InputError("duplicate node label '" + labels_[i] + "'");
    }
  }
  for (const auto& [a, b] : edges) {
    const int u = index_of(a);
    const int v = index_of(b);
    if (u == v) throw InputError("self-loop on node '" + a + "'");
    if (adjacent(u, v)) throw InputError("duplicate edge " + a + "-" + b);
    neighbours_[static_cast<std::size_t>(u)] = neighbours_[static_cast<std::size_t>(u)].with(v);
    neighbours_[static_cast<std::size_t>(v)] = neighbours_[static_cast<std::size_t>(v)].with(u);
  }
}

BidirectedGraph BidirectedGraph::from_indices(std::vector<std::string> nodes,
                                              const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::pair<std::string, std::string>> named;
  named.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= static_cast<int>(nodes.size()) || v >= static_cast<int>(nodes.size())) {
      throw InputError("edge endpoint out of range");
    }
    named.emplace_back(nodes[static_cast<std::size_t>(u)], nodes[static_cast<std::size_t>(v)]);
  }
  return BidirectedGraph(std::move(nodes), named);
}

BidirectedGraph BidirectedGraph::complete(std::vector<std::string> nodes) {
  std::vector<std::pair<int, int>> edges;
  const int d = static_cast<int>(nodes.size());
  for (int u = 0; u < d; ++u)
    for (int v = u + 1; v < d; ++v) edges.emplace_back(u, v);
  return from_indices(std::move(nodes), edges);
}

int BidirectedGraph::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  throw InputError("unknown node '" + std::string(label) + "'");
}

std::vector<std::pair<int, int>> BidirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < size(); ++u)
    for (int v = u + 1; v < size(); ++v)
      if (adjacent(u, v)) out.emplace_back(u, v);
  return out;
}

BidirectedGraph BidirectedGraph::induced(VarSet subset) const {
  if (!subset.subset_of(all()) || subset.empty()) throw InputError("induced subgraph on invalid node set");
  std::vector<std::string> nodes;
  std::vector<int> new_index(labels_.size(), -1);
  for (int v : subset.members()) {
    new_index[static_cast<std::size_t>(v)] = static_cast<int>(nodes.size());
    nodes.push_back(labels_[static_cast<std::size_t>(v)]);
  }
  std::vector<std::pair<int, int>> kept;
  for (auto [u, v] : edges()) {
    if (subset.contains(u) && subset.contains(v)) {
      kept.emplace_back(new_index[static_cast<std::size_t>(u)], new_index[static_cast<std::size_t>(v)]);
    }
  }
  return from_indices(std::move(nodes), kept);
}

VarSet BidirectedGraph::parse_set(std::string_view text) const {
  VarSet s;
  auto add = [&](std::string_view label) {
    const int v = index_of(label);
    if (s.contains(v)) throw InputError("node '" + std::string(label) + "' repeated in set");
    s = s.with(v);
  };
  if (text.empty()) throw InputError("empty node set");
  if (text.find('+') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = std::min(text.find('+', start), text.size());
      add(text.substr(start, end - start));
      start = end + 1;
    }
    return s;
  }
  for (const auto& l : labels_) {
    if (l == text) return VarSet::single(index_of(l));
  }
  for (char c : text) add(std::string_view(&c, 1));
  return s;
}

std::string format_set(VarSet s, const std::vector<std::string>& labels) {
  const bool short_labels =
      std::all_of(labels.begin(), labels.end(), [](const std::string& l) { return l.size() == 1; });
  std::string out;
  for (int v : s.members()) {
    if (!short_labels && !out.empty()) out += '+';
    out += labels.at(static_cast<std::size_t>(v));
  }
  return out;
}

std::string BidirectedGraph::format_set(VarSet s) const { return bgm::format_set(s, labels_); }

namespace {

VarSet reach(const BidirectedGraph& g, int start, VarSet allowed) {
  VarSet seen = VarSet::single(start);
  VarSet frontier = seen;
  while (!frontier.empty()) {
    VarSet next;
    for (int v : frontier.members()) next = next | (g.neighbours(v) & allowed);
    frontier = next - seen;
    seen = seen | frontier;
  }
  return seen;
}

}  // namespace

std::vector<VarSet> connected_components(const BidirectedGraph& g, VarSet s) {
  if (!s.subset_of(g.all())) throw InputError("node set contains unknown nodes");
  std::vector<VarSet> out;
  VarSet remaining = s;
  while (!remaining.empty()) {
    const VarSet comp = reach(g, remaining.first(), s);
    out.push_back(comp);
    remaining = remaining - comp;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_connected(const BidirectedGraph& g, VarSet s) {
  return !s.empty() && reach(g, s.first(), s) == s;
}

std::vector<VarSet> disconnected_sets(const BidirectedGraph& g) {
  std::vector<VarSet> out;
  for (VarSet s : nonempty_subsets(g.all())) {
    if (s.size() >= 2 && !is_connected(g, s)) out.push_back(s);
  }
  return out;
}

bool statement_implied_by(const BidirectedGraph& g, VarSet smaller, VarSet larger) {
  if (!smaller.proper_subset_of(larger)) return false;
  const auto small_comps = connected_components(g, smaller);
  const auto large_comps = connected_components(g, larger);
  std::vector<int> owner;
  for (VarSet c : small_comps) {
    const auto it = std::find_if(large_comps.begin(), large_comps.end(),
                                 [&](VarSet big) { return c.subset_of(big); });
    const int k = static_cast<int>(it - large_comps.begin());
    if (std::find(owner.begin(), owner.end(), k) != owner.end()) return false;
    owner.push_back(k);
  }
  return true;
}

std::vector<IndependenceStatement> independence_statements(const BidirectedGraph& g, bool reduce) {
  const auto dsets = disconnected_sets(g);
  std::vector<IndependenceStatement> out;
  for (VarSet d : dsets) {
    if (reduce) {
      const bool implied = std::any_of(dsets.begin(), dsets.end(),
                                       [&](VarSet big) { return statement_implied_by(g, d, big); });
      if (implied) continue;
    }
    out.push_back({connected_components(g, d), d});
  }
  return out;
}

bool is_separated(const BidirectedGraph& g, VarSet a, VarSet b, VarSet c) {
  if (a.empty() || b.empty()) throw InputError("separation query needs nonempty sets");
  if (a.intersects(b) || a.intersects(c) || b.intersects(c)) {
    throw InputError("separation query sets must be disjoint");
  }
  if (!(a | b | c).subset_of(g.all())) throw InputError("separation query names unknown nodes");
  const VarSet open = g.all() - c;
  for (int u : a.members()) {
    if (reach(g, u, open).intersects(b)) return false;
  }
  return true;
}

bool has_chordless_4chain(const BidirectedGraph& g) {
  const int d = g.size();
  // Look for an induced path a-b-c-e: ordered middle edge (b, c).
  for (int b = 0; b < d; ++b) {
    for (int c : g.neighbours(b).members()) {
      for (int a : (g.neighbours(b) - VarSet::single(c)).members()) {
        if (g.adjacent(a, c)) continue;
        for (int e : (g.neighbours(c) - VarSet::single(b)).members()) {
          if (e == a || g.adjacent(e, b) || g.adjacent(e, a)) continue;
          return true;
        }
      }
    }
  }
  return false;
}

std::vector<VarSet> incomplete_sets(const BidirectedGraph& g) {
  std::vector<VarSet> out;
  for (VarSet s : nonempty_subsets(g.all())) {
    if (s.size() < 2) continue;
    bool clique = true;
    for (int v : s.members()) {
      if (!(s - VarSet::single(v)).subset_of(g.neighbours(v))) {
        clique = false;
        break;
      }
    }
    if (!clique) out.push_back(s);
  }
  return out;
}

BidirectedGraph parse_graph_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("graph file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw InputError("graph file needs a \"nodes\" array");
  }
  std::vector<std::string> nodes;
  for (const auto& n : doc["nodes"]) {
    if (!n.is_string()) throw InputError("node labels must be strings");
    nodes.push_back(n.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> edges;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw InputError("\"edges\" must be an array");
    for (const auto& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        throw InputError("each edge must be a pair of node labels");
      }
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }
  return BidirectedGraph(std::move(nodes), edges);
}

BidirectedGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph_json(buf.str());
}

std::string graph_to_json(const BidirectedGraph& g) {
  nlohmann::json doc;
  doc["nodes"] = g.labels();
  doc["edges"] = nlohmann::json::array();
  for (auto [u, v] : g.edges()) doc["edges"].push_back({g.label(u), g.label(v)});
  return doc.dump();
}

std::string format_statement(const BidirectedGraph& g, const IndependenceStatement& s) {
  std::string out;
  for (VarSet b : s.blocks) {
    if (!out.empty()) out += " _||_ ";
    out += g.format_set(b);
  }
  return out;
}

}  // namespace bgm
