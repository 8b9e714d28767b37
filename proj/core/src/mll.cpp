#include "bgm/mll.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bgm {

namespace {

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXd variable_contrast(int levels, bool in_effect) {
  if (!in_effect) {
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(1, levels);
    sel(0, 0) = 1.0;
    return sel;
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(levels - 1, levels);
  c.col(0).setConstant(-1.0);
  c.rightCols(levels - 1).setIdentity();
  return c;
}

std::vector<std::vector<int>> effect_levels(std::span<const int> levels, VarSet effect) {
  std::vector<std::vector<int>> rows{{}};
  for (int v : effect.members()) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : rows) {
      for (int l = 2; l <= levels[static_cast<std::size_t>(v)]; ++l) {
        next.push_back(prefix);
        next.back().push_back(l);
      }
    }
    rows = std::move(next);
  }
  return rows;
}

void check_levels(std::span<const int> levels) {
  if (levels.empty() || levels.size() > static_cast<std::size_t>(kMaxVariables)) {
    throw InputError("between 1 and " + std::to_string(kMaxVariables) + " variables are supported");
  }
  for (int b : levels)
    if (b < 2) throw InputError("every variable needs at least 2 levels");
}

}  // namespace

Eigen::MatrixXd contrast_block(std::span<const int> levels, VarSet margin, VarSet effect) {
  check_levels(levels);
  if (effect.empty()) throw InputError("effect set must be nonempty");
  if (!effect.subset_of(margin)) throw InputError("effect set is not contained in its margin");
  if (!margin.subset_of(VarSet::full(static_cast<int>(levels.size())))) throw InputError("margin names an unknown variable");
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (int v : margin.members()) {
    out = kronecker(out, variable_contrast(levels[static_cast<std::size_t>(v)], effect.contains(v)));
  }
  return out;
}

std::vector<EffectAssignment> generate_assignments(std::span<const VarSet> margins, int d) {
  if (d < 1 || d > kMaxVariables) throw InputError("unsupported number of variables");
  const VarSet all = VarSet::full(d);
  std::vector<VarSet> seq(margins.begin(), margins.end());
  if (seq.empty() || seq.back() != all) seq.push_back(all);
  for (std::size_t j = 0; j < seq.size(); ++j) {
    if (seq[j].empty() || !seq[j].subset_of(all)) throw InputError("margin is empty or names an unknown variable");
    for (std::size_t i = 0; i < j; ++i) {
      if (seq[j].subset_of(seq[i])) {
        throw InputError("margin sequence is not non-decreasing: a margin is contained in an earlier one");
      }
    }
  }
  std::vector<EffectAssignment> out;
  std::set<std::uint32_t> assigned;
  for (VarSet m : seq) {
    EffectAssignment a{m, {}};
    for (VarSet l : nonempty_subsets(m)) {
      if (assigned.insert(l.bits()).second) a.effects.push_back(l);
    }
    out.push_back(std::move(a));
  }
  return out;
}

ParamScheme::ParamScheme(std::vector<int> levels, std::span<const VarSet> margins, SchemeKind kind)
    : kind_(kind), levels_((check_levels(levels), std::move(levels))), layout_(levels_) {
  assignments_ = generate_assignments(margins, dimension());
  for (const auto& a : assignments_) margins_.push_back(a.margin);

  Index rows = 0;
  Index margin_rows = 0;
  for (const auto& a : assignments_) {
    const Index cells = margin_cells(levels_, a.margin);
    for (VarSet l : a.effects) {
      ParamBlock b;
      b.key = {a.margin, l};
      b.row_offset = rows;
      b.row_levels = effect_levels(levels_, l);
      b.rows = static_cast<Index>(b.row_levels.size());
      b.margin_offset = margin_rows;
      b.margin_rows = cells;
      b.contrast = contrast_block(levels_, a.margin, l);
      rows += b.rows;
      blocks_.push_back(std::move(b));
    }
    margin_rows += cells;
  }
  num_params_ = rows;
  margin_rows_ = margin_rows;
}

Eigen::MatrixXd ParamScheme::C() const {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(num_params_, margin_rows_);
  for (const auto& b : blocks_) C.block(b.row_offset, b.margin_offset, b.rows, b.margin_rows) = b.contrast;
  return C;
}

Eigen::MatrixXd ParamScheme::T() const { return build_T(levels_, margins_); }

const ParamBlock* ParamScheme::find(const ParamKey& key) const {
  for (const auto& b : blocks_)
    if (b.key == key) return &b;
  return nullptr;
}

const ParamBlock& ParamScheme::block_for_effect(VarSet effect) const {
  for (const auto& b : blocks_)
    if (b.key.effect == effect) return b;
  throw InputError("effect set is not part of the parameterization");
}

ParamScheme loglinear_scheme(std::vector<int> levels) {
  const int d = static_cast<int>(levels.size());
  const std::vector<VarSet> margins{VarSet::full(d)};
  return ParamScheme(std::move(levels), margins, SchemeKind::loglinear);
}

ParamScheme mvlogistic_scheme(std::vector<int> levels) {
  const int d = static_cast<int>(levels.size());
  if (d < 1 || d > kMaxVariables) throw InputError("unsupported number of variables");
  const auto margins = nonempty_subsets(VarSet::full(d));
  return ParamScheme(std::move(levels), margins, SchemeKind::mvlogistic);
}

ParamScheme dset_scheme(const BidirectedGraph& g, std::vector<int> levels, std::optional<std::vector<VarSet>> order) {
  if (static_cast<int>(levels.size()) != g.size()) throw InputError("level list does not match the graph");
  const auto dsets = disconnected_sets(g);
  std::vector<VarSet> margins = dsets;
  if (order) {
    std::vector<VarSet> sorted = *order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != dsets) throw InputError("margin order must list exactly the disconnected sets of the graph");
    margins = *order;
  }
  return ParamScheme(std::move(levels), margins, SchemeKind::dset);
}

bool ModelSpec::constrains(const ParamKey& key) const {
  return std::find(zero_blocks.begin(), zero_blocks.end(), key) != zero_blocks.end();
}

namespace {

Index block_size(std::span<const int> levels, VarSet effect) {
  Index n = 1;
  for (int v : effect.members()) n *= levels[static_cast<std::size_t>(v)] - 1;
  return n;
}

ModelSpec make_model(std::shared_ptr<const ParamScheme> scheme, std::vector<ParamKey> keys) {
  ModelSpec m{std::move(scheme), {}, 0};
  return add_zero_blocks(m, keys);
}

}  // namespace

ModelSpec model_from_graph(const BidirectedGraph& g, std::vector<int> levels, SchemeKind kind,
                           std::optional<std::vector<VarSet>> order) {
  if (static_cast<int>(levels.size()) != g.size()) throw InputError("level list does not match the graph");
  std::shared_ptr<const ParamScheme> scheme;
  switch (kind) {
    case SchemeKind::mvlogistic:
      if (order) throw InputError("a margin order only applies to the disconnected-set scheme");
      scheme = std::make_shared<const ParamScheme>(mvlogistic_scheme(std::move(levels)));
      break;
    case SchemeKind::dset:
      scheme = std::make_shared<const ParamScheme>(dset_scheme(g, std::move(levels), std::move(order)));
      break;
    default:
      throw InputError("graph models use the mvlogistic or dset scheme");
  }
  std::vector<ParamKey> keys;
  for (VarSet d : disconnected_sets(g)) keys.push_back({d, d});
  return make_model(std::move(scheme), std::move(keys));
}

ModelSpec model_undirected(const BidirectedGraph& g, std::vector<int> levels) {
  if (static_cast<int>(levels.size()) != g.size()) throw InputError("level list does not match the graph");
  auto scheme = std::make_shared<const ParamScheme>(loglinear_scheme(std::move(levels)));
  std::vector<ParamKey> keys;
  for (VarSet l : incomplete_sets(g)) keys.push_back({g.all(), l});
  return make_model(std::move(scheme), std::move(keys));
}

ModelSpec add_zero_blocks(const ModelSpec& model, std::span<const ParamKey> extra) {
  ModelSpec out = model;
  for (const auto& key : extra) {
    if (out.scheme->find(key) == nullptr) throw InputError("zero constraint names a block that is not in the scheme");
    if (out.constrains(key)) throw InputError("block is already constrained to zero");
    out.zero_blocks.push_back(key);
    out.q += block_size(out.scheme->levels(), key.effect);
  }
  return out;
}

std::vector<ParamKey> higher_order_keys(const ModelSpec& model, int order) {
  std::vector<ParamKey> out;
  for (const auto& b : model.scheme->blocks()) {
    if (b.key.effect.size() > order && !model.constrains(b.key)) out.push_back(b.key);
  }
  return out;
}

Eigen::VectorXd compute_lambda(const ParamScheme& scheme, const Eigen::VectorXd& pi) {
  if (pi.size() != scheme.cells()) throw InputError("probability vector has the wrong length");
  if ((pi.array() <= 0).any() || !pi.allFinite()) throw InputError("probabilities must be strictly positive");
  Eigen::VectorXd lambda(scheme.num_params());
  VarSet current;
  Eigen::VectorXd log_margin;
  for (const auto& b : scheme.blocks()) {
    if (b.key.margin != current || log_margin.size() == 0) {
      current = b.key.margin;
      log_margin = marginal_vector(scheme.layout(), pi, current).array().log().matrix();
    }
    lambda.segment(b.row_offset, b.rows) = b.contrast * log_margin;
  }
  return lambda;
}

Eigen::VectorXd loglinear_inverse(std::span<const int> levels, const Eigen::VectorXd& theta) {
  const ParamScheme scheme = loglinear_scheme(std::vector<int>(levels.begin(), levels.end()));
  if (theta.size() != scheme.num_params()) throw InputError("theta has the wrong length");
  const CellLayout layout(std::vector<int>(levels.begin(), levels.end()));
  Eigen::VectorXd log_pi = Eigen::VectorXd::Zero(layout.cells());
  for (Index i = 0; i < layout.cells(); ++i) {
    const auto cell = layout.decode(i);
    for (const auto& b : scheme.blocks()) {
      Index row = 0;
      bool active = true;
      for (int v : b.key.effect.members()) {
        const int level = cell[static_cast<std::size_t>(v)];
        if (level == 1) {
          active = false;
          break;
        }
        row = row * (levels[static_cast<std::size_t>(v)] - 1) + (level - 2);
      }
      if (active) log_pi[i] += theta[b.row_offset + row];
    }
  }
  const double shift = log_pi.maxCoeff();
  Eigen::VectorXd pi = (log_pi.array() - shift).exp().matrix();
  return pi / pi.sum();
}

bool running_intersection(std::span<const VarSet> sets) {
  VarSet seen;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const VarSet shared = sets[k] & seen;
    if (k > 0 && !shared.empty()) {
      const bool covered = std::any_of(sets.begin(), sets.begin() + static_cast<std::ptrdiff_t>(k),
                                       [&](VarSet earlier) { return shared.subset_of(earlier); });
      if (!covered) return false;
    }
    seen = seen | sets[k];
  }
  return true;
}

namespace {

std::vector<VarSet> maximal_elements(std::span<const VarSet> sets) {
  std::vector<VarSet> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (i != j && (sets[i].proper_subset_of(sets[j]) || (sets[i] == sets[j] && j < i))) {
        maximal = false;
        break;
      }
    }
    if (maximal) out.push_back(sets[i]);
  }
  return out;
}

bool extend_ordering(const std::vector<VarSet>& sets, std::vector<bool>& used, std::vector<VarSet>& order,
                     std::set<std::vector<bool>>& dead) {
  if (order.size() == sets.size()) return true;
  if (dead.count(used) != 0) return false;
  VarSet seen;
  for (VarSet s : order) seen = seen | s;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (used[i]) continue;
    const VarSet shared = sets[i] & seen;
    const bool ok = shared.empty() ||
                    std::any_of(order.begin(), order.end(), [&](VarSet e) { return shared.subset_of(e); });
    if (!ok) continue;
    used[i] = true;
    order.push_back(sets[i]);
    if (extend_ordering(sets, used, order, dead)) return true;
    order.pop_back();
    used[i] = false;
  }
  dead.insert(used);
  return false;
}

bool some_ordering_has_rip(const std::vector<VarSet>& sets) {
  std::vector<bool> used(sets.size(), false);
  std::vector<VarSet> order;
  std::set<std::vector<bool>> dead;
  return extend_ordering(sets, used, order, dead);
}

}  // namespace

OdVerdict ordered_decomposable(std::span<const VarSet> margins, OdMode mode) {
  OdVerdict verdict;
  for (std::size_t k = 3; k <= margins.size(); ++k) {
    const auto maximal = maximal_elements(margins.first(k));
    const bool ok = mode == OdMode::strict ? running_intersection(maximal) : some_ordering_has_rip(maximal);
    if (!ok) {
      verdict.decomposable = false;
      verdict.failing_prefix.assign(margins.begin(), margins.begin() + static_cast<std::ptrdiff_t>(k));
      return verdict;
    }
  }
  return verdict;
}

}  // namespace bgm
