#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bgm/graph.hpp"
#include "bgm/table.hpp"
#include "bgm/var_set.hpp"

namespace bgm {

/// Baseline contrast matrix for the effect `effect` inside margin `margin`:
/// the Kronecker product, over the margin's variables in declared order, of
/// (-1 | I) for members of the effect and the baseline selector (1, 0, ..., 0)
/// otherwise. Rows are indexed by non-baseline level combinations of the
/// effect's variables (last fastest), columns by the margin's cells.
Eigen::MatrixXd contrast_block(std::span<const int> levels, VarSet margin, VarSet effect);

/// Effects housed by one margin of a hierarchical complete parameterization.
struct EffectAssignment {
  VarSet margin;
  std::vector<VarSet> effects;
};

/// Assigns every nonempty subset of the `d` variables to the first margin
/// that contains it. The full set is appended when missing. Throws
/// InputError when a margin is contained in an earlier one.
std::vector<EffectAssignment> generate_assignments(std::span<const VarSet> margins, int d);

/// Identifies one parameter block lambda^M_L.
struct ParamKey {
  VarSet margin;
  VarSet effect;

  friend bool operator==(const ParamKey&, const ParamKey&) = default;
  friend auto operator<=>(const ParamKey&, const ParamKey&) = default;
};

/// Layout of one parameter block inside the stacked vector lambda = C log(T pi).
struct ParamBlock {
  ParamKey key;
  Index row_offset = 0;      ///< first row in C / lambda
  Index rows = 0;            ///< prod over the effect of (b_v - 1)
  Index margin_offset = 0;   ///< first row of the margin's block in T
  Index margin_rows = 0;     ///< cells of the margin
  /// 1-based level combination of the effect's variables for every row.
  std::vector<std::vector<int>> row_levels;
  /// contrast_block(levels, margin, effect), rows x margin_rows.
  Eigen::MatrixXd contrast;
};

enum class SchemeKind { loglinear, mvlogistic, dset, custom };

/// Hierarchical complete marginal log-linear parameterization.
class ParamScheme {
 public:
  ParamScheme(std::vector<int> levels, std::span<const VarSet> margins, SchemeKind kind = SchemeKind::custom);

  [[nodiscard]] SchemeKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<int>& levels() const { return levels_; }
  [[nodiscard]] int dimension() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] Index cells() const { return layout_.cells(); }
  [[nodiscard]] const CellLayout& layout() const { return layout_; }
  [[nodiscard]] const std::vector<VarSet>& margins() const { return margins_; }
  [[nodiscard]] const std::vector<EffectAssignment>& assignments() const { return assignments_; }
  [[nodiscard]] const std::vector<ParamBlock>& blocks() const { return blocks_; }
  /// Block for `key`, or nullptr.
  [[nodiscard]] const ParamBlock* find(const ParamKey& key) const;
  /// Block housing effect `effect`; every effect lives in exactly one margin.
  [[nodiscard]] const ParamBlock& block_for_effect(VarSet effect) const;
  /// Block-diagonal contrast matrix, (t - 1) x m. Materialized on each call;
  /// internal computations work block by block instead.
  [[nodiscard]] Eigen::MatrixXd C() const;
  /// Stacked marginalization matrix, m x t. Materialized on each call.
  [[nodiscard]] Eigen::MatrixXd T() const;
  [[nodiscard]] Index num_params() const { return num_params_; }
  /// Total number of margin cells m.
  [[nodiscard]] Index margin_rows() const { return margin_rows_; }

 private:
  SchemeKind kind_;
  std::vector<int> levels_;
  std::vector<VarSet> margins_;
  std::vector<EffectAssignment> assignments_;
  std::vector<ParamBlock> blocks_;
  CellLayout layout_;
  Index num_params_ = 0;
  Index margin_rows_ = 0;
};

/// Ordinary log-linear parameters theta: the single margin V.
ParamScheme loglinear_scheme(std::vector<int> levels);
/// Multivariate logistic parameters eta: every nonempty margin, canonical order.
ParamScheme mvlogistic_scheme(std::vector<int> levels);
/// Disconnected-set parameterization of `g`. `order`, when given, must list
/// exactly the disconnected sets in a non-decreasing arrangement.
ParamScheme dset_scheme(const BidirectedGraph& g, std::vector<int> levels,
                        std::optional<std::vector<VarSet>> order = std::nullopt);

/// A parameterization together with the blocks constrained to zero.
struct ModelSpec {
  std::shared_ptr<const ParamScheme> scheme;
  std::vector<ParamKey> zero_blocks;
  Index q = 0;

  [[nodiscard]] bool constrains(const ParamKey& key) const;
};

/// Bi-directed graph model: eta^D = lambda^D_D = 0 for every disconnected set D.
/// `kind` must be mvlogistic or dset.
ModelSpec model_from_graph(const BidirectedGraph& g, std::vector<int> levels, SchemeKind kind,
                           std::optional<std::vector<VarSet>> order = std::nullopt);

/// Undirected graphical log-linear model on the same skeleton: theta_L = 0
/// for every incomplete set L.
ModelSpec model_undirected(const BidirectedGraph& g, std::vector<int> levels);

/// Adds zero constraints. Throws InputError on unknown or duplicate keys.
ModelSpec add_zero_blocks(const ModelSpec& model, std::span<const ParamKey> extra);

/// Keys of every not-yet-constrained block whose effect has more than
/// `order` variables.
std::vector<ParamKey> higher_order_keys(const ModelSpec& model, int order);

/// lambda = C log(T pi). Throws InputError on non-positive entries.
Eigen::VectorXd compute_lambda(const ParamScheme& scheme, const Eigen::VectorXd& pi);

/// Inverse of the ordinary log-linear map: the strictly positive
/// distribution whose theta vector (loglinear_scheme order) is `theta`.
Eigen::VectorXd loglinear_inverse(std::span<const int> levels, const Eigen::VectorXd& theta);

enum class OdMode {
  strict,  ///< maximal elements taken in order of first appearance
  search,  ///< any ordering of the maximal elements at each prefix
};

struct OdVerdict {
  bool decomposable = true;
  /// Shortest failing prefix of the input sequence when not decomposable.
  std::vector<VarSet> failing_prefix;
};

/// Ordered decomposability of a non-decreasing margin sequence: for every
/// prefix of length >= 3 the maximal elements must satisfy the running
/// intersection property.
OdVerdict ordered_decomposable(std::span<const VarSet> margins, OdMode mode = OdMode::strict);

/// Running intersection property of `sets` in the given order.
bool running_intersection(std::span<const VarSet> sets);

}  // namespace bgm
