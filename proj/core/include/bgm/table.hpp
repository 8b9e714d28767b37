#pragma once

#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bgm/var_set.hpp"

namespace bgm {

using Index = Eigen::Index;

struct VariableSpec {
  std::string name;
  int levels = 2;

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

/// Number of cells of the margin `m` of a table with the given level counts.
Index margin_cells(std::span<const int> levels, VarSet m);

/// Maps between 1-based cell coordinates and flat indices, last variable
/// varying fastest.
class CellLayout {
 public:
  explicit CellLayout(std::vector<int> levels);

  [[nodiscard]] int dimension() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] Index cells() const { return cells_; }
  [[nodiscard]] const std::vector<int>& levels() const { return levels_; }

  [[nodiscard]] Index encode(std::span<const int> cell) const;
  [[nodiscard]] std::vector<int> decode(Index flat) const;
  /// Flat index, within the margin `m`, of the full-table cell `flat`.
  [[nodiscard]] Index project(Index flat, VarSet m) const;

 private:
  std::vector<int> levels_;
  std::vector<Index> strides_;
  Index cells_ = 1;
};

/// Observed or fitted cell counts over a set of categorical variables.
class ContingencyTable {
 public:
  ContingencyTable(std::vector<VariableSpec> variables, Eigen::VectorXd counts);

  [[nodiscard]] const std::vector<VariableSpec>& variables() const { return variables_; }
  [[nodiscard]] int dimension() const { return static_cast<int>(variables_.size()); }
  [[nodiscard]] std::vector<int> levels() const;
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] const CellLayout& layout() const { return layout_; }
  [[nodiscard]] Index cells() const { return layout_.cells(); }
  [[nodiscard]] const Eigen::VectorXd& counts() const { return counts_; }
  [[nodiscard]] double total() const { return counts_.sum(); }
  [[nodiscard]] int index_of(std::string_view name) const;
  /// Count at 1-based cell coordinates.
  [[nodiscard]] double at(std::span<const int> cell) const { return counts_[layout_.encode(cell)]; }

 private:
  std::vector<VariableSpec> variables_;
  CellLayout layout_;
  Eigen::VectorXd counts_;
};

/// Sums `values` (a full-table vector) over the variables outside `m`.
Eigen::VectorXd marginal_vector(const CellLayout& layout, const Eigen::VectorXd& values, VarSet m);

/// Marginal table over the variables in `m`, variable order inherited.
ContingencyTable marginalize(const ContingencyTable& t, VarSet m);

/// Table with variables permuted into the order given by `names`.
ContingencyTable reorder(const ContingencyTable& t, const std::vector<std::string>& names);

/// 0/1 block mapping the full probability vector to the cells of margin `m`.
Eigen::MatrixXd marginalization_block(std::span<const int> levels, VarSet m);

/// Stacked marginalization blocks, one per margin, in the given order.
Eigen::MatrixXd build_T(std::span<const int> levels, std::span<const VarSet> margins);

/// Cross-product ratio of the 2x2 slice of variables `a` x `b` at the given
/// levels, with all remaining variables fixed by `given` (name -> level).
double conditional_odds_ratio(const ContingencyTable& t, int a, int b,
                              const std::map<std::string, int>& given,
                              std::pair<int, int> a_levels = {1, 2},
                              std::pair<int, int> b_levels = {1, 2});

/// CSV: header of variable names plus a final "count" column; one row per
/// cell with 1-based levels. An optional "# levels: 2,3,2" line fixes the
/// level counts, otherwise they are the largest observed index.
ContingencyTable parse_table(std::istream& in);
ContingencyTable parse_table_text(std::string_view text);
ContingencyTable load_table(const std::string& path);

}  // namespace bgm
