#include "bgm/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bgm {

Index margin_cells(std::span<const int> levels, VarSet m) {
  Index n = 1;
  for (int v : m.members()) n *= levels[static_cast<std::size_t>(v)];
  return n;
}

CellLayout::CellLayout(std::vector<int> levels) : levels_(std::move(levels)), strides_(levels_.size()) {
  if (levels_.empty()) throw InputError("table needs at least one variable");
  if (levels_.size() > static_cast<std::size_t>(kMaxVariables)) {
    throw InputError("at most " + std::to_string(kMaxVariables) + " variables are supported");
  }
  for (std::size_t k = levels_.size(); k-- > 0;) {
    if (levels_[k] < 2) throw InputError("every variable needs at least 2 levels");
    strides_[k] = cells_;
    cells_ *= levels_[k];
  }
}

Index CellLayout::encode(std::span<const int> cell) const {
  if (cell.size() != levels_.size()) throw InputError("cell has wrong number of coordinates");
  Index flat = 0;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (cell[k] < 1 || cell[k] > levels_[k]) throw InputError("cell coordinate out of range");
    flat += static_cast<Index>(cell[k] - 1) * strides_[k];
  }
  return flat;
}

std::vector<int> CellLayout::decode(Index flat) const {
  if (flat < 0 || flat >= cells_) throw InputError("flat cell index out of range");
  std::vector<int> cell(levels_.size());
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    cell[k] = static_cast<int>((flat / strides_[k]) % levels_[k]) + 1;
  }
  return cell;
}

Index CellLayout::project(Index flat, VarSet m) const {
  Index out = 0;
  for (int v : m.members()) {
    const auto k = static_cast<std::size_t>(v);
    out = out * levels_[k] + (flat / strides_[k]) % levels_[k];
  }
  return out;
}

ContingencyTable::ContingencyTable(std::vector<VariableSpec> variables, Eigen::VectorXd counts)
    : variables_(std::move(variables)),
      layout_([this] {
        std::vector<int> lv;
        for (const auto& v : variables_) lv.push_back(v.levels);
        return lv;
      }()),
      counts_(std::move(counts)) {
  if (counts_.size() != layout_.cells()) {
    throw InputError("count vector has " + std::to_string(counts_.size()) + " entries, table has " +
                     std::to_string(layout_.cells()) + " cells");
  }
  for (Index i = 0; i < counts_.size(); ++i) {
    if (!std::isfinite(counts_[i]) || counts_[i] < 0) throw InputError("counts must be finite and non-negative");
  }
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (v.name.empty() || !seen.insert(v.name).second) throw InputError("variable names must be unique and nonempty");
  }
}

std::vector<int> ContingencyTable::levels() const { return layout_.levels(); }

std::vector<std::string> ContingencyTable::names() const {
  std::vector<std::string> out;
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

int ContingencyTable::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return static_cast<int>(i);
  }
  throw InputError("unknown variable '" + std::string(name) + "'");
}

Eigen::VectorXd marginal_vector(const CellLayout& layout, const Eigen::VectorXd& values, VarSet m) {
  if (m.empty() || !m.subset_of(VarSet::full(layout.dimension()))) throw InputError("invalid margin");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(margin_cells(layout.levels(), m));
  for (Index i = 0; i < layout.cells(); ++i) out[layout.project(i, m)] += values[i];
  return out;
}

ContingencyTable marginalize(const ContingencyTable& t, VarSet m) {
  std::vector<VariableSpec> vars;
  for (int v : m.members()) {
    if (v >= t.dimension()) throw InputError("margin names an unknown variable");
    vars.push_back(t.variables()[static_cast<std::size_t>(v)]);
  }
  return ContingencyTable(std::move(vars), marginal_vector(t.layout(), t.counts(), m));
}

ContingencyTable reorder(const ContingencyTable& t, const std::vector<std::string>& names) {
  if (names.size() != t.variables().size()) throw InputError("variable lists differ in length");
  std::vector<int> perm;
  std::vector<VariableSpec> vars;
  for (const auto& n : names) {
    perm.push_back(t.index_of(n));
    vars.push_back(t.variables()[static_cast<std::size_t>(perm.back())]);
  }
  std::vector<int> lv;
  for (const auto& v : vars) lv.push_back(v.levels);
  const CellLayout out_layout(lv);
  Eigen::VectorXd counts(t.cells());
  std::vector<int> src(perm.size());
  for (Index i = 0; i < t.cells(); ++i) {
    const auto cell = out_layout.decode(i);
    for (std::size_t k = 0; k < perm.size(); ++k) src[static_cast<std::size_t>(perm[k])] = cell[k];
    counts[i] = t.at(src);
  }
  return ContingencyTable(std::move(vars), std::move(counts));
}

Eigen::MatrixXd marginalization_block(std::span<const int> levels, VarSet m) {
  const CellLayout layout(std::vector<int>(levels.begin(), levels.end()));
  if (m.empty()) throw InputError("empty margin");
  if (!m.subset_of(VarSet::full(layout.dimension()))) throw InputError("margin names an unknown variable");
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(margin_cells(levels, m), layout.cells());
  for (Index i = 0; i < layout.cells(); ++i) block(layout.project(i, m), i) = 1.0;
  return block;
}

Eigen::MatrixXd build_T(std::span<const int> levels, std::span<const VarSet> margins) {
  Index rows = 0;
  for (VarSet m : margins) {
    if (m.empty()) throw InputError("empty margin");
    rows += margin_cells(levels, m);
  }
  const CellLayout layout(std::vector<int>(levels.begin(), levels.end()));
  Eigen::MatrixXd T(rows, layout.cells());
  Index r = 0;
  for (VarSet m : margins) {
    const Eigen::MatrixXd block = marginalization_block(levels, m);
    T.middleRows(r, block.rows()) = block;
    r += block.rows();
  }
  return T;
}

double conditional_odds_ratio(const ContingencyTable& t, int a, int b,
                              const std::map<std::string, int>& given,
                              std::pair<int, int> a_levels, std::pair<int, int> b_levels) {
  const int d = t.dimension();
  if (a == b || a < 0 || b < 0 || a >= d || b >= d) throw InputError("odds ratio needs two distinct variables");
  std::vector<int> cell(static_cast<std::size_t>(d), 0);
  for (const auto& [name, level] : given) {
    const int v = t.index_of(name);
    if (v == a || v == b) throw InputError("conditioning set contains an odds-ratio variable");
    cell[static_cast<std::size_t>(v)] = level;
  }
  for (int v = 0; v < d; ++v) {
    if (v != a && v != b && cell[static_cast<std::size_t>(v)] == 0) {
      throw InputError("conditioning assignment misses variable '" + t.variables()[static_cast<std::size_t>(v)].name + "'");
    }
  }
  auto count = [&](int la, int lb) {
    cell[static_cast<std::size_t>(a)] = la;
    cell[static_cast<std::size_t>(b)] = lb;
    const double n = t.at(cell);
    if (n <= 0) throw InputError("zero cell in odds-ratio slice");
    return n;
  };
  return count(a_levels.first, b_levels.first) * count(a_levels.second, b_levels.second) /
         (count(a_levels.first, b_levels.second) * count(a_levels.second, b_levels.first));
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

int parse_int(const std::string& s, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw InputError(std::string("non-integer ") + what + " '" + s + "'");
  }
  if (used != s.size()) throw InputError(std::string("non-integer ") + what + " '" + s + "'");
  return v;
}

double parse_count(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("invalid count '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw InputError("invalid count '" + s + "'");
  if (v < 0) throw InputError("negative count '" + s + "'");
  return v;
}

}  // namespace

ContingencyTable parse_table(std::istream& in) {
  std::vector<std::string> header;
  std::vector<int> declared;
  std::vector<std::pair<std::vector<int>, double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string body = trim(line.substr(1));
      constexpr std::string_view key = "levels:";
      if (body.rfind(key, 0) == 0) {
        declared.clear();
        for (const auto& tok : split(trim(body.substr(key.size())), ',')) {
          declared.push_back(parse_int(tok, "level count"));
        }
      }
      continue;
    }
    auto fields = split(line, ',');
    if (header.empty()) {
      if (fields.size() < 2 || fields.back() != "count") {
        throw InputError("table header must list variables followed by a 'count' column");
      }
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
    }
    std::vector<int> cell;
    for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
      const int level = parse_int(fields[k], "level");
      if (level < 1) throw InputError("line " + std::to_string(line_no) + ": levels are 1-based");
      cell.push_back(level);
    }
    rows.emplace_back(std::move(cell), parse_count(fields.back()));
  }
  if (header.empty()) throw InputError("table has no header");
  const std::size_t d = header.size() - 1;
  std::vector<int> levels(d, 0);
  for (const auto& [cell, n] : rows)
    for (std::size_t k = 0; k < d; ++k) levels[k] = std::max(levels[k], cell[k]);
  if (!declared.empty()) {
    if (declared.size() != d) throw InputError("levels declaration does not match the header");
    for (std::size_t k = 0; k < d; ++k) {
      if (levels[k] > declared[k]) throw InputError("observed level exceeds declared levels for '" + header[k] + "'");
      levels[k] = declared[k];
    }
  }
  std::vector<VariableSpec> vars;
  for (std::size_t k = 0; k < d; ++k) vars.push_back({header[k], levels[k]});
  const CellLayout layout(levels);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(layout.cells());
  std::vector<bool> filled(static_cast<std::size_t>(layout.cells()), false);
  for (const auto& [cell, n] : rows) {
    const Index i = layout.encode(cell);
    if (filled[static_cast<std::size_t>(i)]) throw InputError("duplicate cell row in table");
    filled[static_cast<std::size_t>(i)] = true;
    counts[i] = n;
  }
  return ContingencyTable(std::move(vars), std::move(counts));
}

ContingencyTable parse_table_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_table(in);
}

ContingencyTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open table file '" + path + "'");
  return parse_table(in);
}

}  // namespace bgm
