#include "bgm/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bgm {

namespace {

using nlohmann::json;

json rounded(double x) {
  if (!std::isfinite(x)) return nullptr;
  const double r = std::round(x / kReportPrecision) * kReportPrecision;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

json optional_value(const std::optional<double>& x) { return x ? rounded(*x) : json(nullptr); }

std::string fixed(double x, int decimals) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s(buf);
  // Print -0.00 as 0.00.
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string levels_text(const std::vector<int>& lv) {
  std::string out;
  for (int l : lv) {
    if (!out.empty()) out += ',';
    out += std::to_string(l);
  }
  return out;
}

json model_to_json(const ModelSpec& model, const std::vector<std::string>& labels) {
  const ParamScheme& s = *model.scheme;
  json doc;
  doc["scheme"] = scheme_kind_name(s.kind());
  doc["variables"] = json::array();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    doc["variables"].push_back({{"name", labels[k]}, {"levels", s.levels()[k]}});
  }
  doc["margins"] = json::array();
  for (VarSet m : s.margins()) doc["margins"].push_back(format_set(m, labels));
  doc["assignments"] = json::array();
  for (const auto& a : s.assignments()) {
    json effects = json::array();
    for (VarSet l : a.effects) effects.push_back(format_set(l, labels));
    doc["assignments"].push_back({{"margin", format_set(a.margin, labels)}, {"effects", effects}});
  }
  doc["zero_blocks"] = json::array();
  for (const auto& key : model.zero_blocks) {
    doc["zero_blocks"].push_back({{"margin", format_set(key.margin, labels)}, {"effect", format_set(key.effect, labels)}});
  }
  doc["q"] = model.q;
  doc["shapes"] = {{"cells", s.cells()},
                   {"C", {s.num_params(), s.margin_rows()}},
                   {"T", {s.margin_rows(), s.cells()}}};
  return doc;
}

}  // namespace

std::string scheme_kind_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::loglinear: return "loglinear";
    case SchemeKind::mvlogistic: return "mvlogistic";
    case SchemeKind::dset: return "dset";
    case SchemeKind::custom: return "custom";
  }
  return "custom";
}

std::string model_json(const ModelSpec& model, const std::vector<std::string>& labels) {
  return model_to_json(model, labels).dump(2);
}

std::string fit_report_json(const FitResult& r, const std::vector<std::string>& labels) {
  const auto gof = goodness_of_fit(r);
  json doc;
  doc["model"] = model_to_json(r.model, labels);
  doc["statistics"] = {{"N", rounded(r.observed.sum())},
                       {"deviance", rounded(gof.deviance)},
                       {"pearson", rounded(gof.pearson)},
                       {"df", gof.df},
                       {"p_deviance", rounded(gof.p_deviance)},
                       {"p_pearson", rounded(gof.p_pearson)},
                       {"loglik", rounded(r.loglik)}};
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"step", rounded(t.step)},
                     {"constraint_norm", rounded(t.constraint_norm)},
                     {"score_norm", rounded(t.score_norm)}});
  }
  doc["convergence"] = {{"converged", r.converged}, {"iterations", r.iterations}, {"trace", trace}};

  const auto se = standard_errors(r);
  const auto z = studentize(r);
  doc["parameters"] = json::array();
  for (const auto& b : r.model.scheme->blocks()) {
    const bool fixed_block = r.model.constrains(b.key);
    for (Index k = 0; k < b.rows; ++k) {
      const auto row = static_cast<std::size_t>(b.row_offset + k);
      doc["parameters"].push_back({{"margin", format_set(b.key.margin, labels)},
                                   {"effect", format_set(b.key.effect, labels)},
                                   {"levels", b.row_levels[static_cast<std::size_t>(k)]},
                                   {"estimate", rounded(r.lambda_hat[b.row_offset + k])},
                                   {"se", optional_value(se[row])},
                                   {"studentized", optional_value(z[row])},
                                   {"constrained", fixed_block}});
    }
  }
  const CellLayout& layout = r.model.scheme->layout();
  doc["cells"] = json::array();
  for (Index i = 0; i < layout.cells(); ++i) {
    doc["cells"].push_back({{"cell", layout.decode(i)},
                            {"observed", rounded(r.observed[i])},
                            {"expected", rounded(r.mu_hat[i])}});
  }
  return doc.dump(2);
}

std::string fit_summary_line(const FitResult& r) {
  std::ostringstream out;
  out << "G2=" << fixed(r.deviance, 4) << " X2=" << fixed(r.pearson, 4) << " df=" << r.df
      << " iter=" << r.iterations << " converged=" << (r.converged ? "true" : "false");
  return out.str();
}

std::string format_assignment_table(const ModelSpec& model, const std::vector<std::string>& labels) {
  std::ostringstream out;
  out << "scheme " << scheme_kind_name(model.scheme->kind()) << ", q = " << model.q << "\n";
  for (const auto& a : model.scheme->assignments()) {
    out << format_set(a.margin, labels) << ":";
    for (VarSet l : a.effects) {
      const std::string name = format_set(l, labels);
      out << ' ' << (model.constrains({a.margin, l}) ? "[" + name + "]" : name);
    }
    out << "\n";
  }
  return out.str();
}

std::string format_estimate_table(const FitResult& r, const std::vector<std::string>& labels) {
  const auto se = standard_errors(r);
  const auto z = studentize(r);
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-12s %-8s %10s %10s %10s\n", "margin", "effect", "levels", "estimate",
                "s.e.", "stud.");
  out << line;
  for (const auto& b : r.model.scheme->blocks()) {
    for (Index k = 0; k < b.rows; ++k) {
      const auto row = static_cast<std::size_t>(b.row_offset + k);
      std::snprintf(line, sizeof line, "%-12s %-12s %-8s %10s %10s %10s\n", format_set(b.key.margin, labels).c_str(),
                    format_set(b.key.effect, labels).c_str(),
                    levels_text(b.row_levels[static_cast<std::size_t>(k)]).c_str(),
                    fixed(r.lambda_hat[b.row_offset + k], 2).c_str(), se[row] ? fixed(*se[row], 3).c_str() : "",
                    z[row] ? fixed(*z[row], 2).c_str() : "");
      out << line;
    }
  }
  return out.str();
}

}  // namespace bgm
