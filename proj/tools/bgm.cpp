// bgm: graph analysis, parameterizations and model fitting from the command line.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bgm/fit.hpp"
#include "bgm/graph.hpp"
#include "bgm/mll.hpp"
#include "bgm/report.hpp"
#include "bgm/table.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;

using namespace bgm;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == ';') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || value < 2) throw InputError("invalid level count '" + item + "'");
    out.push_back(value);
  }
  return out;
}

SchemeKind parse_scheme(const std::string& name) {
  if (name == "dset") return SchemeKind::dset;
  if (name == "mvlogistic") return SchemeKind::mvlogistic;
  if (name == "undirected") return SchemeKind::loglinear;
  throw InputError("unknown scheme '" + name + "'");
}

std::optional<std::vector<VarSet>> parse_order(const BidirectedGraph& g, const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<VarSet> out;
  for (const auto& item : split_list(text)) out.push_back(g.parse_set(item));
  return out;
}

ModelSpec build_model(const BidirectedGraph& g, const std::vector<int>& levels, const std::string& scheme,
                      const std::string& order) {
  const SchemeKind kind = parse_scheme(scheme);
  if (kind == SchemeKind::loglinear) {
    if (!order.empty()) throw InputError("--order applies to the dset scheme only");
    return model_undirected(g, levels);
  }
  if (kind == SchemeKind::mvlogistic && !order.empty()) throw InputError("--order applies to the dset scheme only");
  return model_from_graph(g, levels, kind, parse_order(g, order));
}

/// "M:L" names a block directly; a bare "L" means the block housing L.
ParamKey parse_key(const BidirectedGraph& g, const ModelSpec& model, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return model.scheme->block_for_effect(g.parse_set(text)).key;
  return {g.parse_set(text.substr(0, colon)), g.parse_set(text.substr(colon + 1))};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

struct IndependenciesArgs {
  std::string graph;
  bool reduce = false;
};

int run_independencies(const IndependenciesArgs& a) {
  const auto g = load_graph(a.graph);
  const auto dsets = disconnected_sets(g);
  std::cout << "disconnected sets (" << dsets.size() << "):";
  for (VarSet d : dsets) std::cout << ' ' << g.format_set(d);
  std::cout << "\n";
  const auto statements = independence_statements(g, a.reduce);
  std::cout << (a.reduce ? "reduced statements (" : "statements (") << statements.size() << "):\n";
  for (const auto& s : statements) std::cout << "  " << format_statement(g, s) << "\n";
  if (has_chordless_4chain(g)) {
    std::cout << "chordless 4-chain present: no Markov-equivalent DAG\n";
  } else {
    std::cout << "no chordless 4-chain: a Markov-equivalent DAG exists\n";
  }
  return 0;
}

struct ParamsArgs {
  std::string graph;
  std::string data;
  std::string levels;
  std::string scheme = "dset";
  std::string order;
  std::string format = "text";
};

/// Table with its variables in graph node order.
ContingencyTable load_matching_table(const BidirectedGraph& g, const std::string& path) {
  const auto table = load_table(path);
  auto names = table.names();
  auto nodes = g.labels();
  std::sort(names.begin(), names.end());
  std::sort(nodes.begin(), nodes.end());
  if (names != nodes) throw InputError("graph nodes and table variables in '" + path + "' differ");
  return reorder(table, g.labels());
}

int run_params(const ParamsArgs& a) {
  const auto g = load_graph(a.graph);
  std::vector<int> levels;
  if (!a.data.empty()) {
    levels = load_matching_table(g, a.data).levels();
  } else if (!a.levels.empty()) {
    levels = parse_levels(a.levels);
  } else {
    throw InputError("params needs --data or --levels");
  }
  const auto model = build_model(g, levels, a.scheme, a.order);
  if (a.format == "json") {
    std::cout << model_json(model, g.labels()) << "\n";
  } else {
    std::cout << format_assignment_table(model, g.labels());
  }
  return 0;
}

struct CheckOdArgs {
  std::string margins;
  std::string mode = "strict";
};

int run_check_od(const CheckOdArgs& a) {
  // Without a graph every character is a variable label, sorted.
  const auto items = split_list(a.margins);
  std::vector<std::string> labels;
  for (const auto& item : items)
    for (char c : item) labels.emplace_back(1, c);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() > static_cast<std::size_t>(kMaxVariables)) throw InputError("too many variables");
  std::vector<VarSet> margins;
  for (const auto& item : items) {
    VarSet m;
    for (char c : item) {
      const int v = static_cast<int>(std::find(labels.begin(), labels.end(), std::string(1, c)) - labels.begin());
      if (m.contains(v)) throw InputError("variable '" + std::string(1, c) + "' repeated in margin '" + item + "'");
      m = m.with(v);
    }
    margins.push_back(m);
  }
  if (margins.empty()) throw InputError("no margins given");
  if (a.mode != "strict" && a.mode != "search") throw InputError("unknown mode '" + a.mode + "'");
  const auto verdict = ordered_decomposable(margins, a.mode == "strict" ? OdMode::strict : OdMode::search);
  std::cout << a.mode << ": " << (verdict.decomposable ? "true" : "false") << "\n";
  if (!verdict.decomposable) {
    std::cout << "failing prefix:";
    for (VarSet m : verdict.failing_prefix) std::cout << ' ' << format_set(m, labels);
    std::cout << "\n";
  }
  return 0;
}

struct FitArgs {
  std::string graph;
  std::string data;
  std::string scheme = "dset";
  std::string order;
  std::vector<std::string> extra_zero;
  int zero_above_order = 0;
  FitSettings settings;
  std::string out;
  std::string format = "json";
  bool show = false;
};

int run_fit(const FitArgs& a) {
  const auto g = load_graph(a.graph);
  const auto table = load_matching_table(g, a.data);
  ModelSpec model = build_model(g, table.levels(), a.scheme, a.order);
  std::vector<ParamKey> extra;
  for (const auto& text : a.extra_zero) extra.push_back(parse_key(g, model, text));
  model = add_zero_blocks(model, extra);
  if (a.zero_above_order > 0) model = add_zero_blocks(model, higher_order_keys(model, a.zero_above_order));

  const FitResult r = fit(table, model, a.settings);
  std::cout << fit_summary_line(r) << "\n";
  if (a.show) std::cout << format_assignment_table(r.model, g.labels()) << format_estimate_table(r, g.labels());
  if (!a.out.empty()) {
    if (a.format == "json") {
      write_file(a.out, fit_report_json(r, g.labels()) + "\n");
    } else {
      write_file(a.out, fit_summary_line(r) + "\n" + format_assignment_table(r.model, g.labels()) +
                            format_estimate_table(r, g.labels()));
    }
  }
  if (!r.converged) {
    std::cerr << "bgm: no convergence after " << r.iterations << " iterations\n";
    return kExitNoConvergence;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-directed graph models for marginal independence in contingency tables"};
  app.require_subcommand(1);

  IndependenciesArgs ind;
  auto* cmd_ind = app.add_subcommand("independencies", "List disconnected sets and independence statements");
  cmd_ind->add_option("graph", ind.graph, "Graph JSON file")->required();
  cmd_ind->add_flag("--reduce", ind.reduce, "Drop statements implied by others");

  ParamsArgs par;
  auto* cmd_par = app.add_subcommand("params", "Show the parameter assignment of a model");
  cmd_par->add_option("graph", par.graph, "Graph JSON file")->required();
  auto* data_opt = cmd_par->add_option("--data", par.data, "Table CSV supplying the levels");
  cmd_par->add_option("--levels", par.levels, "Comma-separated level counts in node order")->excludes(data_opt);
  cmd_par->add_option("--scheme", par.scheme, "dset, mvlogistic or undirected")->capture_default_str();
  cmd_par->add_option("--order", par.order, "Comma-separated disconnected-set order");
  cmd_par->add_option("--format", par.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  CheckOdArgs od;
  auto* cmd_od = app.add_subcommand("check-od", "Test ordered decomposability of a margin sequence");
  cmd_od->add_option("margins", od.margins, "Comma-separated margins, e.g. 13,14,134")->required();
  cmd_od->add_option("--mode", od.mode, "strict or search")->capture_default_str();

  FitArgs fa;
  auto* cmd_fit = app.add_subcommand("fit", "Fit a model by constrained maximum likelihood");
  cmd_fit->add_option("graph", fa.graph, "Graph JSON file")->required();
  cmd_fit->add_option("data", fa.data, "Table CSV file")->required();
  cmd_fit->add_option("--scheme", fa.scheme, "dset, mvlogistic or undirected")->capture_default_str();
  cmd_fit->add_option("--order", fa.order, "Comma-separated disconnected-set order");
  cmd_fit->add_option("--extra-zero", fa.extra_zero, "Additional zero block, M:L or L (repeatable)");
  cmd_fit->add_option("--zero-above-order", fa.zero_above_order, "Constrain every effect with more variables");
  cmd_fit->add_option("--tol", fa.settings.tol_constraint, "Constraint tolerance")->capture_default_str();
  cmd_fit->add_option("--tol-score", fa.settings.tol_score, "Scaled score tolerance")->capture_default_str();
  cmd_fit->add_option("--max-iter", fa.settings.max_iter, "Iteration limit")->capture_default_str();
  cmd_fit->add_option("--out", fa.out, "Write the report to this file");
  cmd_fit->add_option("--format", fa.format, "Report format, json or text")->check(CLI::IsMember({"json", "text"}));
  cmd_fit->add_flag("--show", fa.show, "Print assignment and estimate tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*cmd_ind) return run_independencies(ind);
    if (*cmd_par) return run_params(par);
    if (*cmd_od) return run_check_od(od);
    if (*cmd_fit) return run_fit(fa);
  } catch (const InputError& e) {
    std::cerr << "bgm: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "bgm: numerical failure: " << e.what() << "\n";
    return kExitNoConvergence;
  }
  return kExitInput;
}
