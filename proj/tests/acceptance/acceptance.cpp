// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "bgm/fit.hpp"
#include "bgm/graph.hpp"
#include "bgm/mll.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace bgm;
using bgm::testing::fixture_graph;
using bgm::testing::fixture_table;

namespace {

/// Collects the failed sub-checks of one criterion.
class Criterion {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) failed_ += (failed_.empty() ? "" : "; ") + what;
  }
  void near(double value, double target, double tol, const std::string& what) {
    std::ostringstream s;
    s << what << " " << value << " vs " << target << " +-" << tol;
    check(std::abs(value - target) <= tol, s.str());
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : ", ") + text; }
  [[nodiscard]] bool ok() const { return failed_.empty(); }
  [[nodiscard]] std::string detail() const { return ok() ? notes_ : failed_; }

 private:
  std::string failed_;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

/// Deviance or Pearson statistic, whichever is closer to `target`.
double closer_statistic(const FitResult& r, double target) {
  return std::abs(r.deviance - target) <= std::abs(r.pearson - target) ? r.deviance : r.pearson;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

FitSettings tight() {
  FitSettings s;
  s.tol_constraint = 1e-11;
  s.tol_score = 1e-10;
  return s;
}

/// Estimate and studentized value of the first row of the block housing `effect`.
std::pair<double, double> estimate(const FitResult& r, VarSet effect) {
  const auto& b = r.model.scheme->block_for_effect(effect);
  const auto z = studentize(r);
  const auto row = static_cast<std::size_t>(b.row_offset);
  return {r.lambda_hat[b.row_offset], z[row].value_or(std::nan(""))};
}

Criterion coppen_chain() {
  Criterion c;
  const auto g = fixture_graph("chain4");
  const auto t = fixture_table("coppen", g);
  const auto start = std::chrono::steady_clock::now();
  const auto r = fit(t, model_from_graph(g, t.levels(), SchemeKind::dset));
  const double elapsed = seconds_since(start);
  c.check(r.converged, "did not converge");
  c.near(closer_statistic(r, 8.61), 8.61, 0.01, "statistic");
  c.check(r.df == 5, "df " + std::to_string(r.df));
  c.check(elapsed < 1.0, "runtime " + fixed(elapsed, 3) + " s");
  c.note("G2=" + fixed(r.deviance) + " X2=" + fixed(r.pearson) + " df=" + std::to_string(r.df) + " iter=" +
         std::to_string(r.iterations) + " " + fixed(elapsed, 3) + " s");
  return c;
}

Criterion coppen_estimates() {
  Criterion c;
  const auto g = fixture_graph("chain4");
  const auto t = fixture_table("coppen", g);
  const auto mv = fit(t, model_from_graph(g, t.levels(), SchemeKind::mvlogistic));
  struct Row {
    const char* effect;
    double value;
    double stud;
  };
  const Row rows[] = {{"1", -0.28, -2.62},   {"2", -0.13, -1.23},  {"3", 0.21, 1.95},   {"4", 0.24, 2.31},
                      {"12", -0.72, -3.47},  {"23", -1.12, -5.32}, {"34", 0.79, 3.80},  {"123", 0.16, 0.36},
                      {"234", -0.90, -2.03}, {"1234", 0.15, 0.16}};
  for (const auto& row : rows) {
    const auto [value, stud] = estimate(mv, g.parse_set(row.effect));
    c.near(value, row.value, 0.01, std::string("eta ") + row.effect);
    c.near(stud, row.stud, 0.05, std::string("stud ") + row.effect);
  }
  const auto ds = fit(t, model_from_graph(g, t.levels(), SchemeKind::dset));
  const Row dset_rows[] = {{"23", -0.78, -1.80}, {"234", -1.02, -1.63}};
  for (const auto& row : dset_rows) {
    const auto [value, stud] = estimate(ds, g.parse_set(row.effect));
    c.near(value, row.value, 0.01, std::string("lambda 1234/") + row.effect);
    c.near(stud, row.stud, 0.05, std::string("stud 1234/") + row.effect);
  }
  c.note("10 eta and 2 dset estimates with studentized values");
  return c;
}

Criterion coppen_reduced() {
  Criterion c;
  const auto g = fixture_graph("chain4");
  const auto t = fixture_table("coppen", g);
  const std::vector<ParamKey> top{{g.all(), g.all()}};
  const auto r = fit(t, add_zero_blocks(model_from_graph(g, t.levels(), SchemeKind::dset), top));
  c.check(r.converged, "did not converge");
  c.near(closer_statistic(r, 8.63), 8.63, 0.01, "statistic");
  c.check(r.df == 6, "df " + std::to_string(r.df));
  c.note("G2=" + fixed(r.deviance) + " X2=" + fixed(r.pearson) + " df=" + std::to_string(r.df));
  return c;
}

Criterion coppen_undirected() {
  Criterion c;
  const auto g = fixture_graph("coppen_12_234");
  const auto t = fixture_table("coppen", g);
  const auto r = fit(t, model_undirected(g, t.levels()));
  c.check(r.converged, "did not converge");
  c.near(closer_statistic(r, 8.4), 8.4, 0.05, "statistic");
  c.check(r.df == 6, "df " + std::to_string(r.df));
  c.note("G2=" + fixed(r.deviance) + " X2=" + fixed(r.pearson) + " df=" + std::to_string(r.df));
  return c;
}

Criterion gss() {
  Criterion c;
  const auto g = fixture_graph("gss_us");
  const auto t = fixture_table("gss_us", g);
  const auto start = std::chrono::steady_clock::now();
  const auto r = fit(t, model_from_graph(g, t.levels(), SchemeKind::dset));
  c.check(r.converged, "model did not converge");
  c.near(closer_statistic(r, 17.29), 17.29, 0.05, "statistic");
  c.check(r.df == 17, "df " + std::to_string(r.df));

  const auto mv = model_from_graph(g, t.levels(), SchemeKind::mvlogistic);
  const auto reduced = fit(t, add_zero_blocks(mv, higher_order_keys(mv, 2)));
  const double elapsed = seconds_since(start);
  c.check(reduced.converged, "reduced model did not converge");
  c.near(closer_statistic(reduced, 108.34), 108.34, 0.1, "reduced statistic");
  c.check(reduced.df == 118, "reduced df " + std::to_string(reduced.df));

  const auto se = standard_errors(reduced);
  struct Row {
    const char* effect;
    double value;
    double se;
  };
  for (const Row& row : {Row{"CG", -0.38, 0.048}, Row{"FJ", 0.29, 0.044}, Row{"GS", -0.77, 0.042}}) {
    const auto& b = reduced.model.scheme->block_for_effect(g.parse_set(row.effect));
    c.near(reduced.lambda_hat[b.row_offset], row.value, 0.01, std::string(row.effect) + " first row");
    c.near(se[static_cast<std::size_t>(b.row_offset)].value_or(std::nan("")), row.se, 0.002,
           std::string(row.effect) + " first row s.e.");
  }
  c.check(elapsed < 30.0, "runtime " + fixed(elapsed, 3) + " s");
  c.note("G2=" + fixed(r.deviance) + " df=17; reduced G2=" + fixed(reduced.deviance) + " df=118; " +
         fixed(elapsed, 3) + " s");
  return c;
}

Criterion german_gss() {
  Criterion c;
  const auto g = fixture_graph("gss_de");
  const auto t = fixture_table("gss_de", g);
  const auto r = fit(t, model_from_graph(g, t.levels(), SchemeKind::dset));
  c.check(r.converged, "did not converge");
  c.near(closer_statistic(r, 5.91), 5.91, 0.05, "statistic");
  c.check(r.df == 5, "df " + std::to_string(r.df));
  c.note("G2=" + fixed(r.deviance) + " X2=" + fixed(r.pearson) + " df=" + std::to_string(r.df));
  return c;
}

Criterion screening() {
  Criterion c;
  const auto coppen = fixture_table("coppen");
  struct Case {
    VarSet margin;
    std::pair<int, int> edge;
    double p;
    const char* name;
  };
  for (const Case& k : {Case{VarSet::of({0, 1, 3}), {0, 1}, 0.32, "4 _||_ 12"},
                        Case{VarSet::of({0, 2, 3}), {1, 2}, 0.14, "1 _||_ 34"}}) {
    const auto t = marginalize(coppen, k.margin);
    const auto g = BidirectedGraph::from_indices(t.names(), {k.edge});
    const auto gof = goodness_of_fit(fit(t, model_from_graph(g, t.levels(), SchemeKind::dset)));
    const double p = std::abs(gof.p_deviance - k.p) <= std::abs(gof.p_pearson - k.p) ? gof.p_deviance : gof.p_pearson;
    c.near(p, k.p, 0.02, std::string("p-value ") + k.name);
    c.note(std::string(k.name) + " p=" + fixed(gof.p_deviance, 3) + "/" + fixed(gof.p_pearson, 3));
  }
  return c;
}

Criterion graph_combinatorics() {
  Criterion c;
  auto reduced = [](const BidirectedGraph& g) {
    std::vector<std::string> out;
    for (const auto& s : independence_statements(g, true)) out.push_back(format_statement(g, s));
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto chain4 = fixture_graph("chain4");
  const auto house = fixture_graph("house5");
  const auto chain5 = fixture_graph("chain5");
  c.check(disconnected_sets(chain4).size() == 5, "4-chain count");
  c.check(disconnected_sets(house).size() == 7, "house count");
  c.check(reduced(house) == std::vector<std::string>{"1 _||_ 34", "3 _||_ 15", "5 _||_ 23"}, "house statements");
  c.check(disconnected_sets(chain5).size() == 16, "5-chain count");
  c.check(reduced(chain5) == std::vector<std::string>{"1 _||_ 3 _||_ 5", "1 _||_ 345", "12 _||_ 45", "5 _||_ 123"},
          "5-chain statements");
  for (const char* name : {"chain4", "house5", "chain5", "gss_de"}) {
    c.check(has_chordless_4chain(fixture_graph(name)), std::string("4-chain flag ") + name);
  }
  for (int d = 2; d <= 6; ++d) {
    c.check(!has_chordless_4chain(BidirectedGraph::complete(bgm::testing::numbered(d))), "complete graph flag");
  }
  c.note("5 / 7 / 16 sets, reduced statements and 4-chain flags as expected");
  return c;
}

Criterion ordered_decomposability() {
  Criterion c;
  const auto nodes = BidirectedGraph::from_indices(bgm::testing::numbered(5), {});
  auto seq = [](const BidirectedGraph& g, std::initializer_list<const char*> names) {
    std::vector<VarSet> out;
    for (const char* n : names) out.push_back(g.parse_set(n));
    return out;
  };
  const auto primed = seq(nodes, {"13", "35", "135", "14", "25", "134", "235", "12345"});
  const auto plain = seq(nodes, {"13", "14", "25", "35", "134", "135", "235", "12345"});
  c.check(ordered_decomposable(primed, OdMode::strict).decomposable, "house primed strict");
  const auto verdict = ordered_decomposable(plain, OdMode::strict);
  c.check(!verdict.decomposable, "house plain strict");
  c.check(verdict.failing_prefix == seq(nodes, {"13", "14", "25", "35"}), "failing prefix");
  const auto gss = fixture_graph("gss_us");
  const auto printed = seq(gss, {"CF", "FA", "GJ", "GA", "JS", "CFA", "FGA", "GJS", "GJA", "CFGJSA"});
  c.check(ordered_decomposable(printed, OdMode::search).decomposable, "GSS search");
  c.check(!ordered_decomposable(printed, OdMode::strict).decomposable, "GSS strict discrepancy");
  c.note("house strict true/false, GSS search true, GSS strict false");
  return c;
}

Criterion properties() {
  Criterion c;
  std::mt19937_64 rng(2024);

  // Jacobian: column sums and finite differences on 50 random models.
  double worst_fd = 0.0;
  double worst_sum = 0.0;
  for (int made = 0; made < 50;) {
    const int d = 2 + static_cast<int>(rng() % 3);
    std::vector<int> levels(static_cast<std::size_t>(d));
    for (auto& b : levels) b = 2 + static_cast<int>(rng() % 2);
    const auto g = bgm::testing::random_graph(d, 0.4, rng);
    const auto model = model_from_graph(g, levels, (rng() % 2) ? SchemeKind::dset : SchemeKind::mvlogistic);
    if (model.q == 0) continue;
    ++made;
    const Index t = model.scheme->cells();
    const Eigen::VectorXd omega = (bgm::testing::random_distribution(t, rng) * 50).array().log().matrix();
    const Eigen::MatrixXd H = constraint_jacobian(model, omega);
    worst_sum = std::max(worst_sum, H.colwise().sum().cwiseAbs().maxCoeff());
    for (Index i = 0; i < t; ++i) {
      Eigen::VectorXd up = omega, down = omega;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const Eigen::VectorXd fd = (constraint_value(model, up) - constraint_value(model, down)) / 2e-6;
      const double scale = std::max(1.0, H.row(i).cwiseAbs().maxCoeff());
      worst_fd = std::max(worst_fd, (fd.transpose() - H.row(i)).cwiseAbs().maxCoeff() / scale);
    }
  }
  c.check(worst_sum < 1e-12, "H^T 1 = " + std::to_string(worst_sum));
  c.check(worst_fd < 1e-5, "finite-difference Jacobian error " + std::to_string(worst_fd));

  // Contrast rows, upward compatibility and the log-linear round trip.
  const std::vector<int> levels{2, 3, 2, 2};
  const auto mv = mvlogistic_scheme(levels);
  double worst_row = 0.0;
  for (const auto& b : mv.blocks()) worst_row = std::max(worst_row, b.contrast.rowwise().sum().cwiseAbs().maxCoeff());
  c.check(worst_row == 0.0, "contrast row sums");
  const CellLayout layout(levels);
  const Eigen::VectorXd pi = bgm::testing::random_distribution(layout.cells(), rng);
  const Eigen::VectorXd eta = compute_lambda(mv, pi);
  double worst_upward = 0.0;
  for (VarSet big : nonempty_subsets(VarSet::full(4))) {
    std::vector<int> sub_levels;
    for (int v : big.members()) sub_levels.push_back(levels[static_cast<std::size_t>(v)]);
    const auto sub = mvlogistic_scheme(sub_levels);
    const Eigen::VectorXd eta_sub = compute_lambda(sub, marginal_vector(layout, pi, big));
    const auto members = big.members();
    for (const auto& b : sub.blocks()) {
      VarSet original;
      for (int k : b.key.effect.members()) original = original.with(members[static_cast<std::size_t>(k)]);
      const auto& full = mv.block_for_effect(original);
      worst_upward = std::max(worst_upward, max_abs(eta_sub.segment(b.row_offset, b.rows) -
                                                    eta.segment(full.row_offset, full.rows)));
    }
  }
  c.check(worst_upward < 1e-10, "upward compatibility " + std::to_string(worst_upward));
  const Eigen::VectorXd theta = compute_lambda(loglinear_scheme(levels), pi);
  c.check(max_abs(loglinear_inverse(levels, theta) - pi) < 1e-10, "log-linear round trip");

  // Order invariance and marginalization closure on the 4-chain.
  const auto g = fixture_graph("chain4");
  const auto t = fixture_table("coppen", g);
  const std::vector<VarSet> other_order{g.parse_set("13"), g.parse_set("14"), g.parse_set("24"), g.parse_set("134"),
                                        g.parse_set("124")};
  const auto a = fit(t, model_from_graph(g, t.levels(), SchemeKind::dset), tight());
  const auto b = fit(t, model_from_graph(g, t.levels(), SchemeKind::dset, other_order), tight());
  c.check(max_abs(a.mu_hat - b.mu_hat) < 1e-6, "order invariance");
  const ContingencyTable fitted(t.variables(), a.pi_hat);
  double worst_closure = 0.0;
  for (VarSet sub : nonempty_subsets(g.all())) {
    if (sub.size() < 2) continue;
    const auto marginal = marginalize(fitted, sub);
    const auto model = model_from_graph(g.induced(sub), marginal.levels(), SchemeKind::mvlogistic);
    const Eigen::VectorXd lambda = compute_lambda(*model.scheme, marginal.counts());
    for (const auto& key : model.zero_blocks) {
      const auto* blk = model.scheme->find(key);
      worst_closure = std::max(worst_closure, max_abs(lambda.segment(blk->row_offset, blk->rows)));
    }
  }
  c.check(worst_closure < 1e-6, "marginalization closure " + std::to_string(worst_closure));

  // Oracle equivalence on every small fixture.
  double worst_ll = 0.0;
  double worst_mu = 0.0;
  const auto cases = bgm::testing::small_cases();
  for (const auto& k : cases) {
    const auto r = fit(k.table, k.model, tight());
    const auto o = oracle::constrained_search(k.table, k.model);
    worst_ll = std::max(worst_ll, std::abs(r.loglik - o.loglik));
    worst_mu = std::max(worst_mu, max_abs(r.mu_hat - o.pi_star * k.table.total()));
  }
  c.check(worst_ll < 1e-6, "oracle log-likelihood gap " + std::to_string(worst_ll));
  c.check(worst_mu < 1e-4, "oracle mu gap " + std::to_string(worst_mu));
  std::ostringstream s;
  s.precision(2);
  s << "FD err " << worst_fd << ", oracle " << cases.size() << " fixtures: loglik gap " << worst_ll << ", mu gap "
    << worst_mu;
  c.note(s.str());
  return c;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Criterion()>> criteria[] = {
      {"Coppen 4-chain fit 8.61 on 5 df, < 1 s", coppen_chain},
      {"Coppen estimates and studentized values", coppen_estimates},
      {"Coppen reduced model 8.63 on 6 df", coppen_reduced},
      {"Coppen undirected [12][234] 8.4 on 6 df", coppen_undirected},
      {"GSS 17.29/17, reduced 108.34/118, spot checks, < 30 s", gss},
      {"German GSS 5.91 on 5 df", german_gss},
      {"Coppen marginal screening p-values 0.32 and 0.14", screening},
      {"graph combinatorics", graph_combinatorics},
      {"ordered decomposability modes", ordered_decomposability},
      {"property suite", properties},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [title, run] : criteria) {
    ++index;
    Criterion result;
    try {
      result = run();
    } catch (const std::exception& e) {
      result.check(false, std::string("exception: ") + e.what());
    }
    if (!result.ok()) ++failures;
    std::printf("%s  %2d  %s: %s\n", result.ok() ? "PASS" : "FAIL", index, title, result.detail().c_str());
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
