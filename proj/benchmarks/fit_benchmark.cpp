#include <string>

#include <benchmark/benchmark.h>

#include "bgm/fit.hpp"
#include "bgm/graph.hpp"
#include "bgm/mll.hpp"
#include "bgm/table.hpp"

namespace {

using namespace bgm;

struct Fixture {
  BidirectedGraph graph;
  ContingencyTable table;
};

Fixture load(const std::string& graph, const std::string& table) {
  const std::string dir = BGM_BENCH_DATA_DIR;
  auto g = load_graph(dir + "/graphs/" + graph + ".json");
  auto t = reorder(load_table(dir + "/tables/" + table + ".csv"), g.labels());
  return {std::move(g), std::move(t)};
}

void BM_FitCoppen(benchmark::State& state) {
  const auto f = load("chain4", "coppen");
  const auto model = model_from_graph(f.graph, f.table.levels(), SchemeKind::dset);
  for (auto _ : state) benchmark::DoNotOptimize(fit(f.table, model));
}
BENCHMARK(BM_FitCoppen)->Unit(benchmark::kMicrosecond);

void BM_FitGss(benchmark::State& state) {
  const auto f = load("gss_us", "gss_us");
  const auto model = model_from_graph(f.graph, f.table.levels(), SchemeKind::dset);
  for (auto _ : state) benchmark::DoNotOptimize(fit(f.table, model));
}
BENCHMARK(BM_FitGss)->Unit(benchmark::kMillisecond);

void BM_FitGssReduced(benchmark::State& state) {
  const auto f = load("gss_us", "gss_us");
  const auto mv = model_from_graph(f.graph, f.table.levels(), SchemeKind::mvlogistic);
  const auto model = add_zero_blocks(mv, higher_order_keys(mv, 2));
  for (auto _ : state) benchmark::DoNotOptimize(fit(f.table, model));
}
BENCHMARK(BM_FitGssReduced)->Unit(benchmark::kMillisecond);

void BM_BuildScheme(benchmark::State& state) {
  const auto f = load("gss_us", "gss_us");
  for (auto _ : state) benchmark::DoNotOptimize(model_from_graph(f.graph, f.table.levels(), SchemeKind::dset));
}
BENCHMARK(BM_BuildScheme)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
