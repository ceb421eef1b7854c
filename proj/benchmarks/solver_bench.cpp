// Micro-benchmarks for the building blocks and two small end-to-end solves.
// All instances are generated, so results are machine-comparable.

#include <benchmark/benchmark.h>

#include "ddsop/search.hpp"
#include "ddsop/random_instance.hpp"

using namespace ddsop;

namespace {

FilterContext make_context(const RrbTables& tables) {
  FilterContext ctx;
  ctx.rrb = &tables;
  return ctx;
}

std::vector<ArcId> live_arcs(const Diagram& d) {
  std::vector<ArcId> arcs;
  for (int j = 1; j <= d.num_node_layers(); ++j)
    for (NodeId u : d.layer(j))
      for (ArcId a : d.node(u).out) arcs.push_back(a);
  return arcs;
}

void BM_InitialRelaxation(benchmark::State& state) {
  SopInstance inst = random_instance(static_cast<int>(state.range(0)), 0.2, 1);
  for (auto _ : state) {
    auto d = build_initial_relaxation(inst, RootState::global(inst));
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_InitialRelaxation)->Arg(20)->Arg(40);

void BM_ExactArcRefine(benchmark::State& state) {
  SopInstance inst = random_instance(14, 0.3, 2);
  RrbTables tables(inst);
  FilterContext ctx = make_context(tables);
  AssignmentOrdering ordering = assignment_ordering(inst);
  auto base = build_initial_relaxation(inst, RootState::global(inst));
  for (auto _ : state) {
    Diagram d = *base;
    refine(d, static_cast<int>(state.range(0)), ordering, ctx, RefineMode::exact_arc,
           std::nullopt);
    benchmark::DoNotOptimize(d.width());
  }
}
BENCHMARK(BM_ExactArcRefine)->Arg(16)->Arg(64);

void BM_Restricted(benchmark::State& state) {
  SopInstance inst = random_instance(16, 0.3, 3);
  RrbTables tables(inst);
  FilterContext ctx = make_context(tables);
  for (auto _ : state) {
    RestrictedResult r = build_restricted(inst, RootState::global(inst),
                                          static_cast<int>(state.range(0)),
                                          kCostInfinity, ctx);
    benchmark::DoNotOptimize(r.best_value);
  }
}
BENCHMARK(BM_Restricted)->Arg(16)->Arg(64);

void BM_Peel(benchmark::State& state) {
  SopInstance inst = random_instance(14, 0.3, 4);
  RrbTables tables(inst);
  FilterContext ctx = make_context(tables);
  AssignmentOrdering ordering = assignment_ordering(inst);
  auto base = build_initial_relaxation(inst, RootState::global(inst));
  refine(*base, 32, ordering, ctx, RefineMode::exact_arc, std::nullopt);
  for (auto _ : state) {
    Diagram d = *base;
    NodeId u = select_exact_node(d, NodeSelect::last_exact);
    Diagram peeled = peel(d, u, ctx);
    benchmark::DoNotOptimize(peeled.width());
  }
}
BENCHMARK(BM_Peel);

void BM_RrbOfArc(benchmark::State& state) {
  SopInstance inst = random_instance(14, 0.3, 5);
  RrbTables tables(inst);
  FilterContext ctx = make_context(tables);
  AssignmentOrdering ordering = assignment_ordering(inst);
  auto d = build_initial_relaxation(inst, RootState::global(inst));
  refine(*d, 32, ordering, ctx, RefineMode::exact_arc, std::nullopt);
  std::vector<ArcId> arcs = live_arcs(*d);
  for (auto _ : state) {
    Cost sum = 0;
    for (ArcId a : arcs) sum = saturating_add(sum, rrb_of_arc(*d, a, ctx));
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(arcs.size()));
}
BENCHMARK(BM_RrbOfArc);

void BM_FilterDiagram(benchmark::State& state) {
  SopInstance inst = random_instance(14, 0.3, 6);
  RrbTables tables(inst);
  FilterContext ctx = make_context(tables);
  AssignmentOrdering ordering = assignment_ordering(inst);
  auto base = build_initial_relaxation(inst, RootState::global(inst));
  refine(*base, 32, ordering, ctx, RefineMode::exact_arc, std::nullopt);
  for (auto _ : state) {
    Diagram d = *base;
    benchmark::DoNotOptimize(filter_diagram(d, ctx));
  }
}
BENCHMARK(BM_FilterDiagram);

void BM_SolveBnB(benchmark::State& state) {
  SopInstance inst = random_instance(12, 0.3, 7);
  SearchConfig config;
  config.width = 16;
  for (auto _ : state) {
    SearchResult r = branch_and_bound(inst, config);
    benchmark::DoNotOptimize(r.best_value);
  }
}
BENCHMARK(BM_SolveBnB);

void BM_SolvePnB(benchmark::State& state) {
  SopInstance inst = random_instance(12, 0.3, 7);
  SearchConfig config;
  config.width = 16;
  for (auto _ : state) {
    SearchResult r = peel_and_bound(inst, config);
    benchmark::DoNotOptimize(r.best_value);
  }
}
BENCHMARK(BM_SolvePnB);

}  // namespace

BENCHMARK_MAIN();
