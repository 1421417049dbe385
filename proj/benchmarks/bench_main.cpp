#include <benchmark/benchmark.h>

#include "homoglab/assembly.hpp"
#include "homoglab/cell.hpp"
#include "homoglab/coeff.hpp"
#include "homoglab/mesh.hpp"

using namespace homoglab;

namespace {

const CoefficientPtr& field() {
  static const CoefficientPtr f = builtin(TrigonometricParams{});
  return f;
}

void BM_Assemble(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto mesh = std::make_shared<const DomainMesh>(n);
  const auto coeff = rescale(field(), 1.0 / 8);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(coeff, mesh, ConstraintMode::dirichlet));
  state.SetItemsProcessed(state.iterations() * mesh->element_count());
}
BENCHMARK(BM_Assemble)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FactorAndSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto mesh = std::make_shared<const DomainMesh>(n);
  const auto coeff = rescale(field(), 1.0 / 8);
  const Load load = volume_load(mesh, [](const Point&) { return 1.0; });
  for (auto _ : state) {
    auto op = assemble(coeff, mesh, ConstraintMode::dirichlet);
    benchmark::DoNotOptimize(solve_dirichlet(*op, load));
  }
}
BENCHMARK(BM_FactorAndSolve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SolveFactored(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto mesh = std::make_shared<const DomainMesh>(n);
  auto op = assemble(rescale(field(), 1.0 / 8), mesh, ConstraintMode::dirichlet);
  const Load load = volume_load(mesh, [](const Point&) { return 1.0; });
  solve_dirichlet(*op, load);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dirichlet(*op, load));
}
BENCHMARK(BM_SolveFactored)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CellSolution(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cell_solution(field(), n));
}
BENCHMARK(BM_CellSolution)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
