#include <benchmark/benchmark.h>

#include "ogl/adadrops.hpp"
#include "ogl/data.hpp"
#include "ogl/solvers.hpp"

namespace {

using namespace ogl;

SyntheticInstance sliding(Index N, Index gs, Index os, double ratio, std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.num_groups = N;
  spec.group_size = gs;
  spec.overlap = os;
  spec.lambda_ratio = ratio;
  spec.seed = seed;
  return gen_sliding(spec);
}

void BM_LiftApply(benchmark::State& state) {
  const LiftingOperator L(sliding_covering(state.range(0), 10, 3, 1.0));
  const Vec x = Vec::Random(L.dim());
  for (auto _ : state) benchmark::DoNotOptimize(L.apply(x));
  state.SetItemsProcessed(state.iterations() * L.lifted_dim());
}
BENCHMARK(BM_LiftApply)->Arg(100)->Arg(1000)->Arg(10000);

void BM_LiftAdjoint(benchmark::State& state) {
  const LiftingOperator L(sliding_covering(state.range(0), 10, 3, 1.0));
  const Vec u = Vec::Random(L.lifted_dim());
  for (auto _ : state) benchmark::DoNotOptimize(L.apply_adjoint(u));
  state.SetItemsProcessed(state.iterations() * L.lifted_dim());
}
BENCHMARK(BM_LiftAdjoint)->Arg(100)->Arg(1000)->Arg(10000);

void BM_EffectiveLift(benchmark::State& state) {
  const LiftingOperator L(sliding_covering(state.range(0), 10, 3, 1.0));
  IndexList active;
  for (Index t = 0; t < L.num_groups(); t += 7) active.push_back(t);
  const SupportState S = compute_supports(L, active);
  const Vec x = Vec::Random(L.dim());
  for (auto _ : state) benchmark::DoNotOptimize(effective_lift_apply(L, S, x));
}
BENCHMARK(BM_EffectiveLift)->Arg(1000)->Arg(10000);

void BM_Solve(benchmark::State& state, SolverKind kind) {
  const SyntheticInstance inst = sliding(state.range(0), 10, 3, 1.5);
  const LiftingOperator L(inst.covering);
  SolverConfig c;
  c.stop_tol = 1e-6;
  c.admm_tau = 10.0;
  Index iters = 0;
  for (auto _ : state) {
    const SolveResult r = solve(kind, inst.problem, L, c);
    iters = r.iterations;
    benchmark::DoNotOptimize(r.objective);
  }
  state.counters["iterations"] = static_cast<double>(iters);
  state.counters["n"] = static_cast<double>(L.dim());
}
BENCHMARK_CAPTURE(BM_Solve, pd, SolverKind::PrimalDual)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, admm, SolverKind::Admm)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, varpro, SolverKind::VarPro)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_AdaDrops(benchmark::State& state, SolverKind kind) {
  const SyntheticInstance inst = sliding(state.range(0), 10, 3, 1.5);
  const LiftingOperator L(inst.covering);
  AdaDropsConfig c;
  c.inner.stop_tol = 1e-6;
  c.inner.admm_tau = 10.0;
  Index kappa = 0;
  for (auto _ : state) {
    const AdaDropsResult r = adadrops_run(inst.problem, L, kind, c);
    kappa = r.rounds.back().kappa;
    benchmark::DoNotOptimize(r.objective);
  }
  state.counters["kappa"] = static_cast<double>(kappa);
  state.counters["n"] = static_cast<double>(L.dim());
}
BENCHMARK_CAPTURE(BM_AdaDrops, pd, SolverKind::PrimalDual)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_AdaDrops, admm, SolverKind::Admm)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_AdaDrops, varpro, SolverKind::VarPro)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
