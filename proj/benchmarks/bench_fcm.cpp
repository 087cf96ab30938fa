#include <benchmark/benchmark.h>

#include "hubspoke/fcm.hpp"
#include "hubspoke/model.hpp"

using namespace hubspoke;

static void BM_FcmSeed42(benchmark::State& state) {
  SyntheticSpec spec;
  spec.n_points = static_cast<std::size_t>(state.range(0));
  const auto inst = generate_synthetic(spec).instance;
  FcmParams p;
  p.c = 3;
  for (auto _ : state) benchmark::DoNotOptimize(run_fcm(inst.points, p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FcmSeed42)->Arg(77)->Arg(500)->Arg(2000)->Complexity();

static void BM_Sweep2to5(benchmark::State& state) {
  const auto inst = generate_synthetic({}).instance;
  for (auto _ : state) benchmark::DoNotOptimize(sweep_cluster_counts(inst.points, {2, 3, 4, 5}, FcmParams{}));
}
BENCHMARK(BM_Sweep2to5);
