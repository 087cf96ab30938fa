#include <benchmark/benchmark.h>

#include "hubspoke/fcm.hpp"
#include "hubspoke/session.hpp"

using namespace hubspoke;

// One move and its undo; both refresh only the two touched clusters.
static void BM_MoveUndo(benchmark::State& state) {
  SyntheticSpec spec;
  spec.n_points = static_cast<std::size_t>(state.range(0));
  const auto pts = generate_synthetic(spec).instance.points;
  AssignmentSession s(run_fcm(pts, FcmParams{}), pts);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto from = s.current()[i];
    const auto to = (from + 1) % s.cluster_count();
    if (s.metrics().cluster_sizes[from] > 1) {
      s.apply_move(pts[i].id, to, "bench", "2026-01-01T00:00:00Z");
      s.undo();
    }
    i = (i + 1) % pts.size();
  }
}
BENCHMARK(BM_MoveUndo)->Arg(77)->Arg(1000);

static void BM_Suggest(benchmark::State& state) {
  const auto pts = generate_synthetic({}).instance.points;
  AssignmentSession s(run_fcm(pts, FcmParams{}), pts);
  for (auto _ : state) benchmark::DoNotOptimize(s.suggest(0, 10));
}
BENCHMARK(BM_Suggest);
