#include <benchmark/benchmark.h>

#include <random>

#include "hubspoke/vrptw.hpp"

using namespace hubspoke;

namespace {

VrptwProblem random_problem(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-0.08, 0.08), dem(5, 40), open(0, 300);
  std::vector<Stop> stops;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = open(rng);
    stops.push_back({std::to_string(i), {10.8 + off(rng), 106.7 + off(rng)}, std::round(dem(rng)), e, e + 180, 5});
  }
  return make_problem({10.8, 106.7}, std::move(stops), 150, {100, 5}, 0, 600, 25, 1.4);
}

}  // namespace

static void BM_Solve(benchmark::State& state) {
  const auto p = random_problem(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_Solve)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_BruteForce(benchmark::State& state) {
  const auto p = random_problem(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force(p));
}
BENCHMARK(BM_BruteForce)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);
