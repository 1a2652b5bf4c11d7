// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "ucbvi/env.hpp"
#include "ucbvi/grid.hpp"
#include "ucbvi/kernels.hpp"

using namespace ucbvi;

namespace {

template <auto Kernel>
void transitions_1d(benchmark::State& state) {
  const auto env = make_sine_1d();
  const Grid grid(static_cast<int>(state.range(0)), 1);
  std::vector<double> out(static_cast<std::size_t>(grid.cell_count()) * grid.cell_count() * 2);
  for (auto _ : state) {
    Kernel(grid, env, 16, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void rewards_2d(benchmark::State& state) {
  const auto env = make_sine_2d();
  const Grid grid(static_cast<int>(state.range(0)), 2);
  std::vector<double> out(static_cast<std::size_t>(grid.cell_count()) * 2);
  for (auto _ : state) {
    Kernel(grid, env, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void expected_next(benchmark::State& state) {
  const auto cells = static_cast<std::size_t>(state.range(0));
  const std::size_t actions = 2;
  Rng rng(1);
  std::vector<double> p(cells * actions * cells);
  for (auto& v : p) v = rng.uniform() / static_cast<double>(cells);
  std::vector<double> v(cells), out(cells * actions);
  for (auto& x : v) x = rng.uniform();
  for (auto _ : state) {
    Kernel(p, v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(transitions_1d<serial::aggregate_transitions>)->Name("transitions_1d/serial")->Arg(32)->Arg(128);
BENCHMARK(transitions_1d<parallel::aggregate_transitions>)->Name("transitions_1d/parallel")->Arg(32)->Arg(128)->UseRealTime();
BENCHMARK(rewards_2d<serial::aggregate_rewards>)->Name("rewards_2d/serial")->Arg(16)->Arg(32);
BENCHMARK(rewards_2d<parallel::aggregate_rewards>)->Name("rewards_2d/parallel")->Arg(16)->Arg(32)->UseRealTime();
BENCHMARK(expected_next<serial::expected_next>)->Name("expected_next/serial")->Arg(256)->Arg(1024);
BENCHMARK(expected_next<parallel::expected_next>)->Name("expected_next/parallel")->Arg(256)->Arg(1024)->UseRealTime();

BENCHMARK_MAIN();
