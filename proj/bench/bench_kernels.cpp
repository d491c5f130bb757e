#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "trendfx/data.hpp"
#include "trendfx/kernels.hpp"
#include "trendfx/l1tf.hpp"

using namespace trendfx;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <auto Gemm>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n * n, 1), b = random_values(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Gemm(n, n, n, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}

template <auto Conv>
void BM_Conv(benchmark::State& state) {
  kernels::Conv1dShape s;
  s.batch = static_cast<std::size_t>(state.range(0));
  s.in_channels = 4;
  s.length = 64;
  s.out_channels = 32;
  s.kernel = 7;
  const auto x = random_values(s.batch * s.in_channels * s.length, 3);
  const auto w = random_values(s.out_channels * s.in_channels * s.kernel, 4);
  const auto bias = random_values(s.out_channels, 5);
  std::vector<double> y(s.batch * s.out_channels * s.out_length());
  for (auto _ : state) {
    Conv(s, x.data(), w.data(), bias.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

std::vector<data::Window> bench_windows(std::size_t count) {
  data::SynthSpec spec;
  spec.length = count + 69;
  const auto series = data::synth_generate(spec);
  return data::make_windows(series, 64, 5, 1);
}

void BM_AugmentSerial(benchmark::State& state) {
  const auto windows = bench_windows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(l1tf::serial::augment_with_trend(windows, 0.5, l1tf::AugmentMode::TargetOnly));
  }
}

void BM_AugmentParallel(benchmark::State& state) {
  const auto windows = bench_windows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(l1tf::augment_with_trend(windows, 0.5, l1tf::AugmentMode::TargetOnly));
  }
}

void BM_Solve(benchmark::State& state) {
  const auto y = random_values(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(l1tf::solve(y, 1.0));
}

}  // namespace

BENCHMARK(BM_Gemm<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<kernels::parallel::gemm_nn>)->Name("gemm_nn/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_Conv<kernels::serial::conv1d_forward>)->Name("conv1d/serial")->Arg(16)->Arg(128);
BENCHMARK(BM_Conv<kernels::parallel::conv1d_forward>)->Name("conv1d/parallel")->Arg(16)->Arg(128);
BENCHMARK(BM_AugmentSerial)->Name("augment/serial")->Arg(256);
BENCHMARK(BM_AugmentParallel)->Name("augment/parallel")->Arg(256);
BENCHMARK(BM_Solve)->Name("l1tf_solve")->Arg(64)->Arg(1024)->Arg(16384);

BENCHMARK_MAIN();
