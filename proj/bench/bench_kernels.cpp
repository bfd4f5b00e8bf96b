// SPDX-License-Identifier: Apache-2.0
// Serial reference loops vs the OpenMP kernels. The serial matmul keeps the
// textbook i-j-k order, so it is slower even with OMP_NUM_THREADS=1.
#include <benchmark/benchmark.h>

#include "sew/kernels.hpp"
#include "sew/rng.hpp"

namespace {

sew::Matrix random(std::size_t r, std::size_t c, std::uint64_t seed) {
  sew::Rng rng(seed);
  sew::Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

template <sew::Matrix (*Fn)(const sew::Matrix&, const sew::Matrix&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const sew::Matrix a = random(n, n, 1), b = random(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

template <sew::Matrix (*Fn)(const sew::Matrix&)>
void BM_Tanh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const sew::Matrix x = random(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

}  // namespace

BENCHMARK(BM_Matmul<sew::kernels::serial::matmul>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 512);
BENCHMARK(BM_Matmul<sew::kernels::matmul>)->Name("matmul/openmp")->RangeMultiplier(2)->Range(32, 512);
BENCHMARK(BM_Matmul<sew::kernels::serial::matmul_tn>)->Name("matmul_tn/serial")->Arg(256);
BENCHMARK(BM_Matmul<sew::kernels::matmul_tn>)->Name("matmul_tn/openmp")->Arg(256);
BENCHMARK(BM_Tanh<sew::kernels::serial::tanh>)->Name("tanh/serial")->Arg(128)->Arg(1024);
BENCHMARK(BM_Tanh<sew::kernels::tanh>)->Name("tanh/openmp")->Arg(128)->Arg(1024);
BENCHMARK_MAIN();
