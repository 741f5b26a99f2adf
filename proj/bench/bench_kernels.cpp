// Serial reference kernels against their OpenMP counterparts.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "finevq/kernels/kernels.hpp"

namespace {

using namespace finevq::kernels;

std::vector<double> Random(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

template <auto Kernel>
void BM_MatMul(benchmark::State& state) {
  const std::size_t n = state.range(0);
  const auto a = Random(n * n, 1), b = Random(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Kernel(a, b, c, n, n, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

template <auto Kernel>
void BM_MatMulNT(benchmark::State& state) {
  const std::size_t n = state.range(0);
  const auto a = Random(n * n, 1), b = Random(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Kernel(a, b, c, n, n, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

template <auto LumaK, auto SobelK>
void BM_LumaSobel(benchmark::State& state) {
  const std::size_t s = state.range(0);
  const auto rgb = Random(s * s * 3, 3);
  std::vector<double> y(s * s), g((s - 2) * (s - 2));
  for (auto _ : state) {
    LumaK(rgb, y);
    SobelK(y, s, s, g);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * s * s);
}

template <auto Kernel>
void BM_Resize(benchmark::State& state) {
  const std::size_t s = state.range(0);
  const auto src = Random(s * s * 3, 4);
  std::vector<double> dst(448 * 448 * 3);
  for (auto _ : state) {
    Kernel(src, s, s, 3, dst, 448, 448);
    benchmark::DoNotOptimize(dst.data());
  }
  state.SetItemsProcessed(state.iterations() * 448 * 448);
}

BENCHMARK(BM_MatMul<serial::MatMul>)->Name("MatMul/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_MatMul<omp::MatMul>)->Name("MatMul/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_MatMulNT<serial::MatMulNT>)->Name("MatMulNT/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_MatMulNT<omp::MatMulNT>)->Name("MatMulNT/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_LumaSobel<serial::Luma, serial::SobelMagnitude>)->Name("LumaSobel/serial")->Arg(512);
BENCHMARK(BM_LumaSobel<omp::Luma, omp::SobelMagnitude>)->Name("LumaSobel/omp")->Arg(512);
BENCHMARK(BM_Resize<serial::ResizeBilinear>)->Name("Resize/serial")->Arg(1080);
BENCHMARK(BM_Resize<omp::ResizeBilinear>)->Name("Resize/omp")->Arg(1080);

}  // namespace

BENCHMARK_MAIN();
