// Parallel kernels against their serial references.
//   ./sstgnn_bench --benchmark_filter=Matmul
// Thread count for the parallel variants follows SSTGNN_THREADS / OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "sstgnn/detector.hpp"
#include "sstgnn/eigen.hpp"
#include "sstgnn/kernels.hpp"
#include "sstgnn/rng.hpp"
#include "sstgnn/spectral.hpp"

using namespace sstgnn;

namespace {

Tensor random(std::size_t r, std::size_t c, std::uint64_t seed) {
  Tensor t = Tensor::zeros(r, c);
  const rng::Stream s(seed, "bench");
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = s.uniform(k, -1.0, 1.0);
  return t;
}

// Normalized Laplacian of a dense random graph, the shape the detector decomposes.
Tensor random_laplacian(std::size_t n, std::uint64_t seed) {
  const Tensor u = random(n, n, seed);
  Tensor a = Tensor::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(i, j) > 0.2) a(i, j) = a(j, i) = u(i, j);
  return normalized_laplacian(a);
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random(n, n, 1), b = random(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random(n, n, 1), b = random(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
  state.counters["threads"] = kernels::num_threads();
}

// Encoder-shaped product: nodes x (l*l) times (l*l) x d.
void BM_EncoderSerial(benchmark::State& state) {
  const Tensor x = random(32, 1024, 3), w = random(1024, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::matmul(x, w));
}

void BM_EncoderParallel(benchmark::State& state) {
  const Tensor x = random(32, 1024, 3), w = random(1024, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul(x, w));
}

void BM_EigenJacobi(benchmark::State& state) {
  const Tensor l = random_laplacian(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(serial::eigh_jacobi(l));
}

void BM_EigenQL(benchmark::State& state) {
  const Tensor l = random_laplacian(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(eigh(l));
}

void BM_ForwardClip(benchmark::State& state) {
  const TrainConfig c;
  const ParamSet p = init_params(c, 1);
  SynthSpec spec;
  spec.family = Family::upsample_artifact;
  const FrameSequence clip = generate(spec).clip;
  for (auto _ : state) benchmark::DoNotOptimize(forward_logits(clip, p, c));
}

}  // namespace

BENCHMARK(BM_MatmulSerial)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulParallel)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EncoderSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EncoderParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EigenJacobi)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EigenQL)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardClip)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
