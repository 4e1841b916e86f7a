// Serial reference kernels against the OpenMP variants, on the shapes that
// dominate training (batch x width times width x 4 width for LSTM gates).
#include <benchmark/benchmark.h>

#include <random>

#include "pitl/numgrad/kernels.hpp"

namespace k = pitl::kernels;
using pitl::Tensor2D;

namespace {

Tensor2D filled(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor2D t(r, c);
  for (double& v : t.data()) v = u(rng);
  return t;
}

template <void (*Fn)(const Tensor2D&, const Tensor2D&, Tensor2D&)>
void bm_matmul(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto w = static_cast<std::size_t>(st.range(1));
  const Tensor2D a = filled(n, w, 1), b = filled(w, 4 * w, 2);
  Tensor2D out;
  for (auto _ : st) {
    Fn(a, b, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * w * 4 * w));
}

template <void (*Fn)(const Tensor2D&, const Tensor2D&, Tensor2D&)>
void bm_matmul_tn(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto w = static_cast<std::size_t>(st.range(1));
  const Tensor2D a = filled(n, w, 3), g = filled(n, 4 * w, 4);
  Tensor2D out(w, 4 * w);
  for (auto _ : st) {
    Fn(a, g, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * w * 4 * w));
}

template <void (*Fn)(k::Unary, const Tensor2D&, Tensor2D&)>
void bm_apply(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Tensor2D x = filled(n, 480, 5);
  Tensor2D out;
  for (auto _ : st) {
    Fn(k::Unary::tanh, x, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * 480));
}

void shapes(benchmark::internal::Benchmark* b) {
  for (long n : {32, 70, 476})
    for (long w : {25, 30, 120}) b->Args({n, w});
}

}  // namespace

BENCHMARK(bm_matmul<k::serial::matmul>)->Name("matmul/serial")->Apply(shapes);
BENCHMARK(bm_matmul<k::omp::matmul>)->Name("matmul/omp")->Apply(shapes);
BENCHMARK(bm_matmul_tn<k::serial::matmul_tn_acc>)->Name("matmul_tn_acc/serial")->Apply(shapes);
BENCHMARK(bm_matmul_tn<k::omp::matmul_tn_acc>)->Name("matmul_tn_acc/omp")->Apply(shapes);
BENCHMARK(bm_apply<k::serial::apply>)->Name("tanh/serial")->Arg(32)->Arg(476);
BENCHMARK(bm_apply<k::omp::apply>)->Name("tanh/omp")->Arg(32)->Arg(476);

BENCHMARK_MAIN();
