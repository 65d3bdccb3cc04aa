#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "udn/kernels.hpp"

namespace k = udn::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Shapes of the 400/300 actor-critic layers at mini-batch 64.
k::DenseDims dims(const benchmark::State& st) {
  return {static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)),
          static_cast<std::size_t>(st.range(2))};
}

void set_flops(benchmark::State& st, k::DenseDims d) {
  st.counters["GFLOPS"] = benchmark::Counter(2.0 * d.batch * d.in * d.out,
                                             benchmark::Counter::kIsIterationInvariantRate,
                                             benchmark::Counter::kIs1000);
}

template <auto Fn>
void BM_forward(benchmark::State& st) {
  const auto d = dims(st);
  const auto x = random_vec(d.batch * d.in, 1), w = random_vec(d.in * d.out, 2),
             b = random_vec(d.out, 3);
  std::vector<double> y(d.batch * d.out);
  for (auto _ : st) {
    Fn(d, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  set_flops(st, d);
}

template <auto Fn>
void BM_backward_input(benchmark::State& st) {
  const auto d = dims(st);
  const auto dy = random_vec(d.batch * d.out, 1), w = random_vec(d.in * d.out, 2);
  std::vector<double> dx(d.batch * d.in);
  for (auto _ : st) {
    Fn(d, dy, w, dx);
    benchmark::DoNotOptimize(dx.data());
  }
  set_flops(st, d);
}

template <auto Fn>
void BM_backward_params(benchmark::State& st) {
  const auto d = dims(st);
  const auto x = random_vec(d.batch * d.in, 1), dy = random_vec(d.batch * d.out, 2);
  std::vector<double> dw(d.in * d.out), db(d.out);
  for (auto _ : st) {
    Fn(d, x, dy, dw, db);
    benchmark::DoNotOptimize(dw.data());
  }
  set_flops(st, d);
}

template <auto Fn>
void BM_received_power(benchmark::State& st) {
  const k::ChannelDims d{static_cast<std::size_t>(st.range(0)),
                         static_cast<std::size_t>(st.range(1))};
  auto uxy = random_vec(d.users * 2, 1), cxy = random_vec(d.cells * 2, 2);
  for (auto& v : uxy) v = 150.0 + 150.0 * v;
  for (auto& v : cxy) v = 150.0 + 150.0 * v;
  const auto tx = random_vec(d.cells, 3), sh = random_vec(d.users * d.cells, 4);
  const k::ChannelInputs in{uxy, cxy, tx, sh, 128.1, 37.6, 0.035};
  std::vector<double> out(d.users * d.cells);
  for (auto _ : st) {
    Fn(d, in, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(d.users * d.cells));
}

void layer_shapes(benchmark::internal::Benchmark* b) {
  b->Args({64, 32, 400})->Args({64, 400, 300})->Args({64, 300, 66})->Args({1, 400, 300});
}

}  // namespace

BENCHMARK(BM_forward<k::serial::dense_forward>)->Apply(layer_shapes);
BENCHMARK(BM_forward<k::omp::dense_forward>)->Apply(layer_shapes);
BENCHMARK(BM_backward_input<k::serial::dense_backward_input>)->Apply(layer_shapes);
BENCHMARK(BM_backward_input<k::omp::dense_backward_input>)->Apply(layer_shapes);
BENCHMARK(BM_backward_params<k::serial::dense_backward_params>)->Apply(layer_shapes);
BENCHMARK(BM_backward_params<k::omp::dense_backward_params>)->Apply(layer_shapes);
BENCHMARK(BM_received_power<k::serial::received_power>)->Args({200, 12})->Args({2000, 48});
BENCHMARK(BM_received_power<k::omp::received_power>)->Args({200, 12})->Args({2000, 48});

BENCHMARK_MAIN();
