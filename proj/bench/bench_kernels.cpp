// Serial reference kernels against the OpenMP kernels, plus one full fit.
// Arguments: {n, p} and, for the OpenMP variants, the thread count.

#include <benchmark/benchmark.h>

#include "multicoap/kernels.hpp"
#include "multicoap/random.hpp"
#include "multicoap/simgen.hpp"
#include "multicoap/vem.hpp"

using namespace multicoap;

namespace {

struct Inputs {
  Matrix X;
  Vector a;
  Matrix ztilde;
  Matrix M;
  Matrix V;
  Matrix L;
  Matrix S;
};

Inputs make_inputs(Index n, Index p) {
  Rng rng(1);
  Inputs in;
  in.ztilde = rng.normal_matrix(n, p);
  in.M = in.ztilde;
  in.V = Matrix::Ones(n, p);
  in.a = Vector::Ones(n);
  in.X.resize(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) in.X(i, j) = static_cast<double>(rng.poisson(std::exp(in.ztilde(i, j))));
  }
  in.L = rng.normal_matrix(p, 3);
  in.S = Matrix::Identity(3, 3);
  return in;
}

void BM_LatentReference(benchmark::State& state) {
  auto in = make_inputs(state.range(0), state.range(1));
  for (auto _ : state) {
    Matrix M = in.M, V = in.V;
    kernels::reference::latent_update(in.X, in.a, in.ztilde, 1.0, M, V);
    benchmark::DoNotOptimize(M.data());
  }
}

void BM_LatentOmp(benchmark::State& state) {
  auto in = make_inputs(state.range(0), state.range(1));
  const kernels::Exec exec{static_cast<int>(state.range(2))};
  for (auto _ : state) {
    Matrix M = in.M, V = in.V;
    kernels::latent_update(in.X, in.a, in.ztilde, 1.0, M, V, exec);
    benchmark::DoNotOptimize(M.data());
  }
}

void BM_ElboSumReference(benchmark::State& state) {
  auto in = make_inputs(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::poisson_entropy_sum(in.X, in.a, in.M, in.V, true));
}

void BM_ElboSumOmp(benchmark::State& state) {
  auto in = make_inputs(state.range(0), state.range(1));
  const kernels::Exec exec{static_cast<int>(state.range(2))};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::poisson_entropy_sum(in.X, in.a, in.M, in.V, true, exec));
}

void BM_ProjectReference(benchmark::State& state) {
  auto in = make_inputs(state.range(0), state.range(1));
  Matrix out;
  for (auto _ : state) {
    kernels::reference::project_rows(in.M, in.L, in.S, 1.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_ProjectOmp(benchmark::State& state) {
  auto in = make_inputs(state.range(0), state.range(1));
  const kernels::Exec exec{static_cast<int>(state.range(2))};
  Matrix out;
  for (auto _ : state) {
    kernels::project_rows(in.M, in.L, in.S, 1.0, out, exec);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_FitExample1(benchmark::State& state) {
  SimConfig sim;
  const auto [data, truth] = generate(sim);
  FitConfig config;
  config.q = sim.q;
  config.qs = sim.qs;
  config.rank = sim.r0;
  config.backend = state.range(0) == 0 ? Backend::Reference : Backend::Parallel;
  config.threads = state.range(0) == 0 ? 1 : static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, config).elbo_trace.back());
}

}  // namespace

BENCHMARK(BM_LatentReference)->Args({250, 100})->Args({2000, 1000})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LatentOmp)->Args({250, 100, 1})->Args({2000, 1000, 1})->Args({2000, 1000, 4})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ElboSumReference)->Args({250, 100})->Args({2000, 1000})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ElboSumOmp)->Args({250, 100, 1})->Args({2000, 1000, 1})->Args({2000, 1000, 4})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ProjectReference)->Args({250, 100})->Args({2000, 1000})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ProjectOmp)->Args({250, 100, 1})->Args({2000, 1000, 1})->Args({2000, 1000, 4})->Unit(benchmark::kMicrosecond);
// 0 selects the reference backend, k > 0 the OpenMP backend with k threads.
BENCHMARK(BM_FitExample1)->Arg(0)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
