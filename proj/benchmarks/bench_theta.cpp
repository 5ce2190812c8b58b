#include <benchmark/benchmark.h>

#include "finitegap/theta.hpp"

using namespace finitegap;

namespace {

CMat sample_matrix(int g) {
  CMat B = CMat::Zero(g, g);
  for (int i = 0; i < g; ++i) {
    B(i, i) = cplx(0.1 * i, 1.0 + 0.1 * i);
    for (int j = i + 1; j < g; ++j) {
      B(i, j) = B(j, i) = cplx(0.15, 0.1);
    }
  }
  return B;
}

void BM_theta_value(benchmark::State& state) {
  const int g = static_cast<int>(state.range(0));
  ThetaEngine t(sample_matrix(g));
  CVec z(g);
  for (int i = 0; i < g; ++i) z[i] = cplx(0.21 + 0.03 * i, -0.17 + 0.05 * i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.value(z));
  }
}
BENCHMARK(BM_theta_value)->Arg(1)->Arg(2)->Arg(3);

void BM_theta_second_derivative(benchmark::State& state) {
  const int g = static_cast<int>(state.range(0));
  ThetaEngine t(sample_matrix(g));
  CVec z(g), d(g);
  for (int i = 0; i < g; ++i) {
    z[i] = cplx(0.21 + 0.03 * i, -0.17 + 0.05 * i);
    d[i] = cplx(1.0, 0.2 * i);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.deriv(z, {d, d}));
  }
}
BENCHMARK(BM_theta_second_derivative)->Arg(1)->Arg(2)->Arg(3);

void BM_kummer_vector(benchmark::State& state) {
  const int g = static_cast<int>(state.range(0));
  JacobianTheta jt(sample_matrix(g));
  CVec z(g);
  for (int i = 0; i < g; ++i) z[i] = cplx(0.11 - 0.02 * i, 0.08 + 0.04 * i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jt.kummer(z));
  }
}
BENCHMARK(BM_kummer_vector)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
