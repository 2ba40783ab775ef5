#include <benchmark/benchmark.h>

#include "gradnorm/atm.hpp"
#include "gradnorm/problems.hpp"
#include "gradnorm/restarts.hpp"
#include "gradnorm/taylor_step.hpp"
#include "gradnorm/transport.hpp"

using namespace gradnorm;

namespace {

void BM_TensorStepLogistic(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  auto f = logistic_problem(synthetic_logistic(10 * n, n, 1));
  const Vector x = Vector::Constant(n, 0.1);
  const double M = p * *f->lipschitz(p);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_step(*f, x, p, M).y);
}
BENCHMARK(BM_TensorStepLogistic)->ArgsProduct({{1, 2, 3}, {10, 50}});

void BM_TensorStepOtDual(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto f = ot_dual_problem(random_transport(n, 0.5, 1));
  const Vector x = Vector::Zero(2 * n);
  const double M = 3 * *f->lipschitz(3);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_step(*f, x, 3, M).y);
}
BENCHMARK(BM_TensorStepOtDual)->Arg(10)->Arg(20);

void BM_AcceleratedIterations(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto f = hard_family_problem({3, n, n});
  const int N = 20;
  for (auto _ : state) benchmark::DoNotOptimize(run_atm(*f, Vector::Zero(n), N, 3, 96.0).y);
  state.SetItemsProcessed(state.iterations() * N);
}
BENCHMARK(BM_AcceleratedIterations)->Arg(5)->Arg(10)->Arg(40);

void BM_RadiusWrapperLogistic(benchmark::State& state) {
  auto f = logistic_problem(synthetic_logistic(100, 10, 42));
  const Vector x0 = Vector::Zero(10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_gradnorm_from_radius(*f, x0, 10.0, 1e-5, *f->lipschitz(3), 3).z);
  }
}
BENCHMARK(BM_RadiusWrapperLogistic)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
