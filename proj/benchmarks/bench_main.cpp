// Per-round cost of the online estimator against the MLE refit, plus the
// inner kernels. Arg(0) of the history benchmarks is the number of rounds
// already observed.

#include <benchmark/benchmark.h>

#include <numeric>

#include "mnl/assortment.hpp"
#include "mnl/estimator.hpp"
#include "mnl/instances.hpp"
#include "mnl/mle.hpp"
#include "mnl/projection.hpp"

using namespace mnl;

namespace {

constexpr std::size_t kD = 5;
constexpr std::size_t kN = 100;
constexpr std::size_t kK = 10;

const MnlInstance& instance() {
  static const MnlInstance inst = synth_instance(kD, kN, kK, 100'000, 1.0, RewardMode::kUniform, 3);
  return inst;
}

Assortment leading(std::size_t k) {
  std::vector<std::size_t> v(k);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return Assortment(v);
}

ChoiceFeedback draw(const Assortment& a, const FeatureMatrix& x, Rng& rng) {
  return sample_choice(choice_probabilities(a, x, instance().w_star, 1.0), rng);
}

void BM_OnlineStep(benchmark::State& bench) {
  const auto rounds = static_cast<std::size_t>(bench.range(0));
  Rng rng(1);
  const Assortment a = leading(kK);
  EstimatorState s = init_estimator(kD, kK, 0.05);
  for (std::size_t t = 1; t <= rounds; ++t) {
    const RoundData r = instance().round(t);
    s = step(s, a, r.features, draw(a, r.features, rng), 1.0);
  }
  const RoundData r = instance().round(rounds + 1);
  const ChoiceFeedback y = draw(a, r.features, rng);
  for (auto _ : bench) benchmark::DoNotOptimize(step(s, a, r.features, y, 1.0));
}
BENCHMARK(BM_OnlineStep)->Arg(10)->Arg(1000)->Arg(3000)->Unit(benchmark::kMicrosecond);

void BM_MleObserve(benchmark::State& bench) {
  const auto rounds = static_cast<std::size_t>(bench.range(0));
  Rng rng(1);
  const Assortment a = leading(kK);
  BaselineState s = init_baseline(kD, 1.0);
  for (std::size_t t = 1; t <= rounds; ++t) {
    const RoundData r = instance().round(t);
    observe(s, a, r.features, draw(a, r.features, rng), 1.0);
  }
  const RoundData r = instance().round(rounds + 1);
  const ChoiceFeedback y = draw(a, r.features, rng);
  for (auto _ : bench) {
    bench.PauseTiming();
    BaselineState copy = s;
    bench.ResumeTiming();
    observe(copy, a, r.features, y, 1.0);
    benchmark::DoNotOptimize(copy.w_hat);
  }
}
BENCHMARK(BM_MleObserve)->Arg(10)->Arg(1000)->Arg(3000)->Unit(benchmark::kMicrosecond);

void BM_OptimizeRevenue(benchmark::State& bench) {
  Rng rng(2);
  std::vector<double> u(kN);
  std::vector<double> r(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    u[i] = uniform(rng, -1.0, 1.0);
    r[i] = uniform01(rng);
  }
  const auto k = static_cast<std::size_t>(bench.range(0));
  for (auto _ : bench) benchmark::DoNotOptimize(optimize_revenue(u, r, 1.0, k));
}
BENCHMARK(BM_OptimizeRevenue)->Arg(5)->Arg(10)->Arg(15);

void BM_ProjectBall(benchmark::State& bench) {
  Rng rng(4);
  Matrix b(kD, kD);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = standard_normal(rng);
  const Matrix metric = b * b.transpose() + Matrix::Identity(kD, kD);
  Vector w(kD);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 2.0 * standard_normal(rng);
  for (auto _ : bench) benchmark::DoNotOptimize(project_ball(w, metric));
}
BENCHMARK(BM_ProjectBall);

}  // namespace

BENCHMARK_MAIN();
