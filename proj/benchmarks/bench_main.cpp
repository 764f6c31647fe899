#include <benchmark/benchmark.h>

#include "sdosim/analytic.hpp"
#include "sdosim/detection.hpp"
#include "sdosim/directory.hpp"

using namespace sdosim;

static void BM_ErrorRates(benchmark::State& state) {
  analytic::ModelParams p;
  p.f = 0.23;
  p.n = static_cast<int>(state.range(0));
  p.k = p.n / 2;
  p.threshold = p.k / 2 + 1;
  for (auto _ : state) benchmark::DoNotOptimize(analytic::error_rates(p));
}
BENCHMARK(BM_ErrorRates)->Arg(10)->Arg(40)->Arg(80);

static void BM_ExactTail(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytic::fn_given_counts_exact(n / 4, n, n / 2, n / 4));
  }
}
BENCHMARK(BM_ExactTail)->Arg(8)->Arg(32);

static void BM_RunDetection(benchmark::State& state) {
  const Directory dir =
      tag_compromised(synthesize_directory(3000, BandwidthDist{}, RoleMix{}, 1), 0.2, 2);
  DetectionConfig cfg;
  cfg.env.failure_rate = 0.23;
  cfg.mode = state.range(0) ? SamplingMode::Realistic : SamplingMode::AnalyticMatching;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = ++seed;
    benchmark::DoNotOptimize(run_detection(dir, cfg));
  }
}
BENCHMARK(BM_RunDetection)->Arg(0)->Arg(1);
BENCHMARK_MAIN();
