#include <benchmark/benchmark.h>

#include <random>

#include "semimnar/gamma_estimators.hpp"
#include "semimnar/simulation.hpp"
#include "semimnar/working_model.hpp"

using namespace semimnar;

namespace {

Dataset draw(DgpFamily family, std::size_t n) {
  std::mt19937_64 rng(42);
  const DgpSpec spec = make_dgp(family, ResponseModelId::M1, n);
  return family == DgpFamily::discrete ? gen_discrete(spec, rng) : gen_mixed(spec, rng);
}

void BM_ProfileFitDiscrete(benchmark::State& state) {
  const Sample s(draw(DgpFamily::discrete, static_cast<std::size_t>(state.range(0))), {});
  const ProfileFitter fitter(s);
  for (auto _ : state) benchmark::DoNotOptimize(fitter.fit(0.6));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProfileFitDiscrete)->RangeMultiplier(4)->Range(1000, 64000)->Complexity();

void BM_Ca1ResidualDiscrete(benchmark::State& state) {
  const Sample s(draw(DgpFamily::discrete, static_cast<std::size_t>(state.range(0))), {});
  const ProfileFitter fitter(s);
  const NonparametricE0 e(s);
  const Ca1Moment m(e);
  for (auto _ : state) benchmark::DoNotOptimize(calibration_residual(fitter, 0.6, m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ca1ResidualDiscrete)->RangeMultiplier(4)->Range(1000, 64000)->Complexity();

void BM_ScoreResidualMixed(benchmark::State& state) {
  const Sample s(draw(DgpFamily::mixed, static_cast<std::size_t>(state.range(0))), {});
  const ProfileFitter fitter(s);
  const NonparametricE0 e(s);
  (void)s.by_x();  // kernel matrices are built lazily; keep that out of the timing
  for (auto _ : state) benchmark::DoNotOptimize(score_residual(fitter, 0.5, e));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScoreResidualMixed)->RangeMultiplier(2)->Range(500, 4000)->Complexity();

void BM_FractionalE0Mixed(benchmark::State& state) {
  const Dataset d = draw(DgpFamily::mixed, 2000);
  const Sample s(d, {});
  const Design design(outcome_design(DgpFamily::mixed), d);
  const FractionalE0 e(s, fit_working_model(d, design), static_cast<std::size_t>(state.range(0)), 7);
  const ProfileState st = ProfileFitter(s).fit(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(e.evaluate(E0Functional::y, st));
}
BENCHMARK(BM_FractionalE0Mixed)->Arg(100)->Arg(500);

void BM_StudyReplicationDiscrete(benchmark::State& state) {
  StudyConfig c;
  c.dgp = make_dgp(DgpFamily::discrete, ResponseModelId::M1, 4000);
  c.gamma_estimators = {"p-gmm", "p-score", "p-ca1", "p-ca2"};
  c.mu_estimators = {"mu-ipw", "mu-mp", "mu-db"};
  c.reps = 1;
  for (auto _ : state) {
    c.base_seed++;
    benchmark::DoNotOptimize(run_study(c));
  }
}
BENCHMARK(BM_StudyReplicationDiscrete)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
