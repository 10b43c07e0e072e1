#include <benchmark/benchmark.h>

#include "bandwagon/lambda_estimation.hpp"
#include "bandwagon/simulator.hpp"
#include "bandwagon/theory.hpp"

using namespace bandwagon;

namespace {

EnsembleConfig ensemble_config(benchmark::State& state) {
    return {TruePreference(0.4), LambdaSchedule::strong(), static_cast<std::size_t>(state.range(0)), 2000, 1, {}};
}

EstimatorSetup all_estimators() {
    EstimatorSetup s;
    s.estimators = {EstimatorKind::SampleMean, EstimatorKind::AffineUniform, EstimatorKind::AffineWeighted,
                    EstimatorKind::Mle};
    return s;
}

void BM_EnsembleParallel(benchmark::State& state) {
    const auto c = ensemble_config(state);
    const auto s = all_estimators();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(c, s));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_EnsembleSerial(benchmark::State& state) {
    const auto c = ensemble_config(state);
    const auto s = all_estimators();
    for (auto _ : state) benchmark::DoNotOptimize(reference::simulate_ensemble(c, s));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_OracleParallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(theory::brute_force_oracle(0.4, LambdaSchedule::strong(), n));
}

void BM_OracleSerial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(reference::brute_force_oracle(0.4, LambdaSchedule::strong(), n));
}

void BM_LambdaFit(benchmark::State& state) {
    const auto data = simulate_bin_dataset(1, static_cast<std::size_t>(state.range(0)), 100,
                                           std::vector<double>{0.4}, LambdaSchedule::strong(), 1);
    LambdaFitOptions opt;
    opt.free_lambda_diagnostic = false;
    for (auto _ : state) benchmark::DoNotOptimize(fit_lambda_mle(data, opt));
}

}  // namespace

BENCHMARK(BM_EnsembleParallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleSerial)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LambdaFit)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
