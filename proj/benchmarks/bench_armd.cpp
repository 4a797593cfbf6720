#include "armd/devolution.hpp"
#include "armd/evolution.hpp"
#include "armd/sampler.hpp"
#include "armd/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

armd::SeriesMatrix random_series(std::size_t channels, std::size_t length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> v(channels * length);
    for (double& x : v) {
        x = normal(rng);
    }
    return {channels, length, std::move(v)};
}

void BM_PredictTrend(benchmark::State& state) {
    const auto horizon = static_cast<std::size_t>(state.range(0));
    const auto schedule = armd::build_schedule(horizon);
    const auto model = armd::DevolutionModel::initialize(schedule, {}, 1);
    const auto xt = random_series(7, horizon, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(armd::predict_trend(model, xt, horizon / 2, schedule));
    }
}
BENCHMARK(BM_PredictTrend)->Arg(32)->Arg(96)->Arg(336);

void BM_Backward(benchmark::State& state) {
    const auto horizon = static_cast<std::size_t>(state.range(0));
    const auto schedule = armd::build_schedule(horizon);
    const auto model = armd::DevolutionModel::initialize(schedule, {}, 1);
    const auto xt = random_series(7, horizon, 2);
    const auto z = random_series(7, horizon, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(armd::backward(model, xt, horizon / 2, z, schedule));
    }
}
BENCHMARK(BM_Backward)->Arg(32)->Arg(96)->Arg(336);

void BM_Forecast(benchmark::State& state) {
    const std::size_t horizon = 96;
    const auto schedule = armd::build_schedule(horizon);
    const auto model = armd::DevolutionModel::initialize(schedule, {}, 1);
    const auto history = random_series(7, horizon, 4);
    armd::SamplerConfig cfg;
    cfg.n_steps = static_cast<std::size_t>(state.range(0));
    cfg.keep_trajectory = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(armd::forecast(model, history, schedule, cfg));
    }
}
BENCHMARK(BM_Forecast)->Arg(1)->Arg(4)->Arg(12);

void BM_TrainIteration(benchmark::State& state) {
    const std::size_t horizon = 96;
    const auto schedule = armd::build_schedule(horizon);
    const auto series = random_series(7, 2000, 5);
    const auto windows = armd::make_window_samples(series, horizon, 1);
    armd::TrainConfig cfg;
    cfg.iterations = 1;
    cfg.batch_size = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(armd::train(windows, schedule, cfg));
    }
}
BENCHMARK(BM_TrainIteration)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
