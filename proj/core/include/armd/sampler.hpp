#pragma once

#include "armd/devolution.hpp"
#include "armd/schedule.hpp"
#include "armd/series.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace armd {

/// Sampling-step grid searched on the validation split.
inline constexpr std::size_t kSamplingStepGrid[] = {1, 2, 3, 4, 6, 8, 12};

/// Anything that maps a state at step t to an estimate of the future series.
using X0Predictor = std::function<SeriesMatrix(const SeriesMatrix& state, std::size_t step)>;

/// Wraps a model; the model must outlive the returned predictor.
X0Predictor as_predictor(const DevolutionModel& model);

struct SamplerConfig {
    std::size_t n_steps = 1;
    /// Noise ablation: adds sigma_t * eps with sigma_t^2 = noise_fraction * (1 - alpha_bar[t-k]).
    bool add_noise = false;
    double noise_fraction = 0.01;
    std::uint64_t seed = 0;
    /// Keep intermediate states; unset means keep when T <= 512.
    std::optional<bool> keep_trajectory;
};

struct TrajectoryPoint {
    std::size_t step;
    SeriesMatrix state;
};

struct ForecastRun {
    std::vector<TrajectoryPoint> trajectory;  // T down to 0 when retained
    SeriesMatrix prediction;                  // state at step 0
};

/**
 * One skip-step reverse update from step t to t - k:
 *
 *   x_{t-k} = sqrt(a) * x0_hat + sqrt(1 - a - sigma^2) * z_hat (+ sigma * eps),  a = alpha_bar[t-k]
 *
 * With k == t the z_hat coefficient is exactly zero and the result is x0_hat.
 * `rng` is only used when config.add_noise is set and must then be non-null.
 */
SeriesMatrix sample_step(const X0Predictor& predictor, const SeriesMatrix& xt, std::size_t t,
                         std::size_t k, const DiffusionSchedule& schedule,
                         const SamplerConfig& config, std::mt19937_64* rng = nullptr);

SeriesMatrix sample_step(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t,
                         std::size_t k, const DiffusionSchedule& schedule,
                         const SamplerConfig& config, std::mt19937_64* rng = nullptr);

/**
 * Steps visited by a forecast with `n_steps` applications: T, T - s, T - 2s, ...
 * with s = floor(T / n_steps), the last application jumping straight to 0.
 */
std::vector<std::size_t> sampling_schedule(std::size_t horizon, std::size_t n_steps);

/// Reverse process from the history (step T) to the forecast (step 0).
ForecastRun forecast(const X0Predictor& predictor, const SeriesMatrix& history,
                     const DiffusionSchedule& schedule, const SamplerConfig& config);

ForecastRun forecast(const DevolutionModel& model, const SeriesMatrix& history,
                     const DiffusionSchedule& schedule, const SamplerConfig& config);

}  // namespace armd
