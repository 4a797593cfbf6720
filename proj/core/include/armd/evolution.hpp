#pragma once

#include "armd/schedule.hpp"
#include "armd/series.hpp"
#include "armd/window.hpp"

#include <cstddef>
#include <cstdint>
#include <random>

namespace armd {

/// How intermediate diffusion states are produced from a window.
enum class StateGenerator {
    sliding,        ///< the window shifted t steps toward the past
    interpolation,  ///< affine blend of future and history (ablation)
};

/**
 * @brief Intermediate state X^t together with its evolution trend z^t.
 *
 * Holds sqrt(alpha_bar[t]) * X^0 + sqrt(1 - alpha_bar[t]) * trend == values
 * up to rounding.
 */
struct DiffusedState {
    std::size_t step = 0;
    SeriesMatrix values;
    SeriesMatrix trend;
};

struct DeviationConfig {
    bool enabled = true;
    std::uint64_t seed = 0;
};

/**
 * The length-T slice of the context whose right edge sits `from_step + k`
 * steps before the end of the window. slide(s, 0, 0) is the future,
 * slide(s, T, 0) the history.
 *
 * Throws std::out_of_range if from_step + k > T.
 */
SeriesMatrix slide(const WindowSample& sample, std::size_t k, std::size_t from_step = 0);

/**
 * z^t = (sqrt(1/a) * xt - x0) / sqrt(1/a - 1) with a = alpha_bar[t].
 *
 * This is also the arithmetic used for the predicted trend, so substituting
 * the true X^0 for a prediction reproduces the target bit for bit.
 * Throws for t == 0, t > T, or mismatched shapes.
 */
SeriesMatrix evolution_trend(const SeriesMatrix& x0, const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule);

/// Sliding forward diffusion of `sample` to step t in 1..T.
DiffusedState diffuse(const WindowSample& sample, std::size_t t, const DiffusionSchedule& schedule);

/// X^0 + (X^T - X^0) * t / T; t in 0..T.
SeriesMatrix interpolate_state(const WindowSample& sample, std::size_t t);

/// State and target for step t under the chosen generator; trend always via evolution_trend.
DiffusedState make_state(const WindowSample& sample, std::size_t t,
                         const DiffusionSchedule& schedule, StateGenerator generator);

/**
 * Returns xt + alpha_bar[t] * eps with eps ~ N(0, I) drawn from `rng`.
 * When the config is disabled the input is returned unchanged and `rng` is
 * not advanced.
 */
SeriesMatrix apply_deviation(const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule, const DeviationConfig& config,
                             std::mt19937_64& rng);

/// Independent generator for one (seed, a, b) stream, e.g. (seed, iteration, batch slot).
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace armd
