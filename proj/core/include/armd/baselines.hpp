#pragma once

#include "armd/series.hpp"
#include "armd/window.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace armd {

/// Repeat-history forecast: the next T steps equal the last T.
SeriesMatrix naive_forecast(const SeriesMatrix& history);

/// Channel-shared least-squares map history -> future, future_c = weight * history_c + bias.
struct LinearBaseline {
    std::size_t horizon = 0;
    std::vector<double> weight;  // row-major T x T
    std::vector<double> bias;

    [[nodiscard]] SeriesMatrix predict(const SeriesMatrix& history) const;
};

/**
 * Fits LinearBaseline by ridge-regularized normal equations over every
 * (window, channel) pair. Throws std::runtime_error if the system cannot be
 * factorized.
 */
LinearBaseline fit_linear_baseline(std::span<const WindowSample> windows, double ridge = 1e-6);

}  // namespace armd
