#pragma once

#include "armd/series.hpp"

#include <cstddef>
#include <vector>

namespace armd {

struct WindowMetrics {
    double mse = 0.0;
    double mae = 0.0;
};

/// Element-wise MSE and MAE between a forecast and the truth (same shape).
WindowMetrics compute_metrics(const SeriesMatrix& prediction, const SeriesMatrix& truth);

/**
 * @brief Running MSE/MAE over many forecast windows.
 *
 * Aggregates are element-weighted, which equals the mean of the per-window
 * values when every window has the same size (the usual case).
 */
struct MetricReport {
    double mse = 0.0;
    double mae = 0.0;
    std::size_t n_windows = 0;
    std::vector<double> window_mse;
    std::vector<double> window_mae;

    void add(const SeriesMatrix& prediction, const SeriesMatrix& truth);

private:
    double sq_sum_ = 0.0;
    double abs_sum_ = 0.0;
    std::size_t elements_ = 0;
};

}  // namespace armd
