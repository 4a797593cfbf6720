#include "armd/metrics.hpp"

#include <cmath>

namespace armd {

namespace {

struct ErrorSums {
    double sq = 0.0;
    double abs = 0.0;
};

ErrorSums error_sums(const SeriesMatrix& prediction, const SeriesMatrix& truth) {
    require_same_shape(prediction, truth, "compute_metrics");
    const auto p = prediction.values();
    const auto y = truth.values();
    ErrorSums s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double e = p[i] - y[i];
        s.sq += e * e;
        s.abs += std::abs(e);
    }
    return s;
}

}  // namespace

WindowMetrics compute_metrics(const SeriesMatrix& prediction, const SeriesMatrix& truth) {
    const ErrorSums s = error_sums(prediction, truth);
    const double n = static_cast<double>(prediction.size());
    return {s.sq / n, s.abs / n};
}

void MetricReport::add(const SeriesMatrix& prediction, const SeriesMatrix& truth) {
    const ErrorSums s = error_sums(prediction, truth);
    const double n = static_cast<double>(prediction.size());
    window_mse.push_back(s.sq / n);
    window_mae.push_back(s.abs / n);
    ++n_windows;
    sq_sum_ += s.sq;
    abs_sum_ += s.abs;
    elements_ += prediction.size();
    mse = sq_sum_ / static_cast<double>(elements_);
    mae = abs_sum_ / static_cast<double>(elements_);
}

}  // namespace armd
