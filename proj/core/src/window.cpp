#include "armd/window.hpp"

#include <stdexcept>

namespace armd {

WindowSample::WindowSample(std::shared_ptr<const SeriesMatrix> source, std::size_t offset,
                           std::size_t horizon)
    : source_(std::move(source)), offset_(offset), horizon_(horizon) {
    if (!source_) {
        throw std::invalid_argument("WindowSample: null source series");
    }
    if (horizon_ == 0) {
        throw std::invalid_argument("WindowSample: horizon must be at least 1");
    }
    if (offset_ + 2 * horizon_ > source_->n_timesteps()) {
        throw std::out_of_range("WindowSample: window extends past the end of the series");
    }
}

SeriesMatrix WindowSample::context() const { return source_->columns(offset_, 2 * horizon_); }

SeriesMatrix WindowSample::history() const { return source_->columns(offset_, horizon_); }

SeriesMatrix WindowSample::future() const {
    return source_->columns(offset_ + horizon_, horizon_);
}

SeriesMatrix WindowSample::slice(std::size_t first) const {
    if (first > horizon_) {
        throw std::out_of_range("WindowSample::slice: slice would leave the context");
    }
    return source_->columns(offset_ + first, horizon_);
}

std::vector<WindowSample> make_window_samples(std::shared_ptr<const SeriesMatrix> series,
                                              std::size_t horizon, std::size_t stride) {
    if (!series) {
        throw std::invalid_argument("make_window_samples: null series");
    }
    if (horizon == 0 || stride == 0) {
        throw std::invalid_argument("make_window_samples: horizon and stride must be positive");
    }
    std::vector<WindowSample> out;
    const std::size_t length = 2 * horizon;
    const std::size_t n = series->n_timesteps();
    if (n < length) {
        return out;
    }
    out.reserve((n - length) / stride + 1);
    for (std::size_t offset = 0; offset + length <= n; offset += stride) {
        out.emplace_back(series, offset, horizon);
    }
    return out;
}

std::vector<WindowSample> make_window_samples(const SeriesMatrix& series, std::size_t horizon,
                                              std::size_t stride) {
    return make_window_samples(std::make_shared<const SeriesMatrix>(series), horizon, stride);
}

}  // namespace armd
