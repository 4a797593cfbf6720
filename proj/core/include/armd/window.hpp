#pragma once

#include "armd/series.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace armd {

/**
 * @brief A 2T-long context window: T steps of history followed by T steps of future.
 *
 * Context column j corresponds to relative time j - T + 1, so relative time
 * 0 (the forecast origin) is column T - 1. The window references its source
 * series instead of copying it; samples are cheap to hold in bulk and safe to
 * share between threads.
 */
class WindowSample {
public:
    WindowSample(std::shared_ptr<const SeriesMatrix> source, std::size_t offset,
                 std::size_t horizon);

    [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t n_channels() const noexcept { return source_->n_channels(); }
    /// First column of the context in the source series.
    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
    /// Absolute source index of relative time 0 (last history step).
    [[nodiscard]] std::size_t origin_index() const noexcept { return offset_ + horizon_ - 1; }

    /// All 2T columns.
    [[nodiscard]] SeriesMatrix context() const;
    /// First T columns (diffusion step T).
    [[nodiscard]] SeriesMatrix history() const;
    /// Last T columns (diffusion step 0).
    [[nodiscard]] SeriesMatrix future() const;
    /// T columns starting at context column `first`; first + T must not exceed 2T.
    [[nodiscard]] SeriesMatrix slice(std::size_t first) const;

private:
    std::shared_ptr<const SeriesMatrix> source_;
    std::size_t offset_;
    std::size_t horizon_;
};

/**
 * Every 2T-long window starting at offsets 0, stride, 2*stride, ... that lies
 * entirely inside `series`. Returns an empty list when the series is shorter
 * than 2T.
 */
std::vector<WindowSample> make_window_samples(std::shared_ptr<const SeriesMatrix> series,
                                              std::size_t horizon, std::size_t stride);

/// Convenience overload that copies `series` into shared storage.
std::vector<WindowSample> make_window_samples(const SeriesMatrix& series, std::size_t horizon,
                                              std::size_t stride);

}  // namespace armd
