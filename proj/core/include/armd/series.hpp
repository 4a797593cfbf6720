#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace armd {

/**
 * @brief Dense multivariate time series, stored channel-major.
 *
 * Row c holds channel c over time; column j is timestep j. Values are
 * required to be finite. Every operation in the library treats a
 * SeriesMatrix as an immutable value: slicing returns a copy.
 */
class SeriesMatrix {
public:
    SeriesMatrix() = default;

    /// Zero-filled matrix; channel names default to "ch0", "ch1", ...
    SeriesMatrix(std::size_t n_channels, std::size_t n_timesteps);

    /// Takes ownership of channel-major `values` (size n_channels * n_timesteps).
    SeriesMatrix(std::size_t n_channels, std::size_t n_timesteps, std::vector<double> values,
                 std::vector<std::string> channel_names = {});

    /// Builds from one vector per channel; all must share a length.
    static SeriesMatrix from_channels(const std::vector<std::vector<double>>& channels,
                                      std::vector<std::string> channel_names = {});

    [[nodiscard]] std::size_t n_channels() const noexcept { return n_channels_; }
    [[nodiscard]] std::size_t n_timesteps() const noexcept { return n_timesteps_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    [[nodiscard]] double operator()(std::size_t channel, std::size_t step) const noexcept {
        return values_[channel * n_timesteps_ + step];
    }
    [[nodiscard]] double& operator()(std::size_t channel, std::size_t step) noexcept {
        return values_[channel * n_timesteps_ + step];
    }

    [[nodiscard]] std::span<const double> channel(std::size_t c) const noexcept {
        return {values_.data() + c * n_timesteps_, n_timesteps_};
    }
    [[nodiscard]] std::span<double> channel(std::size_t c) noexcept {
        return {values_.data() + c * n_timesteps_, n_timesteps_};
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }

    [[nodiscard]] const std::vector<std::string>& channel_names() const noexcept { return names_; }

    /// Copy of timesteps [first, first + count) for every channel.
    [[nodiscard]] SeriesMatrix columns(std::size_t first, std::size_t count) const;

    /// Same channels, with channel order rearranged as out[i] = in[order[i]].
    [[nodiscard]] SeriesMatrix permute_channels(std::span<const std::size_t> order) const;

    [[nodiscard]] bool same_shape(const SeriesMatrix& other) const noexcept {
        return n_channels_ == other.n_channels_ && n_timesteps_ == other.n_timesteps_;
    }

    /// Throws std::invalid_argument if any value is NaN or infinite.
    void check_finite() const;

    friend bool operator==(const SeriesMatrix& a, const SeriesMatrix& b) noexcept {
        return a.n_channels_ == b.n_channels_ && a.n_timesteps_ == b.n_timesteps_ &&
               a.values_ == b.values_;
    }

private:
    std::size_t n_channels_ = 0;
    std::size_t n_timesteps_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

/// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const SeriesMatrix& a, const SeriesMatrix& b, const char* what);

}  // namespace armd
