#include "armd/series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace armd {

namespace {

std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        names.push_back("ch" + std::to_string(c));
    }
    return names;
}

}  // namespace

SeriesMatrix::SeriesMatrix(std::size_t n_channels, std::size_t n_timesteps)
    : n_channels_(n_channels),
      n_timesteps_(n_timesteps),
      values_(n_channels * n_timesteps, 0.0),
      names_(default_names(n_channels)) {
    if (n_channels == 0 || n_timesteps == 0) {
        throw std::invalid_argument("SeriesMatrix: needs at least one channel and one timestep");
    }
}

SeriesMatrix::SeriesMatrix(std::size_t n_channels, std::size_t n_timesteps,
                           std::vector<double> values, std::vector<std::string> channel_names)
    : n_channels_(n_channels),
      n_timesteps_(n_timesteps),
      values_(std::move(values)),
      names_(std::move(channel_names)) {
    if (n_channels_ == 0 || n_timesteps_ == 0) {
        throw std::invalid_argument("SeriesMatrix: needs at least one channel and one timestep");
    }
    if (values_.size() != n_channels_ * n_timesteps_) {
        throw std::invalid_argument("SeriesMatrix: value count does not match shape");
    }
    check_finite();
    if (names_.empty()) {
        names_ = default_names(n_channels_);
    } else if (names_.size() != n_channels_) {
        throw std::invalid_argument("SeriesMatrix: channel name count does not match channels");
    }
}

SeriesMatrix SeriesMatrix::from_channels(const std::vector<std::vector<double>>& channels,
                                         std::vector<std::string> channel_names) {
    if (channels.empty()) {
        throw std::invalid_argument("SeriesMatrix: at least one channel is required");
    }
    const std::size_t steps = channels.front().size();
    std::vector<double> flat;
    flat.reserve(channels.size() * steps);
    for (const auto& ch : channels) {
        if (ch.size() != steps) {
            throw std::invalid_argument("SeriesMatrix: channels differ in length");
        }
        flat.insert(flat.end(), ch.begin(), ch.end());
    }
    return {channels.size(), steps, std::move(flat), std::move(channel_names)};
}

SeriesMatrix SeriesMatrix::columns(std::size_t first, std::size_t count) const {
    if (first + count > n_timesteps_) {
        std::ostringstream msg;
        msg << "SeriesMatrix::columns: range [" << first << ", " << first + count
            << ") exceeds " << n_timesteps_ << " timesteps";
        throw std::out_of_range(msg.str());
    }
    std::vector<double> out;
    out.reserve(n_channels_ * count);
    for (std::size_t c = 0; c < n_channels_; ++c) {
        const auto row = channel(c).subspan(first, count);
        out.insert(out.end(), row.begin(), row.end());
    }
    return {n_channels_, count, std::move(out), names_};
}

SeriesMatrix SeriesMatrix::permute_channels(std::span<const std::size_t> order) const {
    if (order.size() != n_channels_) {
        throw std::invalid_argument("permute_channels: order size does not match channel count");
    }
    std::vector<double> out;
    out.reserve(values_.size());
    std::vector<std::string> names;
    for (std::size_t src : order) {
        if (src >= n_channels_) {
            throw std::out_of_range("permute_channels: channel index out of range");
        }
        const auto row = channel(src);
        out.insert(out.end(), row.begin(), row.end());
        names.push_back(names_[src]);
    }
    return {n_channels_, n_timesteps_, std::move(out), std::move(names)};
}

void SeriesMatrix::check_finite() const {
    const auto it = std::find_if(values_.begin(), values_.end(),
                                 [](double v) { return !std::isfinite(v); });
    if (it != values_.end()) {
        const auto idx = static_cast<std::size_t>(it - values_.begin());
        std::ostringstream msg;
        msg << "SeriesMatrix: non-finite value at channel " << idx / n_timesteps_ << ", step "
            << idx % n_timesteps_;
        throw std::invalid_argument(msg.str());
    }
}

void require_same_shape(const SeriesMatrix& a, const SeriesMatrix& b, const char* what) {
    if (!a.same_shape(b)) {
        std::ostringstream msg;
        msg << what << ": shape mismatch (" << a.n_channels() << "x" << a.n_timesteps() << " vs "
            << b.n_channels() << "x" << b.n_timesteps() << ")";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace armd
