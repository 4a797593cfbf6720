#pragma once

#include <cstddef>
#include <vector>

namespace armd {

inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

/**
 * @brief Precomputed diffusion coefficients for steps 0..T.
 *
 * Index 0 is the future series (no diffusion): beta[0] = 0 and
 * alpha_bar[0] = 1 exactly. Index T is the historical series. T is also
 * the forecast horizon and the history length.
 */
struct DiffusionSchedule {
    std::size_t horizon = 0;
    double beta_start = kDefaultBetaStart;
    double beta_end = kDefaultBetaEnd;
    std::vector<double> beta;       // size horizon + 1
    std::vector<double> alpha_bar;  // size horizon + 1, cumulative product of (1 - beta)

    [[nodiscard]] double alpha_bar_at(std::size_t t) const { return alpha_bar.at(t); }
};

/**
 * Linear beta schedule from beta_start (t = 1) to beta_end (t = T), with
 * alpha_bar as the running product of (1 - beta). For T = 1 the single
 * step uses beta_start.
 *
 * Throws std::invalid_argument unless T >= 1 and 0 < beta_start <= beta_end < 1.
 */
DiffusionSchedule build_schedule(std::size_t horizon, double beta_start = kDefaultBetaStart,
                                 double beta_end = kDefaultBetaEnd);

}  // namespace armd
