#pragma once

#include "armd/schedule.hpp"
#include "armd/series.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace armd {

/**
 * @brief Constants b, c, d of the adaptive balance between input and distance.
 *
 *   x0_hat = (W(t) * x + (1 - b * W(t)) * D) / (1 + c * W(t))^d
 *
 * Grid used for tuning: b in {1, 1.5, 2}, c in {-1, -0.5, 0.5, 1}, d in {0.3, 0.5, 1}.
 */
struct BalanceParams {
    double b = 1.0;
    double c = 0.5;
    double d = 0.5;

    friend bool operator==(const BalanceParams&, const BalanceParams&) = default;
};

/// Smallest admissible value of 1 + c * W(t) at construction.
inline constexpr double kMinBalanceBase = 1e-6;

/**
 * @brief Linear devolution network.
 *
 * A shared T x T linear map plus bias predicts the distance D for each
 * channel independently; per-step weights W(t) = sigmoid(w_logits[t - 1])
 * blend D with the input. All trainable parameters live in one contiguous
 * buffer laid out as [weight (row-major T*T) | bias (T) | w_logits (T)] so an
 * optimizer can treat them as a single vector.
 */
class DevolutionModel {
public:
    /// Throws std::invalid_argument on size mismatch or if 1 + c * W(t) <= kMinBalanceBase for some t.
    DevolutionModel(std::size_t horizon, BalanceParams balance, std::vector<double> weight,
                    std::vector<double> bias, std::vector<double> w_logits);

    /**
     * Untrained model: weight = I + U(-init_noise, init_noise), bias = 0 and
     * W(t) = alpha_bar[t], which makes the distance head start near persistence.
     */
    static DevolutionModel initialize(const DiffusionSchedule& schedule, BalanceParams balance,
                                      std::uint64_t seed, double init_noise = 0.01);

    static constexpr std::size_t parameter_count(std::size_t horizon) noexcept {
        return horizon * horizon + 2 * horizon;
    }

    [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
    [[nodiscard]] const BalanceParams& balance() const noexcept { return balance_; }

    [[nodiscard]] std::span<const double> weight() const noexcept {
        return {params_.data(), horizon_ * horizon_};
    }
    [[nodiscard]] std::span<const double> bias() const noexcept {
        return {params_.data() + horizon_ * horizon_, horizon_};
    }
    [[nodiscard]] std::span<const double> w_logits() const noexcept {
        return {params_.data() + horizon_ * horizon_ + horizon_, horizon_};
    }

    [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }
    [[nodiscard]] std::span<double> parameters() noexcept { return params_; }

    /// W(t) for t in 1..T.
    [[nodiscard]] double step_weight(std::size_t t) const;

    friend bool operator==(const DevolutionModel&, const DevolutionModel&) = default;

private:
    std::size_t horizon_;
    BalanceParams balance_;
    std::vector<double> params_;
};

struct PredictionPair {
    SeriesMatrix x0_hat;
    SeriesMatrix z_hat;
};

/// D = weight * x_c + bias for every channel c.
SeriesMatrix distance_head(const DevolutionModel& model, const SeriesMatrix& xt);

/// Balanced estimate of the future series from state xt at step t in 1..T.
SeriesMatrix predict_x0(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t);

/// x0_hat from xt, then the implied trend z_hat from the same xt.
PredictionPair predict_trend(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule);

/**
 * Training form: the network sees `input` (possibly with deviation added)
 * while z_hat is formed from the clean state `xt`.
 */
PredictionPair predict_trend(const DevolutionModel& model, const SeriesMatrix& input,
                             const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule);

/// Mean absolute difference over all elements.
double l1_loss(const SeriesMatrix& z_true, const SeriesMatrix& z_hat);

/// Gradient of l1_loss, in the model's flat parameter layout.
struct DevolutionGradients {
    std::size_t horizon = 0;
    double loss = 0.0;
    std::vector<double> flat;

    [[nodiscard]] std::span<const double> weight() const noexcept {
        return {flat.data(), horizon * horizon};
    }
    [[nodiscard]] std::span<const double> bias() const noexcept {
        return {flat.data() + horizon * horizon, horizon};
    }
    [[nodiscard]] std::span<const double> w_logits() const noexcept {
        return {flat.data() + horizon * horizon + horizon, horizon};
    }
};

/**
 * Analytic gradient of l1_loss(z_true, z_hat) with respect to weight, bias
 * and w_logits (only entry t - 1 is non-zero). The subgradient of |.| at 0
 * is taken as 0.
 */
DevolutionGradients backward(const DevolutionModel& model, const SeriesMatrix& input,
                             const SeriesMatrix& xt, std::size_t t, const SeriesMatrix& z_true,
                             const DiffusionSchedule& schedule);

/// backward() without deviation: the network input is xt itself.
DevolutionGradients backward(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t,
                             const SeriesMatrix& z_true, const DiffusionSchedule& schedule);

/**
 * Adds scale * d(loss)/d(params) into `grad` (flat layout) and returns the
 * loss. Used by the trainer to reduce a batch without temporaries.
 */
double accumulate_gradients(const DevolutionModel& model, const SeriesMatrix& input,
                            const SeriesMatrix& xt, std::size_t t, const SeriesMatrix& z_true,
                            const DiffusionSchedule& schedule, double scale,
                            std::span<double> grad);

double sigmoid(double x) noexcept;
double logit(double p);

}  // namespace armd
