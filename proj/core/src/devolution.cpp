#include "armd/devolution.hpp"

#include "armd/evolution.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace armd {

namespace {

void require_step(std::size_t t, std::size_t horizon, const char* what) {
    if (t == 0 || t > horizon) {
        std::ostringstream msg;
        msg << what << ": step " << t << " outside 1.." << horizon;
        throw std::out_of_range(msg.str());
    }
}

void require_length(const SeriesMatrix& x, std::size_t horizon, const char* what) {
    if (x.n_timesteps() != horizon) {
        std::ostringstream msg;
        msg << what << ": input has " << x.n_timesteps() << " timesteps, model expects "
            << horizon;
        throw std::invalid_argument(msg.str());
    }
}

// Coefficients of the balance at one step.
struct StepBalance {
    double w;      // W(t)
    double mix;    // 1 - b W(t)
    double base;   // 1 + c W(t)
    double denom;  // base^d
};

StepBalance balance_at(const DevolutionModel& model, std::size_t t) {
    const BalanceParams& bp = model.balance();
    StepBalance s{};
    s.w = model.step_weight(t);
    s.mix = 1.0 - bp.b * s.w;
    s.base = 1.0 + bp.c * s.w;
    if (!(s.base > 0.0)) {
        std::ostringstream msg;
        msg << "devolution: balance base 1 + c*W(" << t << ") = " << s.base << " is not positive";
        throw std::domain_error(msg.str());
    }
    s.denom = std::pow(s.base, bp.d);
    return s;
}

// out = weight * x + bias for one channel.
void linear_channel(const DevolutionModel& model, std::span<const double> x,
                    std::span<double> out) {
    const std::size_t n = model.horizon();
    const auto weight = model.weight();
    const auto bias = model.bias();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = weight.data() + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += row[j] * x[j];
        }
        out[i] = acc + bias[i];
    }
}

double balanced(const StepBalance& s, double x, double dist) {
    return (s.w * x + s.mix * dist) / s.denom;
}

}  // namespace

double sigmoid(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("logit: argument must lie in (0, 1)");
    }
    return std::log(p) - std::log1p(-p);
}

DevolutionModel::DevolutionModel(std::size_t horizon, BalanceParams balance,
                                 std::vector<double> weight, std::vector<double> bias,
                                 std::vector<double> w_logits)
    : horizon_(horizon), balance_(balance) {
    if (horizon_ == 0) {
        throw std::invalid_argument("DevolutionModel: horizon must be at least 1");
    }
    if (weight.size() != horizon * horizon || bias.size() != horizon ||
        w_logits.size() != horizon) {
        throw std::invalid_argument("DevolutionModel: parameter sizes do not match horizon");
    }
    if (!std::isfinite(balance.b) || !std::isfinite(balance.c) || !std::isfinite(balance.d)) {
        throw std::invalid_argument("DevolutionModel: balance constants must be finite");
    }
    params_.reserve(parameter_count(horizon));
    params_.insert(params_.end(), weight.begin(), weight.end());
    params_.insert(params_.end(), bias.begin(), bias.end());
    params_.insert(params_.end(), w_logits.begin(), w_logits.end());

    for (std::size_t t = 1; t <= horizon_; ++t) {
        const double base = 1.0 + balance_.c * step_weight(t);
        if (!(base > kMinBalanceBase)) {
            std::ostringstream msg;
            msg << "DevolutionModel: 1 + c*W(" << t << ") = " << base << " with c = " << balance_.c
                << " is too close to the pole (must exceed " << kMinBalanceBase << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

DevolutionModel DevolutionModel::initialize(const DiffusionSchedule& schedule,
                                            BalanceParams balance, std::uint64_t seed,
                                            double init_noise) {
    const std::size_t n = schedule.horizon;
    std::vector<double> weight(n * n, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-init_noise, init_noise);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            weight[i * n + j] = (i == j ? 1.0 : 0.0) + (init_noise > 0.0 ? jitter(rng) : 0.0);
        }
    }
    std::vector<double> logits(n);
    for (std::size_t t = 1; t <= n; ++t) {
        logits[t - 1] = logit(schedule.alpha_bar[t]);
    }
    return {n, balance, std::move(weight), std::vector<double>(n, 0.0), std::move(logits)};
}

double DevolutionModel::step_weight(std::size_t t) const {
    require_step(t, horizon_, "DevolutionModel::step_weight");
    return sigmoid(w_logits()[t - 1]);
}

SeriesMatrix distance_head(const DevolutionModel& model, const SeriesMatrix& xt) {
    require_length(xt, model.horizon(), "distance_head");
    SeriesMatrix d(xt.n_channels(), xt.n_timesteps());
    for (std::size_t c = 0; c < xt.n_channels(); ++c) {
        linear_channel(model, xt.channel(c), d.channel(c));
    }
    return d;
}

SeriesMatrix predict_x0(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t) {
    require_step(t, model.horizon(), "predict_x0");
    const StepBalance s = balance_at(model, t);
    SeriesMatrix out = distance_head(model, xt);
    const auto x = xt.values();
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = balanced(s, x[i], v[i]);
    }
    return out;
}

PredictionPair predict_trend(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule) {
    return predict_trend(model, xt, xt, t, schedule);
}

PredictionPair predict_trend(const DevolutionModel& model, const SeriesMatrix& input,
                             const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule) {
    require_same_shape(input, xt, "predict_trend");
    SeriesMatrix x0_hat = predict_x0(model, input, t);
    SeriesMatrix z_hat = evolution_trend(x0_hat, xt, t, schedule);
    return {std::move(x0_hat), std::move(z_hat)};
}

double l1_loss(const SeriesMatrix& z_true, const SeriesMatrix& z_hat) {
    require_same_shape(z_true, z_hat, "l1_loss");
    const auto a = z_true.values();
    const auto b = z_hat.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::abs(a[i] - b[i]);
    }
    return sum / static_cast<double>(a.size());
}

double accumulate_gradients(const DevolutionModel& model, const SeriesMatrix& input,
                            const SeriesMatrix& xt, std::size_t t, const SeriesMatrix& z_true,
                            const DiffusionSchedule& schedule, double scale,
                            std::span<double> grad) {
    const std::size_t n = model.horizon();
    require_step(t, n, "backward");
    require_length(input, n, "backward");
    require_same_shape(input, xt, "backward");
    require_same_shape(xt, z_true, "backward");
    if (grad.size() != DevolutionModel::parameter_count(n)) {
        throw std::invalid_argument("backward: gradient buffer has the wrong size");
    }
    if (schedule.horizon != n) {
        throw std::invalid_argument("backward: schedule horizon does not match model");
    }

    const BalanceParams& bp = model.balance();
    const StepBalance s = balance_at(model, t);
    const double inv_alpha = 1.0 / schedule.alpha_bar[t];
    const double trend_scale = std::sqrt(inv_alpha);
    const double trend_denom = std::sqrt(inv_alpha - 1.0);
    const double count = static_cast<double>(xt.size());

    double* g_weight = grad.data();
    double* g_bias = grad.data() + n * n;
    double& g_logit = grad[n * n + n + (t - 1)];

    std::vector<double> dist(n);
    std::vector<double> d_dist(n);
    double loss = 0.0;
    double d_w = 0.0;  // dL/dW(t)

    for (std::size_t c = 0; c < xt.n_channels(); ++c) {
        const auto in = input.channel(c);
        const auto clean = xt.channel(c);
        const auto target = z_true.channel(c);
        linear_channel(model, in, dist);

        for (std::size_t i = 0; i < n; ++i) {
            const double x0 = balanced(s, in[i], dist[i]);
            const double z_hat = (trend_scale * clean[i] - x0) / trend_denom;
            const double diff = z_hat - target[i];
            loss += std::abs(diff);
            const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            // dL/dx0_hat for this element
            const double d_x0 = -sign / (count * trend_denom);
            d_dist[i] = d_x0 * s.mix / s.denom;
            d_w += d_x0 * ((in[i] - bp.b * dist[i]) / s.denom - x0 * bp.d * bp.c / s.base);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double gi = scale * d_dist[i];
            if (gi == 0.0) {
                continue;
            }
            double* row = g_weight + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] += gi * in[j];
            }
            g_bias[i] += gi;
        }
    }
    g_logit += scale * d_w * s.w * (1.0 - s.w);
    return loss / count;
}

DevolutionGradients backward(const DevolutionModel& model, const SeriesMatrix& input,
                             const SeriesMatrix& xt, std::size_t t, const SeriesMatrix& z_true,
                             const DiffusionSchedule& schedule) {
    DevolutionGradients g;
    g.horizon = model.horizon();
    g.flat.assign(DevolutionModel::parameter_count(g.horizon), 0.0);
    g.loss = accumulate_gradients(model, input, xt, t, z_true, schedule, 1.0, g.flat);
    return g;
}

DevolutionGradients backward(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t,
                             const SeriesMatrix& z_true, const DiffusionSchedule& schedule) {
    return backward(model, xt, xt, t, z_true, schedule);
}

}  // namespace armd
