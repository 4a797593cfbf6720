#include "armd/sampler.hpp"

#include "armd/evolution.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace armd {

X0Predictor as_predictor(const DevolutionModel& model) {
    return [&model](const SeriesMatrix& state, std::size_t step) {
        return predict_x0(model, state, step);
    };
}

SeriesMatrix sample_step(const X0Predictor& predictor, const SeriesMatrix& xt, std::size_t t,
                         std::size_t k, const DiffusionSchedule& schedule,
                         const SamplerConfig& config, std::mt19937_64* rng) {
    if (t == 0 || t > schedule.horizon) {
        throw std::out_of_range("sample_step: step outside 1..T");
    }
    if (k == 0 || k > t) {
        std::ostringstream msg;
        msg << "sample_step: skip " << k << " must lie in 1.." << t;
        throw std::out_of_range(msg.str());
    }

    SeriesMatrix x0_hat = predictor(xt, t);
    require_same_shape(x0_hat, xt, "sample_step");
    const SeriesMatrix z_hat = evolution_trend(x0_hat, xt, t, schedule);

    const double target_alpha = schedule.alpha_bar[t - k];
    const double variance = config.add_noise ? config.noise_fraction * (1.0 - target_alpha) : 0.0;
    const double radicand = 1.0 - target_alpha - variance;
    if (variance < 0.0 || radicand < 0.0) {
        throw std::domain_error("sample_step: noise variance exceeds 1 - alpha_bar[t-k]");
    }
    const double x0_coef = std::sqrt(target_alpha);
    const double z_coef = std::sqrt(radicand);

    SeriesMatrix next = std::move(x0_hat);
    auto out = next.values();
    const auto z = z_hat.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x0_coef * out[i] + z_coef * z[i];
    }
    if (config.add_noise && variance > 0.0) {
        if (rng == nullptr) {
            throw std::invalid_argument("sample_step: noise requested without a generator");
        }
        const double sigma = std::sqrt(variance);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& v : out) {
            v += sigma * normal(*rng);
        }
    }
    return next;
}

SeriesMatrix sample_step(const DevolutionModel& model, const SeriesMatrix& xt, std::size_t t,
                         std::size_t k, const DiffusionSchedule& schedule,
                         const SamplerConfig& config, std::mt19937_64* rng) {
    return sample_step(as_predictor(model), xt, t, k, schedule, config, rng);
}

std::vector<std::size_t> sampling_schedule(std::size_t horizon, std::size_t n_steps) {
    if (n_steps == 0 || n_steps > horizon) {
        std::ostringstream msg;
        msg << "sampling_schedule: n_steps " << n_steps << " must lie in 1.." << horizon;
        throw std::invalid_argument(msg.str());
    }
    const std::size_t stride = horizon / n_steps;
    std::vector<std::size_t> steps;
    steps.reserve(n_steps + 1);
    for (std::size_t i = 0; i < n_steps; ++i) {
        steps.push_back(horizon - i * stride);
    }
    steps.push_back(0);
    return steps;
}

ForecastRun forecast(const X0Predictor& predictor, const SeriesMatrix& history,
                     const DiffusionSchedule& schedule, const SamplerConfig& config) {
    const std::size_t horizon = schedule.horizon;
    if (history.n_timesteps() != horizon) {
        std::ostringstream msg;
        msg << "forecast: history has " << history.n_timesteps() << " timesteps, expected "
            << horizon;
        throw std::invalid_argument(msg.str());
    }
    const std::vector<std::size_t> steps = sampling_schedule(horizon, config.n_steps);
    const bool keep = config.keep_trajectory.value_or(horizon <= 512);

    std::mt19937_64 rng(config.seed);
    ForecastRun run;
    SeriesMatrix state = history;
    if (keep) {
        run.trajectory.reserve(steps.size());
        run.trajectory.push_back({horizon, state});
    }
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        const std::size_t t = steps[i];
        state = sample_step(predictor, state, t, t - steps[i + 1], schedule, config, &rng);
        if (keep) {
            run.trajectory.push_back({steps[i + 1], state});
        }
    }
    run.prediction = std::move(state);
    return run;
}

ForecastRun forecast(const DevolutionModel& model, const SeriesMatrix& history,
                     const DiffusionSchedule& schedule, const SamplerConfig& config) {
    if (model.horizon() != schedule.horizon) {
        throw std::invalid_argument("forecast: model horizon does not match schedule");
    }
    return forecast(as_predictor(model), history, schedule, config);
}

}  // namespace armd
