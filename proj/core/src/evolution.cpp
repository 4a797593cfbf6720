#include "armd/evolution.hpp"

#include <cmath>
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

}  // namespace

SeriesMatrix slide(const WindowSample& sample, std::size_t k, std::size_t from_step) {
    const std::size_t horizon = sample.horizon();
    if (from_step + k > horizon) {
        std::ostringstream msg;
        msg << "slide: moving " << k << " steps from step " << from_step
            << " leaves the context (T = " << horizon << ")";
        throw std::out_of_range(msg.str());
    }
    return sample.slice(horizon - (from_step + k));
}

SeriesMatrix evolution_trend(const SeriesMatrix& x0, const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule) {
    require_step(t, schedule.horizon, "evolution_trend");
    require_same_shape(x0, xt, "evolution_trend");

    const double inv_alpha = 1.0 / schedule.alpha_bar[t];
    const double scale = std::sqrt(inv_alpha);
    const double denom = std::sqrt(inv_alpha - 1.0);

    SeriesMatrix z(x0.n_channels(), x0.n_timesteps());
    const auto a = x0.values();
    const auto b = xt.values();
    auto out = z.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (scale * b[i] - a[i]) / denom;
    }
    return z;
}

DiffusedState diffuse(const WindowSample& sample, std::size_t t,
                      const DiffusionSchedule& schedule) {
    require_step(t, sample.horizon(), "diffuse");
    if (schedule.horizon != sample.horizon()) {
        throw std::invalid_argument("diffuse: schedule horizon does not match window");
    }
    DiffusedState state;
    state.step = t;
    state.values = slide(sample, t, 0);
    state.trend = evolution_trend(sample.future(), state.values, t, schedule);
    return state;
}

SeriesMatrix interpolate_state(const WindowSample& sample, std::size_t t) {
    const std::size_t horizon = sample.horizon();
    if (t > horizon) {
        throw std::out_of_range("interpolate_state: step exceeds horizon");
    }
    SeriesMatrix x0 = sample.future();
    if (t == 0) {
        return x0;
    }
    const SeriesMatrix xT = sample.history();
    if (t == horizon) {
        return xT;
    }
    const double w = static_cast<double>(t) / static_cast<double>(horizon);
    auto v = x0.values();
    const auto h = xT.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = v[i] + (h[i] - v[i]) * w;
    }
    return x0;
}

DiffusedState make_state(const WindowSample& sample, std::size_t t,
                         const DiffusionSchedule& schedule, StateGenerator generator) {
    if (generator == StateGenerator::sliding) {
        return diffuse(sample, t, schedule);
    }
    require_step(t, sample.horizon(), "make_state");
    DiffusedState state;
    state.step = t;
    state.values = interpolate_state(sample, t);
    state.trend = evolution_trend(sample.future(), state.values, t, schedule);
    return state;
}

SeriesMatrix apply_deviation(const SeriesMatrix& xt, std::size_t t,
                             const DiffusionSchedule& schedule, const DeviationConfig& config,
                             std::mt19937_64& rng) {
    if (!config.enabled) {
        return xt;
    }
    require_step(t, schedule.horizon, "apply_deviation");
    const double scale = schedule.alpha_bar[t];
    std::normal_distribution<double> normal(0.0, 1.0);
    SeriesMatrix out = xt;
    for (double& v : out.values()) {
        v += scale * normal(rng);
    }
    return out;
}

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace armd
