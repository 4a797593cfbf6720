#include "armd/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace armd {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: parameter and gradient sizes differ");
    }
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    } else if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: optimizer state does not match parameters");
    }

    ++state.step;
    const double step = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(config.beta1, step);
    const double correction2 = 1.0 - std::pow(config.beta2, step);

    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
    }
}

}  // namespace armd
