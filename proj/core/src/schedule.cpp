#include "armd/schedule.hpp"

#include <stdexcept>

namespace armd {

DiffusionSchedule build_schedule(std::size_t horizon, double beta_start, double beta_end) {
    if (horizon == 0) {
        throw std::invalid_argument("build_schedule: horizon must be at least 1");
    }
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || !(beta_start <= beta_end)) {
        throw std::invalid_argument("build_schedule: need 0 < beta_start <= beta_end < 1");
    }

    DiffusionSchedule s;
    s.horizon = horizon;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.beta.assign(horizon + 1, 0.0);
    s.alpha_bar.assign(horizon + 1, 1.0);

    const double span = beta_end - beta_start;
    for (std::size_t t = 1; t <= horizon; ++t) {
        const double frac =
            horizon == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(horizon - 1);
        s.beta[t] = beta_start + span * frac;
        s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.beta[t]);
    }
    return s;
}

}  // namespace armd
