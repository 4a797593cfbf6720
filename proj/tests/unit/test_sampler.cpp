#include "armd/sampler.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace armd;
using armd::testing::Gen;
using armd::testing::max_abs_diff;

namespace {

X0Predictor constant_predictor(SeriesMatrix value) {
    return [value = std::move(value)](const SeriesMatrix&, std::size_t) { return value; };
}

}  // namespace

TEST_SUITE("sampler") {
    TEST_CASE("jump to step 0 returns x0_hat exactly") {
        Gen gen(51);
        const auto s = build_schedule(12);
        const auto m = gen.model(s, {});
        const SeriesMatrix xt = gen.series(2, 12);
        for (std::size_t t : {1u, 5u, 12u}) {
            CHECK(sample_step(m, xt, t, t, s, {}) == predict_x0(m, xt, t));
        }
        const SeriesMatrix truth = gen.series(2, 12);
        CHECK(sample_step(constant_predictor(truth), xt, 7, 7, s, {}) == truth);
    }

    TEST_CASE("t = 4, k = 2 against a scalar evaluation") {
        Gen gen(52);
        const auto s = build_schedule(6);
        const auto m = gen.model(s, {1.5, -0.5, 0.3});
        const SeriesMatrix xt = gen.series(3, 6);
        const SeriesMatrix got = sample_step(m, xt, 4, 2, s, {});

        const double a_t = s.alpha_bar[4];
        const double a_to = s.alpha_bar[2];
        const SeriesMatrix x0 = predict_x0(m, xt, 4);
        for (std::size_t i = 0; i < xt.size(); ++i) {
            const double x = xt.values()[i];
            const double z = (std::sqrt(1.0 / a_t) * x - x0.values()[i]) / std::sqrt(1.0 / a_t - 1.0);
            const double x0_again = (x - std::sqrt(1.0 - a_t) * z) / std::sqrt(a_t);
            const double expected = std::sqrt(a_to) * x0_again + std::sqrt(1.0 - a_to) * z;
            CHECK(got.values()[i] == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    TEST_CASE("step arguments are checked") {
        Gen gen(53);
        const auto s = build_schedule(4);
        const auto m = gen.model(s, {});
        const SeriesMatrix xt = gen.series(1, 4);
        CHECK_THROWS_AS(sample_step(m, xt, 0, 1, s, {}), std::out_of_range);
        CHECK_THROWS_AS(sample_step(m, xt, 3, 4, s, {}), std::out_of_range);
        CHECK_THROWS_AS(sample_step(m, xt, 3, 0, s, {}), std::out_of_range);
        SamplerConfig noisy;
        noisy.add_noise = true;
        noisy.noise_fraction = 1.5;
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(sample_step(m, xt, 3, 1, s, noisy, &rng), std::domain_error);
    }

    TEST_CASE("visited steps") {
        CHECK(sampling_schedule(96, 4) == std::vector<std::size_t>{96, 72, 48, 24, 0});
        CHECK(sampling_schedule(96, 1) == std::vector<std::size_t>{96, 0});
        CHECK(sampling_schedule(10, 3) == std::vector<std::size_t>{10, 7, 4, 0});
        CHECK_THROWS_AS(sampling_schedule(4, 5), std::invalid_argument);
        CHECK_THROWS_AS(sampling_schedule(4, 0), std::invalid_argument);

        Gen gen(54);
        const auto s = build_schedule(96);
        const auto m = gen.model(s, {}, 0.05);
        SamplerConfig cfg;
        cfg.n_steps = 4;
        const ForecastRun run = forecast(m, gen.series(1, 96), s, cfg);
        std::vector<std::size_t> visited;
        for (const auto& p : run.trajectory) {
            visited.push_back(p.step);
        }
        CHECK(visited == std::vector<std::size_t>{96, 72, 48, 24, 0});
        CHECK(run.trajectory.back().state == run.prediction);
    }

    TEST_CASE("one step is one-shot devolution") {
        Gen gen(55);
        const auto s = build_schedule(16);
        const auto m = gen.model(s, {});
        const SeriesMatrix h = gen.series(2, 16);
        CHECK(forecast(m, h, s, {}).prediction == predict_x0(m, h, 16));
    }

    TEST_CASE("property: oracle predictor reproduces the future for every step count") {
        Gen gen(56);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t horizon = gen.index(1, 40);
            const auto s = build_schedule(horizon);
            const auto w = armd::testing::whole_window(gen.series(gen.index(1, 3), 2 * horizon));
            SamplerConfig cfg;
            cfg.n_steps = gen.index(1, horizon);
            const ForecastRun run = forecast(constant_predictor(w.future()), w.history(), s, cfg);
            CHECK(max_abs_diff(run.prediction, w.future()) < 1e-9);
        }
    }

    TEST_CASE("determinism and noise") {
        Gen gen(57);
        const auto s = build_schedule(24);
        const auto m = gen.model(s, {}, 0.05);
        const SeriesMatrix h = gen.series(2, 24);
        SamplerConfig cfg;
        cfg.n_steps = 4;
        CHECK(forecast(m, h, s, cfg).prediction == forecast(m, h, s, cfg).prediction);

        SamplerConfig noisy = cfg;
        noisy.add_noise = true;
        noisy.seed = 3;
        const SeriesMatrix a = forecast(m, h, s, noisy).prediction;
        CHECK(a == forecast(m, h, s, noisy).prediction);
        CHECK_FALSE(a == forecast(m, h, s, cfg).prediction);
        noisy.seed = 4;
        CHECK_FALSE(a == forecast(m, h, s, noisy).prediction);

        SamplerConfig lean = cfg;
        lean.keep_trajectory = false;
        const ForecastRun r = forecast(m, h, s, lean);
        CHECK(r.trajectory.empty());
        CHECK(r.prediction == forecast(m, h, s, cfg).prediction);
    }
}
