#include "armd/devolution.hpp"
#include "armd/evolution.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace armd;
using armd::testing::Gen;
using armd::testing::max_abs_diff;

namespace {

DevolutionModel fixed_model(std::size_t n, BalanceParams bp, std::vector<double> weight,
                            std::vector<double> bias, double logit_value) {
    return {n, bp, std::move(weight), std::move(bias), std::vector<double>(n, logit_value)};
}

std::vector<double> identity(std::size_t n) {
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i * n + i] = 1.0;
    }
    return w;
}

}  // namespace

TEST_SUITE("devolution") {
    TEST_CASE("construction checks") {
        CHECK_THROWS_AS(DevolutionModel(3, {}, std::vector<double>(8), std::vector<double>(3),
                                        std::vector<double>(3)),
                        std::invalid_argument);
        // c = -1 with W(t) = sigmoid(40) puts 1 + cW at the pole
        CHECK_THROWS_AS(fixed_model(2, {1.0, -1.0, 0.5}, identity(2), {0, 0}, 40.0),
                        std::invalid_argument);
        CHECK_NOTHROW(fixed_model(2, {1.0, -1.0, 0.5}, identity(2), {0, 0}, 0.0));
    }

    TEST_CASE("initialization") {
        const auto s = build_schedule(16);
        const auto m = DevolutionModel::initialize(s, {}, 3);
        for (std::size_t t = 1; t <= 16; ++t) {
            CHECK(std::abs(m.step_weight(t) - s.alpha_bar[t]) < 1e-9);
            if (t > 1) {
                CHECK(m.step_weight(t) < m.step_weight(t - 1));
            }
        }
        for (std::size_t i = 0; i < 16; ++i) {
            for (std::size_t j = 0; j < 16; ++j) {
                const double expected = i == j ? 1.0 : 0.0;
                CHECK(std::abs(m.weight()[i * 16 + j] - expected) <= 0.01);
            }
            CHECK(m.bias()[i] == 0.0);
        }
        CHECK(m == DevolutionModel::initialize(s, {}, 3));
        CHECK_FALSE(m == DevolutionModel::initialize(s, {}, 4));
    }

    TEST_CASE("distance head") {
        Gen gen(31);
        const SeriesMatrix x = gen.series(2, 3);
        CHECK(distance_head(fixed_model(3, {}, identity(3), {0, 0, 0}, 0.0), x) == x);

        const SeriesMatrix d = distance_head(
            fixed_model(3, {}, std::vector<double>(9, 0.0), {1.0, -2.0, 3.0}, 0.0), x);
        CHECK(d == SeriesMatrix(2, 3, {1, -2, 3, 1, -2, 3}));

        std::vector<double> w(9), b(3);
        for (double& v : w) {
            v = gen.normal();
        }
        for (double& v : b) {
            v = gen.normal();
        }
        const SeriesMatrix got = distance_head(fixed_model(3, {}, w, b, 0.0), x);
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t i = 0; i < 3; ++i) {
                double acc = b[i];
                for (std::size_t j = 0; j < 3; ++j) {
                    acc += w[i * 3 + j] * x(c, j);
                }
                CHECK(std::abs(got(c, i) - acc) <= 1e-12);
            }
        }
    }

    TEST_CASE("balance examples") {
        Gen gen(32);
        const SeriesMatrix x = gen.series(2, 4);
        std::vector<double> rw(16);
        for (double& v : rw) {
            v = gen.normal();
        }

        // W = 1 (logit 40), b = 1, c = 0: passthrough for any d
        for (double d : {0.3, 1.0, 2.0}) {
            const auto m = fixed_model(4, {1.0, 0.0, d}, rw, {0.1, 0.2, 0.3, 0.4}, 40.0);
            CHECK(max_abs_diff(predict_x0(m, x, 2), x) < 1e-8);
        }

        // W = 0 (logit -40): x0_hat = D
        const auto m0 = fixed_model(4, {1.5, 1.0, 0.5}, rw, {0.1, 0.2, 0.3, 0.4}, -40.0);
        CHECK(max_abs_diff(predict_x0(m0, x, 3), distance_head(m0, x)) < 1e-12);

        // W = 0.5, b = 2, c = 1, d = 1, x = 2, D = 4  ->  2/3
        const auto mh = fixed_model(1, {2.0, 1.0, 1.0}, {0.0}, {4.0}, 0.0);
        const SeriesMatrix two(1, 1, {2.0});
        CHECK(predict_x0(mh, two, 1)(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }

    TEST_CASE("predicted trend") {
        const auto s = build_schedule(8);
        Gen gen(33);
        const auto m = gen.model(s, {});
        const SeriesMatrix zero(2, 8);
        const auto m_zero_bias =
            DevolutionModel(8, {}, std::vector<double>(m.weight().begin(), m.weight().end()),
                            std::vector<double>(8, 0.0),
                            std::vector<double>(m.w_logits().begin(), m.w_logits().end()));
        const PredictionPair zp = predict_trend(m_zero_bias, zero, 3, s);
        for (double v : zp.z_hat.values()) {
            CHECK(v == 0.0);
        }

        // elementwise oracle
        const SeriesMatrix xt = gen.series(2, 8);
        for (std::size_t t = 1; t <= 8; ++t) {
            const PredictionPair p = predict_trend(m, xt, t, s);
            const double a = s.alpha_bar[t];
            for (std::size_t i = 0; i < xt.size(); ++i) {
                const double expected = (std::sqrt(1.0 / a) * xt.values()[i] -
                                         p.x0_hat.values()[i]) /
                                        std::sqrt(1.0 / a - 1.0);
                CHECK(p.z_hat.values()[i] == doctest::Approx(expected).epsilon(1e-12));
            }
        }

        // substituting the true x0 reproduces the target bit for bit
        const auto w = armd::testing::whole_window(gen.series(2, 16));
        for (std::size_t t = 1; t <= 8; ++t) {
            const DiffusedState st = diffuse(w, t, s);
            CHECK(evolution_trend(w.future(), st.values, t, s) == st.trend);
        }
    }

    TEST_CASE("l1 loss examples") {
        const SeriesMatrix a(1, 2, {1.0, -2.0});
        CHECK(l1_loss(a, a) == 0.0);
        CHECK(l1_loss(SeriesMatrix(1, 2, {1.0, 1.0}), SeriesMatrix(1, 2)) == 1.0);
        CHECK(l1_loss(a, SeriesMatrix(1, 2)) == 1.5);
        CHECK_THROWS_AS(l1_loss(a, SeriesMatrix(2, 1)), std::invalid_argument);
    }

    TEST_CASE("gradient is zero at the minimum") {
        const auto s = build_schedule(6);
        Gen gen(34);
        const auto m = gen.model(s, {});
        const SeriesMatrix xt = gen.series(3, 6);
        const SeriesMatrix z = predict_trend(m, xt, 4, s).z_hat;
        const DevolutionGradients g = backward(m, xt, 4, z, s);
        CHECK(g.loss == 0.0);
        for (double v : g.flat) {
            CHECK(v == 0.0);
        }
    }

    TEST_CASE("property: analytic gradients match central differences") {
        Gen gen(35);
        const std::vector<BalanceParams> balances{
            {1.0, 0.5, 0.5}, {2.0, 1.0, 1.0}, {1.5, -0.5, 0.3}, {1.0, -1.0, 1.0}};
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto s = build_schedule(gen.index(1, 8));
            const auto gc = armd::testing::make_gradient_case(gen, s, gen.pick(balances),
                                                              gen.index(1, 3), 0.05);
            const DevolutionGradients g = backward(gc.model, gc.input, gc.xt, gc.t, gc.z_true, s);
            CHECK(g.loss == doctest::Approx(armd::testing::forward_loss(gc.model, gc.input, gc.xt,
                                                                        gc.t, gc.z_true, s)));
            const auto fd = armd::testing::finite_difference_gradient(gc.model, gc.input, gc.xt,
                                                                      gc.t, gc.z_true, s);
            worst = std::max(worst, armd::testing::max_relative_error(g.flat, fd));
            for (std::size_t k = 0; k < s.horizon; ++k) {
                if (k != gc.t - 1) {
                    CHECK(g.w_logits()[k] == 0.0);
                }
            }
        }
        CHECK(worst < 1e-4);
    }

    TEST_CASE("logit gradient vanishes under saturation") {
        const auto s = build_schedule(4);
        Gen gen(36);
        for (double lg : {40.0, -40.0}) {
            auto m = gen.model(s, {1.0, 0.5, 0.5});
            for (double& v : m.parameters().subspan(16 + 4)) {
                v = lg;
            }
            const SeriesMatrix xt = gen.series(2, 4);
            SeriesMatrix z = predict_trend(m, xt, 2, s).z_hat;
            for (double& v : z.values()) {
                v += 1.0;
            }
            const DevolutionGradients g = backward(m, xt, 2, z, s);
            CHECK(std::abs(g.w_logits()[1]) < 1e-10);
        }
    }

    TEST_CASE("property: channel permutation commutes with prediction") {
        Gen gen(37);
        for (int trial = 0; trial < 20; ++trial) {
            const auto s = build_schedule(gen.index(1, 10));
            const auto m = gen.model(s, {});
            const std::size_t n_ch = gen.index(2, 5);
            const SeriesMatrix x = gen.series(n_ch, s.horizon);
            std::vector<std::size_t> order(n_ch);
            for (std::size_t i = 0; i < n_ch; ++i) {
                order[i] = i;
            }
            std::shuffle(order.begin(), order.end(), gen.engine());
            const std::size_t t = gen.index(1, s.horizon);
            CHECK(predict_x0(m, x.permute_channels(order), t) ==
                  predict_x0(m, x, t).permute_channels(order));
        }
    }
}
