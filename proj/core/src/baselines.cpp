#include "armd/baselines.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace armd {

SeriesMatrix naive_forecast(const SeriesMatrix& history) { return history; }

SeriesMatrix LinearBaseline::predict(const SeriesMatrix& history) const {
    if (history.n_timesteps() != horizon) {
        throw std::invalid_argument("LinearBaseline::predict: history length does not match");
    }
    SeriesMatrix out(history.n_channels(), horizon);
    for (std::size_t c = 0; c < history.n_channels(); ++c) {
        const auto x = history.channel(c);
        auto y = out.channel(c);
        for (std::size_t i = 0; i < horizon; ++i) {
            double acc = bias[i];
            for (std::size_t j = 0; j < horizon; ++j) {
                acc += weight[i * horizon + j] * x[j];
            }
            y[i] = acc;
        }
    }
    return out;
}

LinearBaseline fit_linear_baseline(std::span<const WindowSample> windows, double ridge) {
    if (windows.empty()) {
        throw std::invalid_argument("fit_linear_baseline: no training windows");
    }
    const auto n = static_cast<Eigen::Index>(windows.front().horizon());
    // Design rows are [history, 1]; the last coefficient is the bias.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n + 1, n);
    Eigen::VectorXd row(n + 1);
    Eigen::VectorXd target(n);

    for (const WindowSample& w : windows) {
        if (static_cast<Eigen::Index>(w.horizon()) != n) {
            throw std::invalid_argument("fit_linear_baseline: windows differ in horizon");
        }
        const SeriesMatrix hist = w.history();
        const SeriesMatrix fut = w.future();
        for (std::size_t c = 0; c < hist.n_channels(); ++c) {
            const auto x = hist.channel(c);
            const auto y = fut.channel(c);
            for (Eigen::Index j = 0; j < n; ++j) {
                row(j) = x[static_cast<std::size_t>(j)];
                target(j) = y[static_cast<std::size_t>(j)];
            }
            row(n) = 1.0;
            gram.selfadjointView<Eigen::Lower>().rankUpdate(row);
            cross.noalias() += row * target.transpose();
        }
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    gram.diagonal().array() += ridge;

    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
        throw std::runtime_error("fit_linear_baseline: normal equations are singular");
    }
    const Eigen::MatrixXd coef = solver.solve(cross);  // (n + 1) x n

    LinearBaseline fit;
    fit.horizon = static_cast<std::size_t>(n);
    fit.weight.resize(fit.horizon * fit.horizon);
    fit.bias.resize(fit.horizon);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            fit.weight[static_cast<std::size_t>(i * n + j)] = coef(j, i);
        }
        fit.bias[static_cast<std::size_t>(i)] = coef(n, i);
    }
    return fit;
}

}  // namespace armd
