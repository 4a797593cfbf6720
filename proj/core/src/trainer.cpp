#include "armd/trainer.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>
#include <stdexcept>

namespace armd {

namespace {

void validate(std::span<const WindowSample> dataset, const DiffusionSchedule& schedule,
              const DevolutionModel& model, const TrainConfig& config) {
    if (dataset.empty()) {
        throw std::invalid_argument("train: dataset is empty");
    }
    if (config.iterations == 0) {
        throw std::invalid_argument("train: iterations must be at least 1");
    }
    if (config.batch_size == 0) {
        throw std::invalid_argument("train: batch_size must be at least 1");
    }
    if (!(config.adam.learning_rate > 0.0)) {
        throw std::invalid_argument("train: learning_rate must be positive");
    }
    if (schedule.horizon != model.horizon()) {
        throw std::invalid_argument("train: schedule horizon does not match model");
    }
    const std::size_t channels = dataset.front().n_channels();
    for (const WindowSample& w : dataset) {
        if (w.horizon() != schedule.horizon) {
            throw std::invalid_argument("train: window length does not match schedule horizon");
        }
        if (w.n_channels() != channels) {
            throw std::invalid_argument("train: windows disagree on channel count");
        }
    }
}

}  // namespace

TrainResult train(std::span<const WindowSample> dataset, const DiffusionSchedule& schedule,
                  const TrainConfig& config) {
    return train(DevolutionModel::initialize(schedule, config.balance, config.seed,
                                             config.init_noise),
                 dataset, schedule, config);
}

TrainResult train(DevolutionModel model, std::span<const WindowSample> dataset,
                  const DiffusionSchedule& schedule, const TrainConfig& config) {
    validate(dataset, schedule, model, config);
    const auto started = std::chrono::steady_clock::now();

    const std::size_t horizon = schedule.horizon;
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_window(0, dataset.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_step(1, horizon);

    AdamState adam;
    std::vector<double> grad(DevolutionModel::parameter_count(horizon));
    const double scale = 1.0 / static_cast<double>(config.batch_size);

    TrainReport report;
    report.loss_curve.reserve(config.iterations);

    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0.0;
        for (std::size_t slot = 0; slot < config.batch_size; ++slot) {
            const WindowSample& sample = dataset[pick_window(rng)];
            const std::size_t t = pick_step(rng);
            const DiffusedState state = make_state(sample, t, schedule, config.state_generator);
            std::mt19937_64 dev_rng = derive_rng(config.deviation.seed, iter, slot);
            const SeriesMatrix input =
                apply_deviation(state.values, t, schedule, config.deviation, dev_rng);
            batch_loss += accumulate_gradients(model, input, state.values, t, state.trend,
                                               schedule, scale, grad);
        }
        adam_step(model.parameters(), grad, adam, config.adam);
        report.loss_curve.push_back(batch_loss * scale);

        if (config.checkpoint_every > 0 && config.on_checkpoint &&
            (iter + 1) % config.checkpoint_every == 0) {
            config.on_checkpoint(iter + 1, model);
        }
    }

    report.final_loss = report.loss_curve.back();
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), std::move(report)};
}

void write_loss_curve(const TrainReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_loss_curve: cannot open " + path.string());
    }
    out << "iteration,loss\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.loss_curve.size(); ++i) {
        out << i + 1 << ',' << report.loss_curve[i] << '\n';
    }
}

}  // namespace armd
