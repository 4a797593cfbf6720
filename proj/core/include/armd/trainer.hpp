#pragma once

#include "armd/adam.hpp"
#include "armd/devolution.hpp"
#include "armd/evolution.hpp"
#include "armd/schedule.hpp"
#include "armd/window.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace armd {

struct TrainConfig {
    std::size_t iterations = 2000;
    std::size_t batch_size = 128;
    AdamConfig adam;
    /// Drives initialization, batch indices and diffusion steps.
    std::uint64_t seed = 0;
    DeviationConfig deviation;
    StateGenerator state_generator = StateGenerator::sliding;
    BalanceParams balance;
    double init_noise = 0.01;

    /// Called with (iterations completed, model) every `checkpoint_every` iterations; 0 disables.
    std::size_t checkpoint_every = 0;
    std::function<void(std::size_t, const DevolutionModel&)> on_checkpoint;
};

struct TrainReport {
    std::vector<double> loss_curve;  // one batch loss per iteration
    double wall_time = 0.0;          // seconds
    double final_loss = 0.0;
};

struct TrainResult {
    DevolutionModel model;
    TrainReport report;
};

/**
 * Trains a freshly initialized model.
 *
 * Each iteration draws batch_size windows uniformly with replacement and an
 * independent step t ~ U{1..T} per window, builds the state and its trend,
 * perturbs the network input with the deviation, and takes one Adam step on
 * the batch-mean L1 loss. Identical inputs and seeds give bit-identical results.
 */
TrainResult train(std::span<const WindowSample> dataset, const DiffusionSchedule& schedule,
                  const TrainConfig& config);

/// Same loop, continuing from `model` (its balance constants are kept).
TrainResult train(DevolutionModel model, std::span<const WindowSample> dataset,
                  const DiffusionSchedule& schedule, const TrainConfig& config);

/// Writes "iteration,loss" rows (1-based iteration) with a header line.
void write_loss_curve(const TrainReport& report, const std::filesystem::path& path);

}  // namespace armd
