#pragma once

#include "armd/data_io.hpp"
#include "armd/metrics.hpp"
#include "armd/sampler.hpp"
#include "armd/schedule.hpp"
#include "armd/trainer.hpp"
#include "armd/window.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace armd {

/// Pipeline failure tagged with the stage it happened in ("load", "train", ...).
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message);
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Normalized splits and the windows cut from them.
struct PreparedData {
    NormalizationStats stats;
    std::shared_ptr<const SeriesMatrix> train;
    std::shared_ptr<const SeriesMatrix> valid;
    std::shared_ptr<const SeriesMatrix> test;
    std::vector<WindowSample> train_windows;
    std::vector<WindowSample> valid_windows;
    std::vector<WindowSample> test_windows;
};

/// Splits chronologically, z-scores with train statistics and cuts 2T windows.
PreparedData prepare_data(const SeriesMatrix& raw, std::size_t horizon, const SplitSpec& split,
                          std::size_t train_stride, std::size_t eval_stride);

/**
 * Forecasts every window from its history and scores against its future.
 * With sampling noise enabled, window i is sampled with a seed derived from
 * (config.seed, i).
 */
MetricReport evaluate_windows(const X0Predictor& predictor, std::span<const WindowSample> windows,
                              const DiffusionSchedule& schedule, const SamplerConfig& config);

struct GridSearchResult {
    std::size_t best_steps = 1;
    std::vector<std::size_t> grid;    // values actually evaluated (those <= T)
    std::vector<double> valid_mse;    // same order as grid
};

/**
 * Picks the sampling-step count with the lowest validation MSE; ties go to
 * the smaller count. Grid values above T are skipped.
 */
GridSearchResult grid_search_sampling_steps(const X0Predictor& predictor,
                                            std::span<const WindowSample> valid_windows,
                                            const DiffusionSchedule& schedule,
                                            const SamplerConfig& base,
                                            std::span<const std::size_t> grid = kSamplingStepGrid);

/// The in-scope ablation rows; all false is the default pipeline.
struct AblationFlags {
    bool interpolation_states = false;
    bool remove_deviation = false;
    bool add_sampling_noise = false;
};

struct ExperimentSpec {
    std::filesystem::path dataset;
    std::size_t horizon = 96;
    double beta_start = kDefaultBetaStart;
    double beta_end = kDefaultBetaEnd;
    SplitSpec split;
    std::size_t train_stride = 1;
    std::size_t eval_stride = 1;

    /// Template for every repeat; repeat r trains with seed base_seed + r.
    TrainConfig train;
    std::uint64_t base_seed = 0;
    std::size_t n_repeats = 10;
    /// Choose b, c, d from their grid by validation MSE (seed base_seed) before the repeats.
    bool tune_balance = false;

    std::vector<std::size_t> sampling_grid{std::begin(kSamplingStepGrid),
                                           std::end(kSamplingStepGrid)};
    double noise_fraction = 0.01;
    AblationFlags ablation;

    std::filesystem::path output_dir;
    bool save_predictions = true;
};

/**
 * Reads a key=value spec; '#' and ';' start comments. Unknown keys and
 * malformed values throw std::invalid_argument naming the key. Relative
 * dataset/output paths are resolved against `base_dir` when given.
 */
ExperimentSpec parse_experiment_spec(std::istream& in,
                                     const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Documented keys with their defaults, in spec-file syntax.
std::string describe_experiment_keys();

struct RepeatResult {
    std::uint64_t seed = 0;
    std::size_t n_steps = 1;
    double valid_mse = 0.0;
    double test_mse = 0.0;
    double test_mae = 0.0;
    double final_loss = 0.0;
    double train_seconds = 0.0;
    GridSearchResult grid;
};

struct ExperimentResult {
    BalanceParams balance;
    std::vector<RepeatResult> repeats;
    double test_mse = 0.0;  // mean over repeats
    double test_mae = 0.0;
    double test_mse_std = 0.0;
    double naive_test_mse = 0.0;
    double naive_test_mae = 0.0;
    double linear_test_mse = 0.0;
    double linear_test_mae = 0.0;
    std::size_t n_test_windows = 0;
};

/**
 * Full pipeline: load, split, normalize, train n_repeats models, choose
 * sampling steps on validation, score on test. When output_dir is set it
 * receives summary.txt (deterministic, key=value plus CSV tables),
 * timing.txt, loss_seed<k>.csv, model_seed<base>.armd and, optionally,
 * predictions_seed<base>.csv.
 */
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Same, on an already loaded raw series (spec.dataset is only echoed).
ExperimentResult run_experiment(const ExperimentSpec& spec, const SeriesMatrix& raw);

/// The deterministic summary text written to summary.txt.
std::string format_summary(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace armd
