// armd: train, evaluate and run forecasting experiments from the command line.

#include "armd/data_io.hpp"
#include "armd/experiment.hpp"
#include "armd/model_io.hpp"
#include "armd/sampler.hpp"
#include "armd/schedule.hpp"
#include "armd/trainer.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const armd::StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw armd::StageError(name, e.what());
    }
}

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

struct TrainArgs {
    std::string data;
    std::string config;
    std::string model_out;
    std::string loss_curve;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> batch_size;
    std::optional<double> learning_rate;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> train_stride;
    std::optional<double> beta_start;
    std::optional<double> beta_end;
    std::vector<double> balance;
    bool no_deviation = false;
    bool interpolation = false;
    std::size_t checkpoint_every = 0;
};

int run_train(const TrainArgs& a) {
    armd::ExperimentSpec spec =
        a.config.empty() ? armd::ExperimentSpec{}
                         : stage("config", [&] { return armd::load_experiment_spec(a.config); });
    if (a.horizon) spec.horizon = *a.horizon;
    if (a.iterations) spec.train.iterations = *a.iterations;
    if (a.batch_size) spec.train.batch_size = *a.batch_size;
    if (a.learning_rate) spec.train.adam.learning_rate = *a.learning_rate;
    if (a.seed) spec.base_seed = *a.seed;
    if (a.train_stride) spec.train_stride = *a.train_stride;
    if (a.beta_start) spec.beta_start = *a.beta_start;
    if (a.beta_end) spec.beta_end = *a.beta_end;
    if (!a.balance.empty()) spec.train.balance = {a.balance[0], a.balance[1], a.balance[2]};
    if (a.no_deviation) spec.ablation.remove_deviation = true;
    if (a.interpolation) spec.ablation.interpolation_states = true;
    const fs::path data_path = a.data.empty() ? spec.dataset : fs::path(a.data);

    const auto schedule = stage("config", [&] {
        return armd::build_schedule(spec.horizon, spec.beta_start, spec.beta_end);
    });
    const armd::SeriesMatrix raw = stage("load", [&] { return armd::load_csv(data_path); });
    const armd::PreparedData data = stage("prepare", [&] {
        return armd::prepare_data(raw, spec.horizon, spec.split, spec.train_stride,
                                  spec.eval_stride);
    });

    armd::TrainConfig cfg = spec.train;
    cfg.seed = spec.base_seed;
    cfg.deviation.enabled = !spec.ablation.remove_deviation;
    cfg.deviation.seed = spec.base_seed;
    cfg.state_generator = spec.ablation.interpolation_states ? armd::StateGenerator::interpolation
                                                             : armd::StateGenerator::sliding;
    cfg.checkpoint_every = a.checkpoint_every;
    const fs::path model_path = a.model_out;
    cfg.on_checkpoint = [&](std::size_t iter, const armd::DevolutionModel& m) {
        fs::path ckpt = model_path;
        ckpt.replace_extension(".iter" + std::to_string(iter) + ".armd");
        armd::save_model(m, data.stats, schedule, ckpt);
    };

    const armd::TrainResult fit =
        stage("train", [&] { return armd::train(data.train_windows, schedule, cfg); });
    stage("save", [&] {
        armd::save_model(fit.model, data.stats, schedule, model_path);
        if (!a.loss_curve.empty()) {
            armd::write_loss_curve(fit.report, a.loss_curve);
        }
    });
    std::cout << "train_windows=" << data.train_windows.size() << '\n'
              << "final_loss=" << num(fit.report.final_loss) << '\n'
              << "wall_time_s=" << fit.report.wall_time << '\n'
              << "model=" << model_path.string() << '\n';
    return 0;
}

struct ForecastArgs {
    std::string model;
    std::string history;
    std::string out;
    std::size_t steps = 1;
    bool noise = false;
    double noise_fraction = 0.01;
    std::uint64_t seed = 0;
};

int run_forecast(const ForecastArgs& a) {
    const armd::ModelArtifact art = stage("load-model", [&] { return armd::load_model(a.model); });
    const armd::SeriesMatrix raw = stage("load", [&] { return armd::load_csv(a.history); });
    const std::size_t horizon = art.schedule.horizon;
    const armd::SeriesMatrix prediction = stage("forecast", [&] {
        if (raw.n_timesteps() < horizon) {
            throw std::invalid_argument("history has " + std::to_string(raw.n_timesteps()) +
                                        " rows; the model needs at least " +
                                        std::to_string(horizon));
        }
        const armd::SeriesMatrix hist = armd::normalize(
            raw.columns(raw.n_timesteps() - horizon, horizon), art.stats);
        armd::SamplerConfig cfg;
        cfg.n_steps = a.steps;
        cfg.add_noise = a.noise;
        cfg.noise_fraction = a.noise_fraction;
        cfg.seed = a.seed;
        const armd::ForecastRun run = armd::forecast(art.model, hist, art.schedule, cfg);
        armd::SeriesMatrix out = armd::denormalize(run.prediction, art.stats);
        return armd::SeriesMatrix(out.n_channels(), out.n_timesteps(),
                                  {out.values().begin(), out.values().end()},
                                  raw.channel_names());
    });
    stage("write", [&] {
        if (a.out.empty() || a.out == "-") {
            armd::write_csv(prediction, std::cout);
        } else {
            armd::write_csv(prediction, a.out);
        }
    });
    return 0;
}

struct EvaluateArgs {
    std::string model;
    std::string data;
    std::string split = "test";
    std::optional<std::size_t> steps;
    std::size_t stride = 1;
};

int run_evaluate(const EvaluateArgs& a) {
    const armd::ModelArtifact art = stage("load-model", [&] { return armd::load_model(a.model); });
    const armd::SeriesMatrix raw = stage("load", [&] { return armd::load_csv(a.data); });
    const std::size_t horizon = art.schedule.horizon;

    const auto windows_for = [&](const armd::SeriesMatrix& part) {
        return armd::make_window_samples(armd::normalize(part, art.stats), horizon, a.stride);
    };
    const armd::SeriesSplit parts =
        stage("prepare", [&] { return armd::chronological_split(raw, {}, 2 * horizon); });
    const auto valid = stage("prepare", [&] { return windows_for(parts.valid); });
    const auto target = stage("prepare", [&] {
        if (a.split == "test") return windows_for(parts.test);
        if (a.split == "valid") return windows_for(parts.valid);
        if (a.split == "train") return windows_for(parts.train);
        throw std::invalid_argument("unknown split '" + a.split + "'");
    });

    const armd::X0Predictor predictor = armd::as_predictor(art.model);
    armd::SamplerConfig cfg;
    cfg.keep_trajectory = false;
    const std::size_t steps = stage("grid-search", [&] {
        if (a.steps) return *a.steps;
        return armd::grid_search_sampling_steps(predictor, valid, art.schedule, cfg).best_steps;
    });
    cfg.n_steps = steps;
    const armd::MetricReport report = stage("evaluate", [&] {
        return armd::evaluate_windows(predictor, target, art.schedule, cfg);
    });
    std::cout << "split=" << a.split << '\n'
              << "n_steps=" << steps << '\n'
              << "n_windows=" << report.n_windows << '\n'
              << "mse=" << num(report.mse) << '\n'
              << "mae=" << num(report.mae) << '\n';
    return 0;
}

int run_experiment_cmd(const std::string& spec_path, const std::string& out_dir) {
    armd::ExperimentSpec spec =
        stage("config", [&] { return armd::load_experiment_spec(spec_path); });
    if (!out_dir.empty()) {
        spec.output_dir = out_dir;
    }
    const armd::ExperimentResult result = armd::run_experiment(spec);
    std::cout << armd::format_summary(spec, result);
    return 0;
}

int run_schedule(std::size_t horizon, double beta_start, double beta_end) {
    const armd::DiffusionSchedule s =
        stage("config", [&] { return armd::build_schedule(horizon, beta_start, beta_end); });
    std::cout << "t,beta,alpha_bar\n";
    for (std::size_t t = 0; t <= s.horizon; ++t) {
        std::cout << t << ',' << num(s.beta[t]) << ',' << num(s.alpha_bar[t]) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Auto-regressive moving diffusion forecasting"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a model on the train split of a CSV dataset");
    train->add_option("--data", ta.data, "Dataset CSV (overrides 'dataset' in --config)");
    train->add_option("--config", ta.config, "key=value spec file supplying defaults");
    train->add_option("--model", ta.model_out, "Output model file")->required();
    train->add_option("--loss-curve", ta.loss_curve, "Write iteration,loss CSV here");
    train->add_option("--horizon", ta.horizon, "History/forecast length T");
    train->add_option("--iterations", ta.iterations, "Optimizer steps");
    train->add_option("--batch-size", ta.batch_size, "Windows per step");
    train->add_option("--learning-rate", ta.learning_rate, "Adam step size");
    train->add_option("--seed", ta.seed, "Random seed");
    train->add_option("--train-stride", ta.train_stride, "Offset between training windows");
    train->add_option("--beta-start", ta.beta_start, "Schedule beta at t=1");
    train->add_option("--beta-end", ta.beta_end, "Schedule beta at t=T");
    train->add_option("--balance", ta.balance, "Balance constants b c d")->expected(3);
    train->add_flag("--no-deviation", ta.no_deviation, "Disable training-time deviation");
    train->add_flag("--interpolation", ta.interpolation, "Interpolated intermediate states");
    train->add_option("--checkpoint-every", ta.checkpoint_every,
                      "Save <model>.iter<N>.armd every N iterations (0 = off)");

    ForecastArgs fa;
    auto* fc = app.add_subcommand("forecast", "Forecast the next T steps after a history CSV");
    fc->add_option("--model", fa.model, "Model file")->required();
    fc->add_option("--history", fa.history, "CSV whose last T rows are the history")->required();
    fc->add_option("--out", fa.out, "Prediction CSV (default: stdout)");
    fc->add_option("--steps", fa.steps, "Sampling steps")->capture_default_str();
    fc->add_flag("--noise", fa.noise, "Stochastic reverse steps");
    fc->add_option("--noise-fraction", fa.noise_fraction, "sigma^2 / (1 - alpha_bar)")
        ->capture_default_str();
    fc->add_option("--seed", fa.seed, "Noise seed");

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "Score a model on a dataset split");
    ev->add_option("--model", ea.model, "Model file")->required();
    ev->add_option("--data", ea.data, "Dataset CSV")->required();
    ev->add_option("--split", ea.split, "train, valid or test")->capture_default_str();
    ev->add_option("--steps", ea.steps, "Sampling steps (default: grid search on valid)");
    ev->add_option("--stride", ea.stride, "Window stride")->capture_default_str();

    std::string spec_path;
    std::string out_dir;
    bool print_keys = false;
    auto* ex = app.add_subcommand("experiment", "Run a full experiment from a spec file");
    ex->add_option("--spec", spec_path, "key=value spec file");
    ex->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    ex->add_flag("--print-keys", print_keys, "List spec keys with defaults and exit");

    std::size_t horizon = 96;
    double beta_start = armd::kDefaultBetaStart;
    double beta_end = armd::kDefaultBetaEnd;
    auto* sc = app.add_subcommand("schedule", "Print the beta / alpha_bar table");
    sc->add_option("--horizon", horizon, "T")->capture_default_str();
    sc->add_option("--beta-start", beta_start)->capture_default_str();
    sc->add_option("--beta-end", beta_end)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    const CLI::App* cmd = app.get_subcommands().front();
    try {
        if (cmd == train) return run_train(ta);
        if (cmd == fc) return run_forecast(fa);
        if (cmd == ev) return run_evaluate(ea);
        if (cmd == ex) {
            if (print_keys) {
                std::cout << armd::describe_experiment_keys();
                return 0;
            }
            if (spec_path.empty()) {
                throw armd::StageError("config", "--spec is required");
            }
            return run_experiment_cmd(spec_path, out_dir);
        }
        if (cmd == sc) return run_schedule(horizon, beta_start, beta_end);
    } catch (const armd::StageError& e) {
        std::cerr << "armd " << cmd->get_name() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "armd " << cmd->get_name() << ": [unexpected] " << e.what() << '\n';
        return 1;
    }
    return 1;
}
