#include "armd/experiment.hpp"

#include "armd/baselines.hpp"
#include "armd/model_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace armd {

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::uint64_t window_seed(std::uint64_t seed, std::size_t index) {
    // splitmix64 finalizer over (seed, index)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

PreparedData prepare_data(const SeriesMatrix& raw, std::size_t horizon, const SplitSpec& split,
                          std::size_t train_stride, std::size_t eval_stride) {
    if (horizon == 0) {
        throw std::invalid_argument("prepare_data: horizon must be positive");
    }
    const SeriesSplit parts = chronological_split(raw, split, 2 * horizon);
    PreparedData data;
    data.stats = fit_normalizer(parts.train);
    data.train = std::make_shared<const SeriesMatrix>(normalize(parts.train, data.stats));
    data.valid = std::make_shared<const SeriesMatrix>(normalize(parts.valid, data.stats));
    data.test = std::make_shared<const SeriesMatrix>(normalize(parts.test, data.stats));
    data.train_windows = make_window_samples(data.train, horizon, train_stride);
    data.valid_windows = make_window_samples(data.valid, horizon, eval_stride);
    data.test_windows = make_window_samples(data.test, horizon, eval_stride);
    return data;
}

MetricReport evaluate_windows(const X0Predictor& predictor, std::span<const WindowSample> windows,
                              const DiffusionSchedule& schedule, const SamplerConfig& config) {
    MetricReport report;
    SamplerConfig cfg = config;
    cfg.keep_trajectory = false;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        cfg.seed = window_seed(config.seed, i);
        const ForecastRun run = forecast(predictor, windows[i].history(), schedule, cfg);
        report.add(run.prediction, windows[i].future());
    }
    return report;
}

GridSearchResult grid_search_sampling_steps(const X0Predictor& predictor,
                                            std::span<const WindowSample> valid_windows,
                                            const DiffusionSchedule& schedule,
                                            const SamplerConfig& base,
                                            std::span<const std::size_t> grid) {
    if (valid_windows.empty()) {
        throw std::invalid_argument("grid_search_sampling_steps: no validation windows");
    }
    std::vector<std::size_t> candidates;
    for (std::size_t n : grid) {
        if (n >= 1 && n <= schedule.horizon) {
            candidates.push_back(n);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    if (candidates.empty()) {
        throw std::invalid_argument("grid_search_sampling_steps: no grid value fits the horizon");
    }

    GridSearchResult result;
    double best = 0.0;
    for (std::size_t n : candidates) {
        SamplerConfig cfg = base;
        cfg.n_steps = n;
        const double mse = evaluate_windows(predictor, valid_windows, schedule, cfg).mse;
        result.grid.push_back(n);
        result.valid_mse.push_back(mse);
        if (result.grid.size() == 1 || mse < best) {
            best = mse;
            result.best_steps = n;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Spec files

namespace {

struct SpecKey {
    std::string name;
    std::string default_value;
    std::string help;
    std::function<void(ExperimentSpec&, const std::string&)> apply;
};

double parse_real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw std::invalid_argument("spec key '" + key + "': '" + text + "' is not a number");
    }
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("spec key '" + key + "': '" + text +
                                    "' is not a non-negative integer");
    }
    return v;
}

bool parse_flag(const std::string& key, const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "1" || t == "on" || t == "yes") {
        return true;
    }
    if (t == "false" || t == "0" || t == "off" || t == "no") {
        return false;
    }
    throw std::invalid_argument("spec key '" + key + "': '" + text + "' is not a boolean");
}

std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) {
            out.push_back(static_cast<std::size_t>(parse_count(key, item)));
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("spec key '" + key + "': empty list");
    }
    return out;
}

const std::vector<SpecKey>& spec_keys() {
    using S = ExperimentSpec;
    using Str = const std::string&;
    static const std::vector<SpecKey> keys = {
        {"dataset", "", "CSV file (header row; optional leading date/timestamp column)",
         [](S& s, Str v) { s.dataset = v; }},
        {"output_dir", "", "directory for reports; empty writes nothing",
         [](S& s, Str v) { s.output_dir = v; }},
        {"horizon", "96", "history length = forecast length = diffusion steps T",
         [](S& s, Str v) { s.horizon = parse_count("horizon", v); }},
        {"beta_start", "0.0001", "linear beta schedule start",
         [](S& s, Str v) { s.beta_start = parse_real("beta_start", v); }},
        {"beta_end", "0.02", "linear beta schedule end",
         [](S& s, Str v) { s.beta_end = parse_real("beta_end", v); }},
        {"train_fraction", "0.7", "chronological split",
         [](S& s, Str v) { s.split.train_fraction = parse_real("train_fraction", v); }},
        {"valid_fraction", "0.1", "chronological split",
         [](S& s, Str v) { s.split.valid_fraction = parse_real("valid_fraction", v); }},
        {"test_fraction", "0.2", "chronological split",
         [](S& s, Str v) { s.split.test_fraction = parse_real("test_fraction", v); }},
        {"train_stride", "1", "offset between training windows",
         [](S& s, Str v) { s.train_stride = parse_count("train_stride", v); }},
        {"eval_stride", "1", "offset between validation/test windows",
         [](S& s, Str v) { s.eval_stride = parse_count("eval_stride", v); }},
        {"iterations", "2000", "optimizer steps per training run",
         [](S& s, Str v) { s.train.iterations = parse_count("iterations", v); }},
        {"batch_size", "128", "windows per optimizer step",
         [](S& s, Str v) { s.train.batch_size = parse_count("batch_size", v); }},
        {"learning_rate", "0.001", "Adam step size",
         [](S& s, Str v) { s.train.adam.learning_rate = parse_real("learning_rate", v); }},
        {"adam_beta1", "0.9", "Adam first-moment decay",
         [](S& s, Str v) { s.train.adam.beta1 = parse_real("adam_beta1", v); }},
        {"adam_beta2", "0.999", "Adam second-moment decay",
         [](S& s, Str v) { s.train.adam.beta2 = parse_real("adam_beta2", v); }},
        {"adam_eps", "1e-08", "Adam epsilon",
         [](S& s, Str v) { s.train.adam.eps = parse_real("adam_eps", v); }},
        {"init_noise", "0.01", "uniform jitter added to the identity initial weight",
         [](S& s, Str v) { s.train.init_noise = parse_real("init_noise", v); }},
        {"balance_b", "1", "balance constant b",
         [](S& s, Str v) { s.train.balance.b = parse_real("balance_b", v); }},
        {"balance_c", "0.5", "balance constant c",
         [](S& s, Str v) { s.train.balance.c = parse_real("balance_c", v); }},
        {"balance_d", "0.5", "balance constant d",
         [](S& s, Str v) { s.train.balance.d = parse_real("balance_d", v); }},
        {"tune_balance", "false", "grid-search b, c, d on validation before the repeats",
         [](S& s, Str v) { s.tune_balance = parse_flag("tune_balance", v); }},
        {"seed", "0", "base seed; repeat r uses seed + r",
         [](S& s, Str v) { s.base_seed = parse_count("seed", v); }},
        {"n_repeats", "10", "independent training seeds averaged in the summary",
         [](S& s, Str v) { s.n_repeats = parse_count("n_repeats", v); }},
        {"sampling_grid", "1,2,3,4,6,8,12", "sampling-step counts tried on validation",
         [](S& s, Str v) { s.sampling_grid = parse_count_list("sampling_grid", v); }},
        {"noise_fraction", "0.01", "sigma_t^2 / (1 - alpha_bar[t-k]) when sampling noise is on",
         [](S& s, Str v) { s.noise_fraction = parse_real("noise_fraction", v); }},
        {"interpolation_states", "false", "ablation: interpolated instead of slid states",
         [](S& s, Str v) { s.ablation.interpolation_states = parse_flag("interpolation_states", v); }},
        {"remove_deviation", "false", "ablation: no training-time deviation",
         [](S& s, Str v) { s.ablation.remove_deviation = parse_flag("remove_deviation", v); }},
        {"add_sampling_noise", "false", "ablation: stochastic reverse steps",
         [](S& s, Str v) { s.ablation.add_sampling_noise = parse_flag("add_sampling_noise", v); }},
        {"save_predictions", "true", "write per-window predictions for the first seed",
         [](S& s, Str v) { s.save_predictions = parse_flag("save_predictions", v); }},
    };
    return keys;
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::istream& in, const std::filesystem::path& base_dir) {
    std::map<std::string, const SpecKey*> by_name;
    for (const SpecKey& k : spec_keys()) {
        by_name[k.name] = &k;
    }

    CLI::ConfigINI reader;
    reader.comment('#');
    const std::vector<CLI::ConfigItem> items = reader.from_config(in);

    ExperimentSpec spec;
    for (const CLI::ConfigItem& item : items) {
        if (item.name == "--") {
            continue;  // section end marker
        }
        const std::string key = item.fullname();
        const auto it = by_name.find(key);
        if (it == by_name.end()) {
            throw std::invalid_argument("spec: unknown key '" + key + "'");
        }
        std::string value;
        for (std::size_t i = 0; i < item.inputs.size(); ++i) {
            value += (i ? "," : "") + item.inputs[i];
        }
        it->second->apply(spec, value);
    }
    if (!base_dir.empty()) {
        if (!spec.dataset.empty() && spec.dataset.is_relative()) {
            spec.dataset = base_dir / spec.dataset;
        }
        if (!spec.output_dir.empty() && spec.output_dir.is_relative()) {
            spec.output_dir = base_dir / spec.output_dir;
        }
    }
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open spec file " + path.string());
    }
    return parse_experiment_spec(in, path.parent_path());
}

std::string describe_experiment_keys() {
    std::ostringstream out;
    for (const SpecKey& k : spec_keys()) {
        out << "# " << k.help << '\n' << k.name << '=' << k.default_value << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

TrainConfig repeat_config(const ExperimentSpec& spec, std::uint64_t seed, BalanceParams balance) {
    TrainConfig cfg = spec.train;
    cfg.seed = seed;
    cfg.deviation.enabled = !spec.ablation.remove_deviation;
    cfg.deviation.seed = seed;
    cfg.state_generator = spec.ablation.interpolation_states ? StateGenerator::interpolation
                                                             : StateGenerator::sliding;
    cfg.balance = balance;
    return cfg;
}

SamplerConfig sampler_config(const ExperimentSpec& spec, std::uint64_t seed) {
    SamplerConfig cfg;
    cfg.add_noise = spec.ablation.add_sampling_noise;
    cfg.noise_fraction = spec.noise_fraction;
    cfg.seed = seed;
    cfg.keep_trajectory = false;
    return cfg;
}

constexpr double kGridB[] = {1.0, 1.5, 2.0};
constexpr double kGridC[] = {-1.0, -0.5, 0.5, 1.0};
constexpr double kGridD[] = {0.3, 0.5, 1.0};

BalanceParams tune_balance(const ExperimentSpec& spec, const PreparedData& data,
                           const DiffusionSchedule& schedule) {
    BalanceParams best = spec.train.balance;
    double best_mse = std::numeric_limits<double>::infinity();
    for (double b : kGridB) {
        for (double c : kGridC) {
            for (double d : kGridD) {
                const BalanceParams candidate{b, c, d};
                try {
                    const TrainResult fit = train(
                        data.train_windows, schedule, repeat_config(spec, spec.base_seed, candidate));
                    const GridSearchResult gs = grid_search_sampling_steps(
                        as_predictor(fit.model), data.valid_windows, schedule,
                        sampler_config(spec, spec.base_seed), spec.sampling_grid);
                    const double mse =
                        *std::min_element(gs.valid_mse.begin(), gs.valid_mse.end());
                    if (std::isfinite(mse) && mse < best_mse) {
                        best_mse = mse;
                        best = candidate;
                    }
                } catch (const std::exception&) {
                    // diverged or rejected at the pole; not a usable candidate
                }
            }
        }
    }
    if (!std::isfinite(best_mse)) {
        throw std::runtime_error("no balance configuration trained successfully");
    }
    return best;
}

void write_predictions(const std::filesystem::path& path, const DevolutionModel& model,
                       std::span<const WindowSample> windows, const DiffusionSchedule& schedule,
                       const SamplerConfig& config) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string());
    }
    out << "window,origin,channel,step,prediction,truth\n";
    SamplerConfig cfg = config;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        cfg.seed = window_seed(config.seed, i);
        const SeriesMatrix pred = forecast(model, windows[i].history(), schedule, cfg).prediction;
        const SeriesMatrix truth = windows[i].future();
        for (std::size_t c = 0; c < pred.n_channels(); ++c) {
            for (std::size_t t = 0; t < pred.n_timesteps(); ++t) {
                out << i << ',' << windows[i].origin_index() << ',' << c << ',' << t + 1 << ','
                    << fmt_double(pred(c, t)) << ',' << fmt_double(truth(c, t)) << '\n';
            }
        }
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    const SeriesMatrix raw = in_stage("load", [&] {
        if (spec.dataset.empty()) {
            throw std::invalid_argument("no dataset given");
        }
        return load_csv(spec.dataset);
    });
    return run_experiment(spec, raw);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const SeriesMatrix& raw) {
    if (spec.n_repeats == 0) {
        throw StageError("config", "n_repeats must be at least 1");
    }
    const DiffusionSchedule schedule =
        in_stage("config", [&] { return build_schedule(spec.horizon, spec.beta_start, spec.beta_end); });
    const PreparedData data = in_stage("prepare", [&] {
        PreparedData d =
            prepare_data(raw, spec.horizon, spec.split, spec.train_stride, spec.eval_stride);
        if (d.train_windows.empty() || d.valid_windows.empty() || d.test_windows.empty()) {
            throw std::invalid_argument("every split needs at least one window of length 2T");
        }
        return d;
    });

    ExperimentResult result;
    result.n_test_windows = data.test_windows.size();

    in_stage("baselines", [&] {
        MetricReport naive;
        for (const WindowSample& w : data.test_windows) {
            naive.add(naive_forecast(w.history()), w.future());
        }
        result.naive_test_mse = naive.mse;
        result.naive_test_mae = naive.mae;
        const LinearBaseline linear = fit_linear_baseline(data.train_windows);
        MetricReport lin;
        for (const WindowSample& w : data.test_windows) {
            lin.add(linear.predict(w.history()), w.future());
        }
        result.linear_test_mse = lin.mse;
        result.linear_test_mae = lin.mae;
    });

    result.balance = spec.tune_balance
                         ? in_stage("tune", [&] { return tune_balance(spec, data, schedule); })
                         : spec.train.balance;

    if (!spec.output_dir.empty()) {
        in_stage("output", [&] { std::filesystem::create_directories(spec.output_dir); });
    }

    for (std::size_t r = 0; r < spec.n_repeats; ++r) {
        const std::uint64_t seed = spec.base_seed + r;
        const std::string tag = "seed " + std::to_string(seed);
        const TrainResult fit = in_stage(("train " + tag).c_str(), [&] {
            return train(data.train_windows, schedule, repeat_config(spec, seed, result.balance));
        });
        const SamplerConfig sampling = sampler_config(spec, seed);

        RepeatResult rep;
        rep.seed = seed;
        rep.final_loss = fit.report.final_loss;
        rep.train_seconds = fit.report.wall_time;
        const X0Predictor predictor = as_predictor(fit.model);
        in_stage(("evaluate " + tag).c_str(), [&] {
            rep.grid = grid_search_sampling_steps(predictor, data.valid_windows, schedule, sampling,
                                                  spec.sampling_grid);
            rep.n_steps = rep.grid.best_steps;
            const auto pos = std::find(rep.grid.grid.begin(), rep.grid.grid.end(), rep.n_steps);
            rep.valid_mse = rep.grid.valid_mse[static_cast<std::size_t>(pos - rep.grid.grid.begin())];
            SamplerConfig best = sampling;
            best.n_steps = rep.n_steps;
            const MetricReport test = evaluate_windows(predictor, data.test_windows, schedule, best);
            rep.test_mse = test.mse;
            rep.test_mae = test.mae;
        });

        if (!spec.output_dir.empty()) {
            in_stage("output", [&] {
                write_loss_curve(fit.report,
                                 spec.output_dir / ("loss_seed" + std::to_string(seed) + ".csv"));
                if (r == 0) {
                    save_model(fit.model, data.stats, schedule,
                               spec.output_dir / ("model_seed" + std::to_string(seed) + ".armd"));
                    if (spec.save_predictions) {
                        SamplerConfig best = sampling;
                        best.n_steps = rep.n_steps;
                        write_predictions(
                            spec.output_dir / ("predictions_seed" + std::to_string(seed) + ".csv"),
                            fit.model, data.test_windows, schedule, best);
                    }
                }
            });
        }
        result.repeats.push_back(std::move(rep));
    }

    const double n = static_cast<double>(result.repeats.size());
    for (const RepeatResult& rep : result.repeats) {
        result.test_mse += rep.test_mse / n;
        result.test_mae += rep.test_mae / n;
    }
    double var = 0.0;
    for (const RepeatResult& rep : result.repeats) {
        var += (rep.test_mse - result.test_mse) * (rep.test_mse - result.test_mse) / n;
    }
    result.test_mse_std = std::sqrt(var);

    if (!spec.output_dir.empty()) {
        in_stage("output", [&] {
            std::ofstream summary(spec.output_dir / "summary.txt", std::ios::binary);
            summary << format_summary(spec, result);
            std::ofstream timing(spec.output_dir / "timing.txt");
            timing << "seed,train_seconds\n";
            for (const RepeatResult& rep : result.repeats) {
                timing << rep.seed << ',' << rep.train_seconds << '\n';
            }
            if (!summary || !timing) {
                throw std::runtime_error("failed writing reports to " + spec.output_dir.string());
            }
        });
    }
    return result;
}

std::string format_summary(const ExperimentSpec& spec, const ExperimentResult& result) {
    std::ostringstream out;
    out << "# ARMD experiment summary\n"
        << "# Metrics are MSE/MAE on the z-score normalized test split (train statistics).\n"
        << "# Sampling is deterministic, so the repeats differ by training seed only;\n"
        << "# test_mse/test_mae are means over the repeats.\n";
    const auto kv = [&out](const char* key, const std::string& value) {
        out << key << '=' << value << '\n';
    };
    kv("dataset", spec.dataset.generic_string());
    kv("horizon", std::to_string(spec.horizon));
    kv("beta_start", fmt_double(spec.beta_start));
    kv("beta_end", fmt_double(spec.beta_end));
    kv("iterations", std::to_string(spec.train.iterations));
    kv("batch_size", std::to_string(spec.train.batch_size));
    kv("learning_rate", fmt_double(spec.train.adam.learning_rate));
    kv("balance_b", fmt_double(result.balance.b));
    kv("balance_c", fmt_double(result.balance.c));
    kv("balance_d", fmt_double(result.balance.d));
    kv("tune_balance", spec.tune_balance ? "true" : "false");
    kv("interpolation_states", spec.ablation.interpolation_states ? "true" : "false");
    kv("remove_deviation", spec.ablation.remove_deviation ? "true" : "false");
    kv("add_sampling_noise", spec.ablation.add_sampling_noise ? "true" : "false");
    kv("noise_fraction", fmt_double(spec.noise_fraction));
    kv("seed", std::to_string(spec.base_seed));
    kv("n_repeats", std::to_string(spec.n_repeats));
    kv("n_test_windows", std::to_string(result.n_test_windows));
    kv("test_mse", fmt_double(result.test_mse));
    kv("test_mae", fmt_double(result.test_mae));
    kv("test_mse_std", fmt_double(result.test_mse_std));
    kv("naive_test_mse", fmt_double(result.naive_test_mse));
    kv("naive_test_mae", fmt_double(result.naive_test_mae));
    kv("linear_test_mse", fmt_double(result.linear_test_mse));
    kv("linear_test_mae", fmt_double(result.linear_test_mae));

    out << "\n[repeats]\nseed,n_steps,valid_mse,test_mse,test_mae,final_train_loss\n";
    for (const RepeatResult& rep : result.repeats) {
        out << rep.seed << ',' << rep.n_steps << ',' << fmt_double(rep.valid_mse) << ','
            << fmt_double(rep.test_mse) << ',' << fmt_double(rep.test_mae) << ','
            << fmt_double(rep.final_loss) << '\n';
    }
    out << "\n[sampling_grid]\nseed,n_steps,valid_mse\n";
    for (const RepeatResult& rep : result.repeats) {
        for (std::size_t i = 0; i < rep.grid.grid.size(); ++i) {
            out << rep.seed << ',' << rep.grid.grid[i] << ',' << fmt_double(rep.grid.valid_mse[i])
                << '\n';
        }
    }
    return out.str();
}

}  // namespace armd
