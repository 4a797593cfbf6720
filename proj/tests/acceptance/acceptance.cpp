// Acceptance suite: one PASS/FAIL/SKIP line per criterion; exits non-zero on any FAIL.

#include "armd/data_io.hpp"
#include "armd/devolution.hpp"
#include "armd/evolution.hpp"
#include "armd/experiment.hpp"
#include "armd/model_io.hpp"
#include "armd/sampler.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

using namespace armd;
using armd::testing::Gen;

namespace {

const std::filesystem::path kDataDir = ARMD_TEST_DATA_DIR;

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit;  // seconds; 0 means unbounded
    std::function<Outcome()> run;
};

Outcome judge(bool ok, std::string detail) {
    return {ok ? Verdict::pass : Verdict::fail, std::move(detail)};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

ExperimentSpec synthetic_spec() { return load_experiment_spec(kDataDir / "synthetic.ini"); }

Outcome reconstruction() {
    Gen gen(1001);
    const std::vector<std::size_t> horizons{4, 16, 96};
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t horizon = gen.pick(horizons);
        const auto s = build_schedule(horizon);
        const auto w = armd::testing::whole_window(gen.series(gen.index(1, 4), 2 * horizon, 2.0));
        const std::size_t t = gen.index(1, horizon);
        const DiffusedState st = diffuse(w, t, s);
        const SeriesMatrix x0 = w.future();
        const double a = s.alpha_bar[t];
        for (std::size_t i = 0; i < x0.size(); ++i) {
            const double rebuilt =
                std::sqrt(a) * x0.values()[i] + std::sqrt(1.0 - a) * st.trend.values()[i];
            worst = std::max(worst, std::abs(rebuilt - st.values.values()[i]));
        }
    }
    return judge(worst < 1e-9, "max error " + fmt("%.3g", worst) + " (limit 1e-9)");
}

Outcome gradients() {
    Gen gen(1002);
    const std::vector<BalanceParams> balances{
        {1.0, 0.5, 0.5}, {2.0, 1.0, 1.0}, {1.5, -0.5, 0.3}, {1.0, -1.0, 1.0}, {1.0, 1.0, 0.3}};
    double worst = 0.0;
    double min_residual = 1e300;
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = build_schedule(gen.index(1, 16));
        const auto gc = armd::testing::make_gradient_case(gen, s, gen.pick(balances),
                                                          gen.index(1, 3), 0.05);
        const SeriesMatrix z_hat = predict_trend(gc.model, gc.input, gc.xt, gc.t, s).z_hat;
        for (std::size_t i = 0; i < z_hat.size(); ++i) {
            min_residual = std::min(min_residual,
                                    std::abs(z_hat.values()[i] - gc.z_true.values()[i]));
        }
        const DevolutionGradients g = backward(gc.model, gc.input, gc.xt, gc.t, gc.z_true, s);
        const auto fd =
            armd::testing::finite_difference_gradient(gc.model, gc.input, gc.xt, gc.t, gc.z_true, s);
        worst = std::max(worst, armd::testing::max_relative_error(g.flat, fd));
    }
    return judge(worst < 1e-4 && min_residual > 1e-3,
                 "max relative error " + fmt("%.3g", worst) + " (limit 1e-4), min |z - z_hat| " +
                     fmt("%.3g", min_residual));
}

Outcome oracle_sampling() {
    Gen gen(1003);
    const auto s = build_schedule(96);
    const auto w = armd::testing::whole_window(gen.series(3, 192));
    const SeriesMatrix truth = w.future();
    const X0Predictor oracle = [&truth](const SeriesMatrix&, std::size_t) { return truth; };
    double worst = 0.0;
    for (std::size_t n : {1u, 2u, 4u}) {
        SamplerConfig cfg;
        cfg.n_steps = n;
        worst = std::max(worst, armd::testing::max_abs_diff(
                                    forecast(oracle, w.history(), s, cfg).prediction, truth));
    }
    return judge(worst < 1e-9, "max error " + fmt("%.3g", worst) + " over n_steps 1, 2, 4");
}

Outcome determinism() {
    armd::testing::TempDir dir("acceptance_det");
    ExperimentSpec spec = synthetic_spec();
    spec.train.iterations = 200;
    spec.n_repeats = 2;
    spec.eval_stride = 4;
    spec.output_dir = dir.path() / "run1";
    run_experiment(spec);
    spec.output_dir = dir.path() / "run2";
    run_experiment(spec);
    const std::string a = slurp(dir.path() / "run1" / "summary.txt");
    const std::string b = slurp(dir.path() / "run2" / "summary.txt");
    const bool summaries = !a.empty() && a == b;

    Gen gen(1004);
    const auto s = build_schedule(32);
    const auto model = gen.model(s, {}, 0.05, 1.0);
    const SeriesMatrix h = gen.series(3, 32);
    bool forecasts = true;
    for (std::size_t n : kSamplingStepGrid) {
        SamplerConfig cfg;
        cfg.n_steps = n;
        forecasts = forecasts && forecast(model, h, s, cfg).prediction ==
                                     forecast(model, h, s, cfg).prediction;
    }
    return judge(summaries && forecasts,
                 std::string("summary files ") + (summaries ? "identical" : "DIFFER") +
                     ", noise-free forecasts " + (forecasts ? "bit-identical" : "DIFFER"));
}

// Shared by criteria 5 and 6: the default pipeline on the synthetic data.
const ExperimentResult& synthetic_baseline() {
    static const ExperimentResult result = run_experiment(synthetic_spec());
    return result;
}

Outcome synthetic_end_to_end() {
    const ExperimentResult& r = synthetic_baseline();
    const double ratio = r.test_mse / r.naive_test_mse;
    return judge(ratio <= 0.7, "ARMD test MSE " + fmt("%.4f", r.test_mse) + " vs naive " +
                                   fmt("%.4f", r.naive_test_mse) + " (ratio " +
                                   fmt("%.3f", ratio) + ", limit 0.70; linear " +
                                   fmt("%.4f", r.linear_test_mse) + ")");
}

std::string per_seed(const ExperimentResult& r) {
    std::string s;
    for (const auto& rep : r.repeats) {
        s += (s.empty() ? "" : "/") + fmt("%.4f", rep.test_mse);
    }
    return s;
}

Outcome ablations() {
    const ExperimentResult& base = synthetic_baseline();
    ExperimentSpec spec = synthetic_spec();
    spec.ablation.interpolation_states = true;
    const ExperimentResult interp = run_experiment(spec);
    spec.ablation.interpolation_states = false;
    spec.ablation.add_sampling_noise = true;
    const ExperimentResult noisy = run_experiment(spec);

    const bool interp_ok = interp.test_mse >= base.test_mse;
    const bool noise_ok = noisy.test_mse >= base.test_mse;
    return judge(interp_ok && noise_ok,
                 "3-seed mean MSE: sliding " + fmt("%.4f", base.test_mse) + " [" +
                     per_seed(base) + "], interpolation " + fmt("%.4f", interp.test_mse) + " [" +
                     per_seed(interp) + "], sampling noise " + fmt("%.4f", noisy.test_mse) +
                     " [" + per_seed(noisy) + "]");
}

Outcome etth1() {
    const char* path = std::getenv("ARMD_ETTH1_CSV");
    if (path == nullptr || *path == '\0') {
        return {Verdict::skip, "set ARMD_ETTH1_CSV to an ETTh1 CSV to run"};
    }
    ExperimentSpec spec;
    spec.dataset = path;
    spec.horizon = 96;
    spec.n_repeats = 1;
    const ExperimentResult r = run_experiment(spec);
    const double train_seconds = r.repeats.front().train_seconds;
    const bool ok = r.test_mse >= 0.40 && r.test_mse <= 0.55 && r.test_mae >= 0.41 &&
                    r.test_mae <= 0.51 && train_seconds < 600.0;
    return judge(ok, "test MSE " + fmt("%.4f", r.test_mse) + " in [0.40, 0.55], MAE " +
                         fmt("%.4f", r.test_mae) + " in [0.41, 0.51], training " +
                         fmt("%.1f", train_seconds) + " s (limit 600)");
}

Outcome persistence() {
    armd::testing::TempDir dir("acceptance_io");
    Gen gen(1008);
    int identical = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t horizon = gen.index(1, 48);
        const auto s = build_schedule(horizon, gen.uniform(1e-5, 1e-3), gen.uniform(0.01, 0.05));
        const std::size_t ch = gen.index(1, 4);
        const auto model = gen.model(s, {gen.pick(std::vector<double>{1.0, 1.5, 2.0}),
                                         gen.pick(std::vector<double>{-0.5, 0.5, 1.0}),
                                         gen.pick(std::vector<double>{0.3, 0.5, 1.0})});
        NormalizationStats stats;
        for (std::size_t c = 0; c < ch; ++c) {
            stats.mean.push_back(gen.normal());
            stats.std.push_back(gen.uniform(0.1, 3.0));
        }
        const auto path = dir.path() / ("m" + std::to_string(trial) + ".armd");
        save_model(model, stats, s, path);
        const ModelArtifact loaded = load_model(path);
        SamplerConfig cfg;
        cfg.n_steps = gen.index(1, horizon);
        const SeriesMatrix h = gen.series(ch, horizon);
        if (loaded.model == model && loaded.stats == stats &&
            forecast(loaded.model, h, loaded.schedule, cfg).prediction ==
                forecast(model, h, s, cfg).prediction) {
            ++identical;
        }
    }
    return judge(identical == 20, std::to_string(identical) + "/20 models bit-identical");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "reconstruction identity", 5.0, reconstruction},
        {2, "gradient correctness", 30.0, gradients},
        {3, "oracle sampling", 1.0, oracle_sampling},
        {4, "determinism", 0.0, determinism},
        {5, "synthetic end-to-end", 120.0, synthetic_end_to_end},
        {6, "ablation directions", 0.0, ablations},
        {7, "ETTh1 reproduction", 0.0, etth1},
        {8, "persistence", 0.0, persistence},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto started = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {Verdict::fail, std::string("threw: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (out.verdict == Verdict::pass && c.time_limit > 0.0 && seconds > c.time_limit) {
            out.verdict = Verdict::fail;
            out.detail += "; runtime over " + fmt("%.0f", c.time_limit) + " s";
        }
        const char* tag = out.verdict == Verdict::pass   ? "PASS"
                          : out.verdict == Verdict::fail ? "FAIL"
                                                         : "SKIP";
        failures += out.verdict == Verdict::fail ? 1 : 0;
        std::cout << "[" << tag << "] criterion " << c.id << " " << c.title << ": " << out.detail
                  << " [" << fmt("%.2f", seconds) << " s]" << std::endl;
    }
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
