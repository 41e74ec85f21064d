// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Run from any directory; scratch files go to the system
// temp directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "paced/age_scheduler.hpp"
#include "paced/commands.hpp"
#include "paced/difficulty.hpp"
#include "paced/models.hpp"
#include "paced/optim.hpp"

using namespace paced;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_limit_s > 0 && secs > time_limit_s) {
        o.pass = false;
        o.detail += " (over time limit " + format_double(time_limit_s) + " s)";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-28s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("paced_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

FeatureVector random_features(Rng& rng, std::size_t dim) {
    FeatureVector x;
    x.dimension = dim;
    double ss = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        if (rng.below(3) != 0) continue;
        x.indices.push_back(static_cast<std::uint32_t>(i));
        x.values.push_back(rng.uniform(-1, 1));
        ss += x.values.back() * x.values.back();
    }
    if (ss > 0) {
        for (auto& v : x.values) v /= std::sqrt(ss);
        x.l2_norm = 1.0;
    }
    return x;
}

// Worst relative error of analytic vs central-difference gradients.
double gradient_error(const Model& model, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int point = 0; point < 100; ++point) {
        std::vector<double> params(model.parameter_count());
        for (auto& p : params) p = rng.uniform(-1, 1);
        const auto x = random_features(rng, model.input_dim());
        const int y = static_cast<int>(rng.below(2));
        const auto analytic = model.gradient(params, x, y);
        const auto numeric = oracle::finite_difference(
            [&](const std::vector<double>& p) { return oracle::bce(model.predict(p, x).p_vul, y); }, params, 1e-5);
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-4});
            worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
        }
    }
    return worst;
}

// Corpus and configuration for the ablation and enrichment criteria.
RunConfig ablation_config() {
    RunConfig c;
    c.synth.n_samples = 5000;
    c.synth.positive_ratio = 0.3;
    c.synth.label_noise_rate = 0.2;
    c.synth.unrelated_noise_rate = 0.1;
    c.synth.seed = 0;
    c.training.optimizer.learning_rate = 0.3;
    c.selector.r_init = 0.9;
    return c;
}

struct AblationRun {
    AblationReport report;
    PreparedData data;
    std::vector<CleanLabel> clean;
    double seconds = 0.0;
};

}  // namespace

int main() {
    criterion("difficulty oracle", 1.0, [] {
        Rng rng(2718);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double p = rng.uniform();
            const int y = static_cast<int>(rng.below(2));
            worst = std::max(worst, std::abs(difficulty(Prediction::from_p_vul(p), y).difficulty - oracle::difficulty(p, y)));
        }
        const double easy = difficulty(Prediction::from_p_vul(0.95), 1).difficulty;
        const double hard = difficulty(Prediction::from_p_vul(0.95), 0).difficulty;
        const bool worked = easy == oracle::difficulty(0.95, 1) && hard == oracle::difficulty(0.95, 0) &&
                            std::abs(easy - 0.05) < 1e-15 && std::abs(hard - 0.95) < 1e-15;
        return Outcome{worst <= 1e-15 && worked,
                       "max |err| " + fmt(worst) + " over 10000 pairs; worked pair " + fmt(easy, 17) + " / " +
                           fmt(hard, 17)};
    });

    criterion("age cap property", 10.0, [] {
        Rng rng(31337);
        std::size_t capped = 0, floored = 0, violations = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> d(2 + rng.below(400));
            for (auto& x : d) x = rng.uniform();
            SelectorConfig c;
            c.r_init = rng.uniform(0.01, 0.5);
            c.k = rng.uniform(0.0, 20.0);
            c.gamma0 = rng.uniform(0.001, 0.6);
            c.alpha = rng.uniform(0.0, 1.0);
            c.r_max = rng.uniform(0.01, 0.3);
            c.min_select_ratio = 0.0;
            AgeState s;
            s.lambda = rng.uniform();
            s.mean_difficulty = rng.uniform();
            s.prev_mean_difficulty = s.mean_difficulty;
            s.selected_ratio = fraction_at_or_below(d, s.lambda);
            const auto u = update_lambda(s, d, c);
            const double n = static_cast<double>(d.size());
            const double before = static_cast<double>(oracle::count_at_or_below(d, s.lambda)) / n;
            const double after = static_cast<double>(oracle::count_at_or_below(d, u.state.lambda)) / n;
            // The floor re-anchors an empty selection and is outside the cap's bound.
            bool ok = u.trace.floored || after - before <= c.r_max + 1.0 / n + 1e-12;
            floored += u.trace.floored ? 1 : 0;
            if (u.trace.capped) {
                ++capped;
                ok = ok && std::find(d.begin(), d.end(), u.state.lambda) != d.end() &&
                     u.state.lambda == oracle::smallest_value_covering(d, std::min(1.0, u.trace.r_t + c.r_max));
            }
            if (!ok) ++violations;
        }
        return Outcome{violations == 0 && capped > 0,
                       std::to_string(violations) + " violations in 1000 instances (" + std::to_string(capped) +
                           " capped, " + std::to_string(floored) + " floored)"};
    });

    criterion("monotone age", 0, [] {
        Rng rng(4242);
        std::size_t violations = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> d(1 + rng.below(300));
            for (auto& x : d) x = rng.uniform();
            SelectorConfig c;
            c.k = rng.uniform(0.0, 20.0);
            c.gamma0 = rng.uniform(0.001, 0.6);
            c.alpha = rng.uniform(0.0, 1.0);
            c.r_max = rng.uniform(0.01, 0.3);
            AgeState s;
            s.lambda = rng.uniform();
            s.mean_difficulty = mean(d);
            s.prev_mean_difficulty = s.mean_difficulty;
            s.selected_ratio = fraction_at_or_below(d, s.lambda);
            const auto u = update_lambda(s, d, c);
            const bool ok = u.trace.delta_mu == 0.0 && u.trace.lambda_unclamped >= s.lambda &&
                            u.state.lambda >= 0.0 && u.state.lambda <= 1.0;
            if (!ok) ++violations;
        }
        return Outcome{violations == 0, std::to_string(violations) + " violations in 1000 instances"};
    });

    criterion("adamw oracle", 0, [] {
        Rng rng(99);
        AdamWConfig c;
        c.learning_rate = 0.01;
        c.weight_decay = 0.05;
        auto s = OptimizerState::zeros(8, c);
        oracle::AdamW ref(8, c.learning_rate, c.beta1, c.beta2, c.epsilon, c.weight_decay);
        std::vector<double> a(8), b(8);
        for (std::size_t i = 0; i < 8; ++i) a[i] = b[i] = rng.uniform(-3, 3);
        double worst = 0.0;
        for (int step = 0; step < 1000; ++step) {
            std::vector<double> g(8);
            for (auto& x : g) x = rng.uniform(-2, 2);
            adamw_step(s, a, g);
            ref.step(b, g);
            for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        }
        AdamWConfig bowl_config;
        bowl_config.learning_rate = 0.1;
        auto bowl = OptimizerState::zeros(1, bowl_config);
        std::vector<double> theta{5.0};
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> g{2.0 * theta[0]};
            adamw_step(bowl, theta, g);
        }
        return Outcome{worst <= 1e-12 && std::abs(theta[0]) < 0.1,
                       "max per-step |err| " + fmt(worst) + "; bowl |theta| " + fmt(std::abs(theta[0]))};
    });

    criterion("gradient check", 5.0, [] {
        const double lin = gradient_error(LinearModel(32), 7);
        const double mlp = gradient_error(MlpModel(16, 6), 8);
        return Outcome{lin <= 1e-4 && mlp <= 1e-4,
                       "worst relative error linear " + fmt(lin) + ", mlp " + fmt(mlp) + " (100 points each)"};
    });

    criterion("metrics oracle", 0, [] {
        const auto m = metrics({50, 10, 100, 20});
        bool ok = std::abs(m.f1 - 0.7692) < 1e-4 && std::abs(m.mcc - 0.6447) < 1e-4;
        Rng rng(5);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            ConfusionCounts c{rng.below(500), rng.below(500), rng.below(500), rng.below(500)};
            if (c.total() == 0) continue;
            const auto got = metrics(c);
            const auto want = oracle::metrics(static_cast<double>(c.tp), static_cast<double>(c.fp),
                                              static_cast<double>(c.tn), static_cast<double>(c.fn));
            for (auto [x, y] : {std::pair{got.acc, want.acc}, {got.precision, want.precision},
                                {got.recall, want.recall}, {got.f1, want.f1}, {got.mcc, want.mcc}}) {
                worst = std::max(worst, std::abs(x - y));
            }
            ok = ok && got.mcc >= -1.0 && got.mcc <= 1.0;
        }
        ok = ok && worst < 1e-12;
        return Outcome{ok, "f1 " + fmt(m.f1) + ", mcc " + fmt(m.mcc) + "; max |err| " + fmt(worst) +
                               " over 1000 tuples"};
    });

    criterion("no-spl equivalence", 30.0, [] {
        RunConfig c;
        c.synth.n_samples = 500;
        c.synth.label_noise_rate = 0.2;
        c.training.optimizer.learning_rate = 0.01;
        const auto g = generate(c.synth);
        const auto parts = split(g.samples, c.split_ratios, 0);
        const auto data = prepare({parts.train, parts.validation, parts.test, "x"}, c.featurizer);
        const auto model = make_model(c.model, c.featurizer.dimension);
        auto forced_config = c.training;
        forced_config.force_lambda = 1.0;
        auto forced = start_run(*model, 17, forced_config, data.train.size());
        auto plain = start_run(*model, 17, c.training, data.train.size());
        bool identical = forced.params == plain.params;
        while (!forced.finished || !plain.finished) {
            if (forced.finished != plain.finished) {
                identical = false;
                break;
            }
            continue_training(forced, data.train, data.validation, *model, c.selector, forced_config,
                              TrainMode::spl, 1);
            continue_training(plain, data.train, data.validation, *model, c.selector, c.training,
                              TrainMode::no_spl, 1);
            identical = identical && forced.params == plain.params && forced.optimizer.m == plain.optimizer.m &&
                        forced.optimizer.v == plain.optimizer.v;
        }
        identical = identical && forced.epoch == plain.epoch && forced.best_params == plain.best_params;
        return Outcome{identical, std::to_string(forced.epoch) + " epochs compared after every epoch"};
    });

    AblationRun ablation;
    criterion("ablation direction", 300.0, [&] {
        const auto start = std::chrono::steady_clock::now();
        const auto config = ablation_config();
        const auto dir = scratch("ablation");
        cmd_gen_synthetic(config, dir / "data");
        ablation.data = prepare(load_splits(dir / "data"), config.featurizer);
        ablation.clean = load_clean_labels(dir / "data" / kCleanLabelsFile);
        ablation.report = cmd_ablation(config, dir / "data", default_ablation_seeds(), dir / "out", 1);
        ablation.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto& r = ablation.report;
        std::string per_seed;
        for (const auto& s : r.seeds) per_seed += (per_seed.empty() ? "" : " ") + fmt(100 * s.delta_f1, 3);
        fs::remove_all(dir);
        return Outcome{r.seeds.size() == 10 && r.median_delta_f1 >= 0.0 && r.mean_delta_f1 >= 0.005,
                       "median dF1 " + fmt(100 * r.median_delta_f1, 3) + " pp, mean " +
                           fmt(100 * r.mean_delta_f1, 3) + " pp; per seed [" + per_seed + "]"};
    });

    criterion("hard-sample enrichment", 60.0, [&] {
        if (ablation.report.seeds.empty()) return Outcome{false, "ablation runs unavailable"};
        const auto config = ablation_config();
        const auto model = make_model(config.model, config.featurizer.dimension);
        double lowest = 1e9;
        std::string factors;
        for (const auto& s : ablation.report.seeds) {
            const auto r = inspect_difficulty(*model, s.spl.state.best_params, ablation.data.train,
                                              HistogramFilter::all, 10, 0, &ablation.clean);
            lowest = std::min(lowest, r.enrichment->factor);
            factors += (factors.empty() ? "" : " ") + fmt(r.enrichment->factor, 3);
        }
        return Outcome{lowest >= 2.0, "min factor " + fmt(lowest, 3) + " across SPL runs [" + factors + "]"};
    });

    criterion("threshold-sweep monotonicity", 0, [&] {
        if (ablation.report.seeds.empty()) return Outcome{false, "ablation runs unavailable"};
        const auto grid = default_tau_grid();
        std::size_t checked = 0, violations = 0;
        for (const auto& s : ablation.report.seeds) {
            for (const RunResult* run : {&s.spl, &s.no_spl}) {
                const auto& sweep = run->test.sweep;
                if (sweep.size() != grid.size()) ++violations;
                for (std::size_t i = 1; i < sweep.size(); ++i) {
                    if (sweep[i].recall > sweep[i - 1].recall || sweep[i].counts.fp > sweep[i - 1].counts.fp) {
                        ++violations;
                    }
                }
                ++checked;
            }
        }
        return Outcome{violations == 0 && checked == 20,
                       std::to_string(checked) + " trained checkpoints, " + std::to_string(violations) +
                           " violations"};
    });

    criterion("determinism", 0, [] {
        RunConfig c;
        c.synth.n_samples = 1000;
        c.synth.label_noise_rate = 0.2;
        c.synth.unrelated_noise_rate = 0.1;
        c.training.optimizer.learning_rate = 0.05;
        c.seed = 11;
        const auto root = scratch("determinism");
        for (const char* run : {"a", "b"}) {
            cmd_gen_synthetic(c, root / run / "data");
            cmd_train(c, root / run / "data", root / run / "train");
            cmd_evaluate(root / run / "train" / kCheckpointFile, root / run / "data", root / run / "eval");
        }
        TrainOptions partial;
        partial.stop_after_epochs = 2;
        cmd_train(c, root / "a" / "data", root / "resumed", partial);
        TrainOptions resume;
        resume.resume = root / "resumed" / kCheckpointFile;
        cmd_train(c, root / "a" / "data", root / "resumed", resume);

        std::size_t compared = 0, mismatched = 0;
        auto same = [&](const fs::path& x, const fs::path& y) {
            ++compared;
            const auto a = slurp(x);
            if (a.empty() || a != slurp(y)) ++mismatched;
        };
        for (auto f : {kCorpusFile, kCleanLabelsFile, kTrainFile, kValidFile, kTestFile, kManifestFile}) {
            same(root / "a" / "data" / f, root / "b" / "data" / f);
        }
        for (auto f : {"checkpoint.json", "trace.csv", "report.json", "test_sweep.csv", "manifest.json"}) {
            same(root / "a" / "train" / f, root / "b" / "train" / f);
        }
        for (auto f : {"eval_report.json", "sweep.csv"}) same(root / "a" / "eval" / f, root / "b" / "eval" / f);
        std::size_t resume_mismatched = 0;
        for (auto f : {"checkpoint.json", "trace.csv", "report.json", "test_sweep.csv"}) {
            if (slurp(root / "a" / "train" / f) != slurp(root / "resumed" / f)) ++resume_mismatched;
        }
        fs::remove_all(root);
        return Outcome{mismatched == 0 && resume_mismatched == 0,
                       std::to_string(compared - mismatched) + "/" + std::to_string(compared) +
                           " artifacts identical; resume mismatches " + std::to_string(resume_mismatched)};
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
    return failures == 0 ? 0 : 1;
}
