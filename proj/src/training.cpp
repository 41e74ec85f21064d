#include "paced/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "paced/difficulty.hpp"
#include "paced/selector.hpp"

namespace paced {

std::string_view to_string(TrainMode mode) { return mode == TrainMode::spl ? "spl" : "no-spl"; }

TrainMode parse_train_mode(std::string_view text) {
    if (text == "spl") return TrainMode::spl;
    if (text == "no-spl" || text == "nospl" || text == "no_spl") return TrainMode::no_spl;
    throw Error(ErrorKind::config, "mode must be 'spl' or 'no-spl', got '" + std::string(text) + "'");
}

void validate(const TrainingConfig& c) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
    if (c.max_epochs < 1) fail("training.max_epochs must be ≥ 1");
    if (c.batch_size < 1) fail("training.batch_size must be ≥ 1");
    if (c.patience < 1) fail("training.patience must be ≥ 1");
    if (!(c.min_delta >= 0.0)) fail("training.min_delta must be ≥ 0");
    const auto& o = c.optimizer;
    if (!(o.learning_rate > 0.0)) fail("training.learning_rate must be > 0");
    if (!(o.beta1 > 0.0 && o.beta1 < 1.0)) fail("training.beta1 must be in (0,1)");
    if (!(o.beta2 > 0.0 && o.beta2 < 1.0)) fail("training.beta2 must be in (0,1)");
    if (!(o.epsilon > 0.0)) fail("training.epsilon must be > 0");
    if (!(o.weight_decay >= 0.0)) fail("training.weight_decay must be ≥ 0");
    if (c.force_lambda && !(*c.force_lambda >= 0.0 && *c.force_lambda <= 1.0)) {
        fail("training.force_lambda must be in [0,1]");
    }
}

Dataset featurize_corpus(const Corpus& corpus, const FeaturizerConfig& config) {
    Dataset d;
    d.ids.reserve(corpus.size());
    d.features.reserve(corpus.size());
    d.labels.reserve(corpus.size());
    for (const auto& s : corpus) {
        d.ids.push_back(s.id);
        d.features.push_back(featurize(s.code, config));
        d.labels.push_back(s.label);
    }
    return d;
}

std::vector<Prediction> predict_all(const Model& model, std::span<const double> params, const Dataset& data) {
    std::vector<Prediction> out;
    out.reserve(data.size());
    for (const auto& x : data.features) out.push_back(model.predict(params, x));
    return out;
}

std::vector<double> predict_p_vul(const Model& model, std::span<const double> params, const Dataset& data) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& x : data.features) out.push_back(model.predict(params, x).p_vul);
    return out;
}

double mean_loss(const Model& model, std::span<const double> params, const Dataset& data) {
    if (data.empty()) throw Error(ErrorKind::invalid_argument, "loss over an empty dataset");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        sum += bce_loss(model.predict(params, data.features[i]).p_vul, data.labels[i]);
    }
    return sum / static_cast<double>(data.size());
}

bool EarlyStopping::observe(int epoch, double loss) {
    if (loss < best_loss - min_delta) {
        best_loss = loss;
        best_epoch = epoch;
        stale_epochs = 0;
        return true;
    }
    stale_epochs += 1;
    return false;
}

TrainRunState start_run(const Model& model, std::uint64_t seed, const TrainingConfig& config,
                        std::size_t train_size) {
    validate(config);
    TrainRunState run;
    run.seed = seed;
    run.params.assign(model.parameter_count(), 0.0);
    Rng init_rng(derive_seed(seed, 0));
    model.initialize(run.params, init_rng);
    run.optimizer = OptimizerState::zeros(model.parameter_count(), config.optimizer);
    run.early_stopping.patience = config.patience;
    run.early_stopping.min_delta = config.min_delta;
    run.best_params = run.params;
    run.first_selected_epoch.assign(train_size, 0);
    return run;
}

EpochReport run_epoch(TrainRunState& run, const Dataset& train, const Dataset& validation,
                      const Model& model, const SelectorConfig& selector,
                      const TrainingConfig& config, TrainMode mode) {
    if (train.empty()) throw Error(ErrorKind::invalid_argument, "training set is empty");
    if (validation.empty()) throw Error(ErrorKind::invalid_argument, "validation set is empty");
    if (run.first_selected_epoch.size() != train.size()) {
        throw Error(ErrorKind::invalid_argument, "run state does not match the training set size");
    }

    EpochReport report;
    report.epoch = run.epoch + 1;
    report.mode = mode;
    report.train_size = train.size();

    std::vector<double> difficulties;
    std::vector<std::size_t> selected;
    if (mode == TrainMode::spl) {
        const auto predictions = predict_all(model, run.params, train);
        difficulties = difficulty_values(difficulty_batch(predictions, train.labels));
        if (config.force_lambda) {
            AgeState s;
            s.lambda = *config.force_lambda;
            s.epoch = run.age ? run.age->epoch + 1 : 0;
            s.mean_difficulty = mean(difficulties);
            s.prev_mean_difficulty = run.age ? run.age->mean_difficulty : s.mean_difficulty;
            s.selected_ratio = fraction_at_or_below(difficulties, s.lambda);
            run.age = s;
        } else if (!run.age) {
            run.age = init_lambda(difficulties, selector);
        } else {
            auto update = update_lambda(*run.age, difficulties, selector);
            run.age = update.state;
            report.age_update = update.trace;
        }
        report.lambda = run.age->lambda;
        report.mean_difficulty = run.age->mean_difficulty;
        const auto mask = select(std::span<const double>(difficulties), run.age->lambda);
        for (std::size_t i = 0; i < mask.flags.size(); ++i) {
            if (mask.flags[i]) selected.push_back(i);
        }
        if (selected.empty()) {
            throw Error(ErrorKind::internal, "empty selection after the scheduler floor at epoch " +
                                                 std::to_string(report.epoch));
        }
    } else {
        selected.resize(train.size());
        std::iota(selected.begin(), selected.end(), 0);
    }

    report.selected_count = selected.size();
    report.selected_ratio = static_cast<double>(selected.size()) / static_cast<double>(train.size());
    {
        std::string joined;
        for (auto i : selected) {
            joined += train.ids[i];
            joined += '\n';
            if (run.first_selected_epoch[i] == 0) run.first_selected_epoch[i] = report.epoch;
        }
        report.selected_digest = hex64(stable_hash64(joined));
    }

    Rng rng(derive_seed(run.seed, static_cast<std::uint64_t>(report.epoch)));
    rng.shuffle(selected);

    std::vector<double> grad(model.parameter_count());
    std::vector<double> batch_losses;
    std::vector<double> batch_difficulties;
    for (std::size_t start = 0; start < selected.size(); start += config.batch_size) {
        const std::size_t end = std::min(selected.size(), start + config.batch_size);
        const double scale = 1.0 / static_cast<double>(end - start);
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        double diff = 0.0;
        for (std::size_t b = start; b < end; ++b) {
            const auto i = selected[b];
            loss += model.accumulate_gradient(run.params, train.features[i], train.labels[i], scale, grad);
            if (!difficulties.empty()) diff += difficulties[i];
        }
        batch_losses.push_back(loss * scale);
        batch_difficulties.push_back(diff * scale);
        adamw_step(run.optimizer, run.params, grad);
    }
    report.batches = batch_losses.size();
    report.train_loss = mean(batch_losses);
    if (mode == TrainMode::spl) {
        report.objective = spl_objective(batch_losses, batch_difficulties, report.lambda).value;
    }

    report.val_loss = mean_loss(model, run.params, validation);
    report.improved = run.early_stopping.observe(report.epoch, report.val_loss);
    if (report.improved) run.best_params = run.params;

    run.epoch = report.epoch;
    run.history.push_back(report);
    return run.history.back();
}

void continue_training(TrainRunState& run, const Dataset& train, const Dataset& validation,
                       const Model& model, const SelectorConfig& selector,
                       const TrainingConfig& config, TrainMode mode,
                       std::optional<std::size_t> epoch_budget) {
    std::size_t ran = 0;
    while (!run.finished) {
        if (epoch_budget && ran >= *epoch_budget) return;
        run_epoch(run, train, validation, model, selector, config, mode);
        ++ran;
        if (run.early_stopping.should_stop()) {
            run.finished = true;
            run.early_stopped = true;
        } else if (static_cast<std::size_t>(run.epoch) >= config.max_epochs) {
            run.finished = true;
        }
    }
}

TrainRunState train(const Model& model, const Dataset& train, const Dataset& validation,
                    const SelectorConfig& selector, const TrainingConfig& config, TrainMode mode,
                    std::uint64_t seed) {
    if (train.empty() || validation.empty()) {
        throw Error(ErrorKind::data, "training and validation splits must be non-empty");
    }
    validate(selector);
    auto run = start_run(model, seed, config, train.size());
    continue_training(run, train, validation, model, selector, config, mode);
    return run;
}

}  // namespace paced
