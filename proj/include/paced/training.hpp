#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "paced/age_scheduler.hpp"
#include "paced/core.hpp"
#include "paced/models.hpp"
#include "paced/optim.hpp"

namespace paced {

enum class TrainMode { spl, no_spl };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view text);

struct TrainingConfig {
    std::size_t max_epochs = 50;
    std::size_t batch_size = 16;
    std::size_t patience = 5;
    double min_delta = 0.0;
    AdamWConfig optimizer;
    // When set, SPL mode uses this age every epoch instead of the scheduler.
    std::optional<double> force_lambda;
};

void validate(const TrainingConfig& config);

// Featurized split, aligned by index.
struct Dataset {
    std::vector<std::string> ids;
    std::vector<FeatureVector> features;
    std::vector<int> labels;

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
};

Dataset featurize_corpus(const Corpus& corpus, const FeaturizerConfig& config);

std::vector<Prediction> predict_all(const Model& model, std::span<const double> params, const Dataset& data);
std::vector<double> predict_p_vul(const Model& model, std::span<const double> params, const Dataset& data);
double mean_loss(const Model& model, std::span<const double> params, const Dataset& data);

// Validation-loss patience counter. An epoch improves when its loss is below
// best - min_delta.
struct EarlyStopping {
    std::size_t patience = 5;
    double min_delta = 0.0;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::size_t stale_epochs = 0;

    // Returns true when `loss` is a new best.
    bool observe(int epoch, double loss);
    bool should_stop() const { return stale_epochs >= patience; }
};

struct EpochReport {
    int epoch = 0;  // 1-based
    TrainMode mode = TrainMode::spl;
    double lambda = 1.0;
    double selected_ratio = 1.0;
    std::size_t selected_count = 0;
    std::size_t train_size = 0;
    // NaN when no difficulty pass ran (NO-SPL).
    double mean_difficulty = std::numeric_limits<double>::quiet_NaN();
    std::optional<AgeUpdateTrace> age_update;
    std::string selected_digest;
    std::size_t batches = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    // Joint objective over the trained batches; monitoring only.
    double objective = std::numeric_limits<double>::quiet_NaN();
    bool improved = false;
};

struct TrainRunState {
    std::uint64_t seed = 0;
    std::vector<double> params;
    OptimizerState optimizer;
    std::optional<AgeState> age;
    int epoch = 0;  // completed epochs
    EarlyStopping early_stopping;
    std::vector<double> best_params;
    bool finished = false;
    bool early_stopped = false;
    // Per training sample: first epoch (1-based) it was selected, 0 if never.
    std::vector<int> first_selected_epoch;
    std::vector<EpochReport> history;
};

TrainRunState start_run(const Model& model, std::uint64_t seed, const TrainingConfig& config,
                        std::size_t train_size);

// One epoch: difficulty pass, age update, selection, shuffled mini-batch
// AdamW steps, validation loss. NO-SPL skips the first three and trains on
// every sample.
EpochReport run_epoch(TrainRunState& run, const Dataset& train, const Dataset& validation,
                      const Model& model, const SelectorConfig& selector,
                      const TrainingConfig& config, TrainMode mode);

// Runs epochs until early stopping or max_epochs. `epoch_budget` limits how
// many epochs this call may run, leaving the state resumable.
void continue_training(TrainRunState& run, const Dataset& train, const Dataset& validation,
                       const Model& model, const SelectorConfig& selector,
                       const TrainingConfig& config, TrainMode mode,
                       std::optional<std::size_t> epoch_budget = std::nullopt);

TrainRunState train(const Model& model, const Dataset& train, const Dataset& validation,
                    const SelectorConfig& selector, const TrainingConfig& config, TrainMode mode,
                    std::uint64_t seed);

}  // namespace paced
