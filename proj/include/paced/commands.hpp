#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paced/checkpoint.hpp"
#include "paced/config.hpp"
#include "paced/metrics.hpp"
#include "paced/training.hpp"

namespace paced {

namespace fs = std::filesystem;

// Corpus directory layout.
inline constexpr std::string_view kCorpusFile = "corpus.jsonl";
inline constexpr std::string_view kTrainFile = "train.jsonl";
inline constexpr std::string_view kValidFile = "valid.jsonl";
inline constexpr std::string_view kTestFile = "test.jsonl";
inline constexpr std::string_view kCleanLabelsFile = "clean_labels.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kCheckpointFile = "checkpoint.json";

std::string file_digest(const fs::path& path);

// ---- gen-synthetic / split ------------------------------------------------

struct GenResult {
    std::string manifest_digest;
    std::size_t samples = 0;
    std::size_t mislabeled = 0;
};

// Writes corpus.jsonl, the clean-label sidecar, train/valid/test splits and a
// manifest into `out_dir`.
GenResult cmd_gen_synthetic(const RunConfig& config, const fs::path& out_dir);

// Splits an external corpus.jsonl (in `corpus_dir`) into train/valid/test.
std::string cmd_split(const RunConfig& config, const fs::path& corpus_dir);

struct LoadedSplits {
    Corpus train;
    Corpus validation;
    Corpus test;
    std::string digest;
};

LoadedSplits load_splits(const fs::path& corpus_dir);

struct PreparedData {
    Dataset train;
    Dataset validation;
    Dataset test;
    std::string digest;
};

PreparedData prepare(const LoadedSplits& splits, const FeaturizerConfig& featurizer);

// ---- evaluation -----------------------------------------------------------

struct EvaluationSummary {
    MetricReport report;
    std::vector<TopNResult> top_n;
    // Requested N larger than the evaluated set.
    std::vector<std::size_t> top_n_skipped;
    std::vector<MetricReport> sweep;
};

EvaluationSummary evaluate_predictions(std::span<const double> p_vul, std::span<const int> labels,
                                       std::span<const std::string> ids, const EvalConfig& eval,
                                       std::span<const double> tau_grid);

EvaluationSummary evaluate_model(const Model& model, std::span<const double> params, const Dataset& data,
                                 const EvalConfig& eval, std::span<const double> tau_grid);

nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const EvaluationSummary& summary);

// CSV with header threshold,acc,precision,recall,f1,mcc.
std::string sweep_csv(std::span<const MetricReport> sweep);
std::string trace_csv(std::span<const EpochReport> history);

// ---- train ----------------------------------------------------------------

struct TrainOptions {
    std::optional<fs::path> resume;
    // Stop (leaving a resumable checkpoint) after this many epochs in this call.
    std::optional<std::size_t> stop_after_epochs;
};

struct TrainOutcome {
    Checkpoint checkpoint;
    bool completed = false;
    std::optional<EvaluationSummary> test;
};

std::string train_manifest_digest(const RunConfig& config, const std::string& corpus_digest);

// Writes checkpoint.json every epoch; on completion also trace.csv,
// report.json and manifest.json.
TrainOutcome cmd_train(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out_dir,
                       const TrainOptions& options = {});

struct RunResult {
    TrainRunState state;
    EvaluationSummary test;
    MetricReport validation;
};

// One full in-memory training run with the test-set evaluation of its best
// parameters.
RunResult run_once(const RunConfig& config, const PreparedData& data);

// ---- evaluate -------------------------------------------------------------

struct EvaluateOutcome {
    EvaluationSummary summary;
    std::string manifest_digest;
};

// `corpus` may be a JSONL file or a corpus directory (its test split).
EvaluateOutcome cmd_evaluate(const fs::path& checkpoint, const fs::path& corpus, const fs::path& out_dir,
                             std::optional<std::vector<double>> tau_grid = std::nullopt);

// ---- ablation -------------------------------------------------------------

struct AblationSeedResult {
    std::uint64_t seed = 0;
    RunResult spl;
    RunResult no_spl;
    double delta_f1 = 0.0;
    // Aligned with the evaluated top-n values.
    std::vector<double> delta_top_n;
};

struct AblationReport {
    std::vector<AblationSeedResult> seeds;
    std::vector<std::size_t> top_n_values;
    double median_delta_f1 = 0.0;
    double mean_delta_f1 = 0.0;
    std::vector<double> median_delta_top_n;
};

std::vector<std::uint64_t> default_ablation_seeds();

AblationReport run_ablation(const RunConfig& config, const PreparedData& data,
                            const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

nlohmann::json to_json(const AblationReport& report);

AblationReport cmd_ablation(const RunConfig& config, const fs::path& corpus_dir,
                            const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                            std::size_t jobs = 1);

// ---- grid search ----------------------------------------------------------

struct GridResult {
    std::vector<GridPoint> points;
    std::vector<double> validation_f1;
    std::vector<double> test_f1;
    std::size_t best = 0;
};

// Argmax of validation F1. Ties go to the lexicographically smallest value
// tuple (axes in name order), then to the earliest point.
GridResult run_grid_search(const GridSpec& grid, const RunConfig& config, const PreparedData& data,
                           std::size_t jobs = 1);

GridResult cmd_grid_search(const GridSpec& grid, const RunConfig& config, const fs::path& corpus_dir,
                           const fs::path& out_dir, std::size_t jobs = 1);

// ---- inspect-difficulty ---------------------------------------------------

struct Enrichment {
    std::size_t decile_size = 0;
    std::size_t mislabeled_in_decile = 0;
    std::size_t mislabeled_total = 0;
    std::size_t total = 0;
    double factor = 0.0;
};

// Fraction of mislabeled samples in the hardest decile over their base rate.
// Samples are ranked by difficulty descending, ties by id.
Enrichment hard_decile_enrichment(std::span<const DifficultyRecord> records,
                                  const std::vector<CleanLabel>& clean);

struct InspectResult {
    Histogram histogram;
    std::vector<DifficultyRecord> hardest;
    std::optional<double> final_lambda;
    std::optional<Enrichment> enrichment;
    std::size_t samples = 0;
};

InspectResult inspect_difficulty(const Model& model, std::span<const double> params, const Dataset& data,
                                 HistogramFilter filter, std::size_t bins, std::size_t top_k,
                                 const std::vector<CleanLabel>* clean);

// `corpus` may be a JSONL file or a corpus directory (its train split, plus
// the clean-label sidecar when present).
InspectResult cmd_inspect_difficulty(const fs::path& checkpoint, const fs::path& corpus, const fs::path& out_dir,
                                     HistogramFilter filter, std::size_t bins = 10,
                                     std::optional<FeaturizerConfig> expected_featurizer = std::nullopt);

}  // namespace paced
