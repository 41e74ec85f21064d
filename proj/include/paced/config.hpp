#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "paced/core.hpp"
#include "paced/corpus.hpp"
#include "paced/metrics.hpp"
#include "paced/models.hpp"
#include "paced/training.hpp"

namespace paced {

// Environment variables named PACED_<KEY> override config keys, with '.'
// written as "__" and letters upper-cased: PACED_SELECTOR__R_INIT.
inline constexpr std::string_view kEnvPrefix = "PACED_";

struct RunConfig {
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::spl;
    SelectorConfig selector;
    TrainingConfig training;
    ModelSpec model;
    FeaturizerConfig featurizer;
    EvalConfig eval;
    std::vector<double> tau_grid = default_tau_grid();
    SynthConfig synth;
    std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
};

using KeyValues = std::map<std::string, std::string>;

// Parses "key = value" lines; '#' starts a comment. Duplicate keys are errors.
KeyValues parse_key_values(std::string_view text, const std::string& source_name = "<config>");
KeyValues load_key_values(const std::filesystem::path& path);

// Applies keys onto `config`. Unknown keys and malformed values are errors
// naming the key.
void apply_key_values(RunConfig& config, const KeyValues& values);

// Applies PACED_* environment overrides for every known key.
void apply_environment(RunConfig& config);

void validate(const RunConfig& config);

// Every key with its current value, in canonical formatting (doubles in
// round-trip precision).
KeyValues to_key_values(const RunConfig& config);
std::string to_config_text(const RunConfig& config);

// Digest of the canonical config text.
std::string config_digest(const RunConfig& config);

std::vector<std::string> known_config_keys();

// Loads defaults, then the file (if non-empty path), then the environment.
RunConfig load_run_config(const std::filesystem::path& path);

std::string format_double(double value);
std::vector<double> parse_double_list(std::string_view text, const std::string& key);

struct GridSpec {
    // Axis name (a selector field) to candidate values, in file order.
    std::map<std::string, std::vector<double>> axes;

    static GridSpec standard();
};

struct GridPoint {
    std::vector<std::pair<std::string, double>> values;  // axis order
};

GridSpec parse_grid_spec(const KeyValues& values);
GridSpec load_grid_spec(const std::filesystem::path& path);
void validate(const GridSpec& grid);

// Cartesian product, axes in name order, last axis varying fastest.
std::vector<GridPoint> enumerate(const GridSpec& grid);

void apply_grid_point(SelectorConfig& selector, const GridPoint& point);

}  // namespace paced
