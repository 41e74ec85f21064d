#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paced {

// Error categories double as the CLI's machine-readable failure classes.
enum class ErrorKind { invalid_argument, config, io, data, internal };

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// One labeled source-code unit. label 1 = vulnerable.
struct Sample {
    std::string id;
    std::string code;
    int label = 0;
    std::optional<std::string> category;
    std::optional<std::string> project;
};

using Corpus = std::vector<Sample>;

struct Prediction {
    double p_vul = 0.5;
    double p_safe = 0.5;
    int predicted_label = 1;

    // Builds a prediction from the vulnerable-class probability. Ties go to
    // the vulnerable class.
    static Prediction from_p_vul(double p_vul);
};

// Throws if the probabilities are out of range or do not sum to one.
void validate(const Prediction& prediction);

struct DifficultyRecord {
    std::string sample_id;
    double conf = 0.0;
    double difficulty = 0.5;
    bool correct = true;
    int label = 0;
};

struct AgeState {
    double lambda = 0.0;
    int epoch = 0;
    double selected_ratio = 0.0;
    double mean_difficulty = 0.0;
    double prev_mean_difficulty = 0.0;
};

struct SelectorConfig {
    double r_init = 0.1;
    double k = 10.0;
    double gamma0 = 0.025;
    double alpha = 0.3;
    double r_max = 0.1;
    double local_window = 0.05;
    // Unset means "same as r_init".
    std::optional<double> min_select_ratio;

    double effective_min_select_ratio() const { return min_select_ratio.value_or(r_init); }
};

// Throws Error(config) naming the first out-of-range field.
void validate(const SelectorConfig& config);

struct SelectionMask {
    std::vector<std::uint8_t> flags;
    std::size_t selected_count = 0;
};

// Nearest-rank (lower) quantile: element at index ceil(q*N) - 1 of an
// ascending sequence. The product q*N is snapped to the nearest integer when
// it lies within 1e-9 of one, so r + r_max sums like 0.1 + 0.2 do not skip
// a rank.
double nearest_rank_quantile(std::span<const double> sorted_values, double q);

// Population standard deviation (n denominator).
double population_std(std::span<const double> values);

double mean(std::span<const double> values);

// Fraction of values <= threshold.
double fraction_at_or_below(std::span<const double> values, double threshold);

std::vector<double> sorted_copy(std::span<const double> values);

// Seeded generator. The engine is mt19937_64, whose output sequence is fixed
// by the standard; the draws below avoid <random> distributions because their
// algorithms vary between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound), bound > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for a named sub-stream of a run (e.g. one per epoch).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// FNV-1a over bytes followed by the SplitMix64 finalizer. Byte-oriented, so
// results do not depend on host endianness.
std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed = 0);

std::string hex64(std::uint64_t value);

}  // namespace paced
