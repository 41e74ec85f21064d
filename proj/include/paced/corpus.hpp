#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "paced/core.hpp"

namespace paced {

// Pattern families planted by the generator.
enum class TemplateFamily { array_index = 0, null_deref = 1, alloc_overflow = 2 };

inline constexpr std::size_t kTemplateFamilies = 3;

std::string_view category_of(TemplateFamily family);

struct SynthConfig {
    std::size_t n_samples = 1000;
    double positive_ratio = 0.3;
    double label_noise_rate = 0.0;
    double unrelated_noise_rate = 0.0;
    std::uint64_t seed = 0;
    std::array<double, kTemplateFamilies> template_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};
};

void validate(const SynthConfig& config);

// Ground truth for one generated sample, written to the sidecar file.
struct CleanLabel {
    std::string id;
    int clean_label = 0;
    int label = 0;
    bool flipped = false;
    bool unrelated = false;

    bool mislabeled() const { return clean_label != label; }
};

struct SyntheticCorpus {
    Corpus samples;
    std::vector<CleanLabel> clean;
};

// Templates first (exactly round(n * positive_ratio) vulnerable), then
// round(rho * n) labels flipped, then round(rate * #label-1) label-1 samples
// get a guard-complete body while keeping label 1.
SyntheticCorpus generate(const SynthConfig& config);

struct CorpusSplits {
    Corpus train;
    Corpus validation;
    Corpus test;
};

// Stratified by label: each class is shuffled and divided by largest
// remainder, then each split is shuffled.
CorpusSplits split(const Corpus& corpus, std::array<double, 3> ratios, std::uint64_t seed);

Corpus parse_jsonl(std::istream& in, const std::string& source_name);
Corpus load_jsonl(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, const Corpus& corpus);
void save_jsonl(const std::filesystem::path& path, const Corpus& corpus);

std::vector<CleanLabel> load_clean_labels(const std::filesystem::path& path);
void save_clean_labels(const std::filesystem::path& path, const std::vector<CleanLabel>& labels);

}  // namespace paced
