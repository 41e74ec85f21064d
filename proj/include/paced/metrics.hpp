#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paced/core.hpp"

namespace paced {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct MetricReport {
    ConfusionCounts counts;
    double threshold = 0.5;
    double acc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
};

struct EvalConfig {
    double threshold = 0.5;
    std::vector<std::size_t> top_n_values{250, 500, 1000};
};

void validate(const EvalConfig& config);

// Positive iff p_vul >= threshold.
ConfusionCounts confusion(std::span<const double> p_vul, std::span<const int> labels, double threshold);

// Zero-denominator conventions: P = 0 when tp+fp = 0, R = 0 when tp+fn = 0,
// F1 = 0 when P+R = 0, MCC = 0 when any factor under the root is 0.
MetricReport metrics(const ConfusionCounts& counts, double threshold = 0.5);

struct TopNResult {
    std::size_t n = 0;
    double f1 = 0.0;
    double precision_at_n = 0.0;
    double recall_at_n = 0.0;
    ConfusionCounts counts;
};

// Ranks by p_vul descending (ties by id ascending), forces the top n positive
// and the rest negative, and scores the whole set.
TopNResult top_n(std::span<const double> p_vul, std::span<const int> labels,
                 std::span<const std::string> ids, std::size_t n);

double top_n_f1(std::span<const double> p_vul, std::span<const int> labels,
                std::span<const std::string> ids, std::size_t n);

std::vector<MetricReport> threshold_sweep(std::span<const double> p_vul, std::span<const int> labels,
                                          std::span<const double> grid);

// 0.1, 0.2, ..., 0.9.
std::vector<double> default_tau_grid();

enum class HistogramFilter { all, positives_only };

struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
};

// Equal-width bins over [0,1]; 1.0 falls in the last bin.
Histogram difficulty_histogram(std::span<const DifficultyRecord> records, std::size_t bins,
                               HistogramFilter filter = HistogramFilter::all);

}  // namespace paced
