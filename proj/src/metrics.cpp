#include "paced/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace paced {

void validate(const EvalConfig& config) {
    if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
        throw Error(ErrorKind::config, "eval.threshold must be in [0,1]");
    }
    for (auto n : config.top_n_values) {
        if (n == 0) throw Error(ErrorKind::config, "eval.top_n values must be positive");
    }
}

ConfusionCounts confusion(std::span<const double> p_vul, std::span<const int> labels, double threshold) {
    if (p_vul.size() != labels.size()) {
        throw Error(ErrorKind::invalid_argument, "predictions and labels differ in length");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < p_vul.size(); ++i) {
        const bool pos = p_vul[i] >= threshold;
        if (labels[i] == 1) {
            (pos ? c.tp : c.fn) += 1;
        } else {
            (pos ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

MetricReport metrics(const ConfusionCounts& c, double threshold) {
    if (c.total() == 0) throw Error(ErrorKind::invalid_argument, "metrics need at least one sample");
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn);
    const auto fn = static_cast<double>(c.fn);
    MetricReport r;
    r.counts = c;
    r.threshold = threshold;
    r.acc = (tp + tn) / (tp + tn + fp + fn);
    r.precision = (c.tp + c.fp) == 0 ? 0.0 : tp / (tp + fp);
    r.recall = (c.tp + c.fn) == 0 ? 0.0 : tp / (tp + fn);
    r.f1 = (r.precision + r.recall) == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    const double d1 = tp + fp, d2 = tp + fn, d3 = tn + fp, d4 = tn + fn;
    if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) {
        r.mcc = 0.0;
    } else {
        r.mcc = (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
        r.mcc = std::clamp(r.mcc, -1.0, 1.0);
    }
    return r;
}

TopNResult top_n(std::span<const double> p_vul, std::span<const int> labels,
                 std::span<const std::string> ids, std::size_t n) {
    if (p_vul.size() != labels.size() || p_vul.size() != ids.size()) {
        throw Error(ErrorKind::invalid_argument, "predictions, labels and ids differ in length");
    }
    if (n == 0 || n > p_vul.size()) {
        throw Error(ErrorKind::invalid_argument, "top-n requires 1 ≤ n ≤ sample count (n=" +
                                                     std::to_string(n) + ", count=" +
                                                     std::to_string(p_vul.size()) + ")");
    }
    std::vector<std::size_t> order(p_vul.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (p_vul[a] != p_vul[b]) return p_vul[a] > p_vul[b];
        return ids[a] < ids[b];
    });
    TopNResult out;
    out.n = n;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const bool pos = rank < n;
        if (labels[order[rank]] == 1) {
            (pos ? out.counts.tp : out.counts.fn) += 1;
        } else {
            (pos ? out.counts.fp : out.counts.tn) += 1;
        }
    }
    const auto m = metrics(out.counts);
    out.f1 = m.f1;
    out.precision_at_n = m.precision;
    out.recall_at_n = m.recall;
    return out;
}

double top_n_f1(std::span<const double> p_vul, std::span<const int> labels,
                std::span<const std::string> ids, std::size_t n) {
    return top_n(p_vul, labels, ids, n).f1;
}

std::vector<MetricReport> threshold_sweep(std::span<const double> p_vul, std::span<const int> labels,
                                          std::span<const double> grid) {
    std::vector<MetricReport> out;
    out.reserve(grid.size());
    for (double tau : grid) {
        if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::invalid_argument, "threshold grid values must lie in [0,1]");
        out.push_back(metrics(confusion(p_vul, labels, tau), tau));
    }
    return out;
}

std::vector<double> default_tau_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
    return grid;
}

Histogram difficulty_histogram(std::span<const DifficultyRecord> records, std::size_t bins,
                               HistogramFilter filter) {
    if (bins == 0) throw Error(ErrorKind::invalid_argument, "histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    for (std::size_t i = 0; i <= bins; ++i) h.bin_edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
    for (const auto& r : records) {
        if (filter == HistogramFilter::positives_only && r.label != 1) continue;
        auto bin = static_cast<std::size_t>(std::floor(r.difficulty * static_cast<double>(bins)));
        h.counts[std::min(bin, bins - 1)] += 1;
    }
    return h;
}

}  // namespace paced
