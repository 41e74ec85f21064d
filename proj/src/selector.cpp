#include "paced/selector.hpp"

namespace paced {

SelectionMask select(std::span<const double> difficulties, double lambda) {
    SelectionMask mask;
    mask.flags.reserve(difficulties.size());
    for (double d : difficulties) {
        const bool keep = d <= lambda;
        mask.flags.push_back(keep ? 1 : 0);
        mask.selected_count += keep ? 1 : 0;
    }
    return mask;
}

SelectionMask select(std::span<const DifficultyRecord> records, double lambda) {
    SelectionMask mask;
    mask.flags.reserve(records.size());
    for (const auto& r : records) {
        const bool keep = r.difficulty <= lambda;
        mask.flags.push_back(keep ? 1 : 0);
        mask.selected_count += keep ? 1 : 0;
    }
    return mask;
}

SplObjective spl_objective(std::span<const double> batch_losses,
                           std::span<const double> batch_difficulties, double lambda) {
    if (batch_losses.size() != batch_difficulties.size()) {
        throw Error(ErrorKind::invalid_argument, "batch losses and difficulties differ in length");
    }
    SplObjective out;
    out.mask = select(batch_difficulties, lambda).flags;
    double loss_sum = 0.0;
    double selected = 0.0;
    for (std::size_t j = 0; j < batch_losses.size(); ++j) {
        if (!out.mask[j]) continue;
        loss_sum += batch_losses[j];
        selected += 1.0;
    }
    out.value = loss_sum - lambda * selected;
    return out;
}

double batch_difficulty(std::span<const double> sample_difficulties) {
    if (sample_difficulties.empty()) throw Error(ErrorKind::invalid_argument, "empty batch");
    return mean(sample_difficulties);
}

}  // namespace paced
