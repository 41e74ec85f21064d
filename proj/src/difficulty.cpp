#include "paced/difficulty.hpp"

#include <cmath>

namespace paced {

double confidence(double p_safe, double p_vul) {
    Prediction p;
    p.p_safe = p_safe;
    p.p_vul = p_vul;
    validate(p);
    return std::abs(p_safe - p_vul);
}

DifficultyRecord difficulty(const Prediction& prediction, int label, std::string sample_id) {
    validate(prediction);
    if (label != 0 && label != 1) throw Error(ErrorKind::invalid_argument, "label must be 0 or 1");
    DifficultyRecord rec;
    rec.sample_id = std::move(sample_id);
    rec.label = label;
    rec.conf = std::abs(prediction.p_safe - prediction.p_vul);
    rec.correct = prediction.predicted_label == label;
    rec.difficulty = rec.correct ? (1.0 - rec.conf) / 2.0 : (1.0 + rec.conf) / 2.0;
    return rec;
}

std::vector<DifficultyRecord> difficulty_batch(std::span<const Prediction> predictions,
                                               std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorKind::invalid_argument, "predictions and labels differ in length");
    }
    std::vector<DifficultyRecord> out;
    out.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        out.push_back(difficulty(predictions[i], labels[i]));
    }
    return out;
}

std::vector<double> difficulty_values(std::span<const DifficultyRecord> records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.difficulty);
    return out;
}

}  // namespace paced
