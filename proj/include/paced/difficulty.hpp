#pragma once

#include <span>
#include <string>
#include <vector>

#include "paced/core.hpp"

namespace paced {

// |p_safe - p_vul|. Throws if the pair is not a valid distribution.
double confidence(double p_safe, double p_vul);

// Curriculum difficulty of one prediction against its label: (1 - conf)/2
// when the prediction is correct, (1 + conf)/2 otherwise.
DifficultyRecord difficulty(const Prediction& prediction, int label, std::string sample_id = {});

std::vector<DifficultyRecord> difficulty_batch(std::span<const Prediction> predictions,
                                               std::span<const int> labels);

std::vector<double> difficulty_values(std::span<const DifficultyRecord> records);

}  // namespace paced
