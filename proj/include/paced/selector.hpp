#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paced/core.hpp"

namespace paced {

// flag_i = 1 iff difficulty_i <= lambda.
SelectionMask select(std::span<const DifficultyRecord> records, double lambda);
SelectionMask select(std::span<const double> difficulties, double lambda);

struct SplObjective {
    double value = 0.0;
    std::vector<std::uint8_t> mask;
};

// sum_j v_j * L_j - lambda * sum_j v_j with v_j = [d_j <= lambda].
SplObjective spl_objective(std::span<const double> batch_losses,
                           std::span<const double> batch_difficulties, double lambda);

// Mean of a batch's per-sample difficulties.
double batch_difficulty(std::span<const double> sample_difficulties);

}  // namespace paced
