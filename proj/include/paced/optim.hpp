#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace paced {

inline constexpr double kProbabilityClamp = 1e-7;

// Binary cross-entropy with p clamped into [1e-7, 1 - 1e-7].
double bce_loss(double p_vul, int label);

struct AdamWConfig {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step_count = 0;
    AdamWConfig config;

    static OptimizerState zeros(std::size_t parameter_count, AdamWConfig config);
};

// One AdamW step with decoupled weight decay applied to the pre-step
// parameters. Updates `state` and `params` in place. Throws naming the first
// non-finite gradient index; nothing is modified in that case.
void adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads);

}  // namespace paced
