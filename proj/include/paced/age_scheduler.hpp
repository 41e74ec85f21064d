#pragma once

#include <span>

#include "paced/core.hpp"

namespace paced {

// Per-update diagnostics, one per epoch after the first.
struct AgeUpdateTrace {
    double r_t = 0.0;
    double mu_t = 0.0;
    double gamma_t = 0.0;
    double sigma_t = 0.0;
    double s_t = 1.0;
    double delta_mu = 0.0;
    double lambda_proposed = 0.0;
    double r_proposed = 0.0;
    bool capped = false;
    bool floored = false;
    // Value after the cap, before clamping to [0,1].
    double lambda_unclamped = 0.0;
    double lambda_next = 0.0;
};

struct StabilityFactor {
    double sigma = 0.0;
    double s = 1.0;
    std::size_t window_count = 0;
    bool global_fallback = false;
};

// Age at epoch 0: the r_init nearest-rank quantile of the difficulties.
AgeState init_lambda(std::span<const double> difficulties, const SelectorConfig& config);

// gamma0 * (1 + alpha * (1 - r)).
double growth_factor(const SelectorConfig& config, double selected_ratio);

// 1 / (1 + k * sigma), sigma being the population std of the difficulties
// within local_window of lambda (all difficulties if fewer than two fall in
// the window).
StabilityFactor stability_factor(std::span<const double> difficulties, double lambda,
                                 const SelectorConfig& config);

// lambda + gamma * (1 - r) * s + delta_mu, before any cap or clamp.
double propose_lambda(double lambda, double selected_ratio, double delta_mu, double sigma,
                      const SelectorConfig& config);

struct AgeUpdate {
    AgeState state;
    AgeUpdateTrace trace;
};

// One step of the age update. `difficulties` is the current epoch's set; r_t
// and mu_t are recomputed from it, mu_{t-1} comes from `state`.
AgeUpdate update_lambda(const AgeState& state, std::span<const double> difficulties,
                        const SelectorConfig& config);

}  // namespace paced
