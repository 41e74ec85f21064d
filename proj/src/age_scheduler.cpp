#include "paced/age_scheduler.hpp"

#include <algorithm>
#include <vector>

namespace paced {

AgeState init_lambda(std::span<const double> difficulties, const SelectorConfig& config) {
    if (difficulties.empty()) throw Error(ErrorKind::invalid_argument, "empty difficulty set");
    validate(config);
    const auto sorted = sorted_copy(difficulties);
    AgeState s;
    s.lambda = nearest_rank_quantile(sorted, config.r_init);
    s.epoch = 0;
    s.selected_ratio = fraction_at_or_below(difficulties, s.lambda);
    s.mean_difficulty = mean(difficulties);
    s.prev_mean_difficulty = s.mean_difficulty;
    return s;
}

double growth_factor(const SelectorConfig& config, double selected_ratio) {
    return config.gamma0 * (1.0 + config.alpha * (1.0 - selected_ratio));
}

StabilityFactor stability_factor(std::span<const double> difficulties, double lambda,
                                 const SelectorConfig& config) {
    if (difficulties.empty()) throw Error(ErrorKind::invalid_argument, "empty difficulty set");
    std::vector<double> window;
    for (double d : difficulties) {
        if (d >= lambda - config.local_window && d <= lambda + config.local_window) window.push_back(d);
    }
    StabilityFactor f;
    f.window_count = window.size();
    if (window.size() >= 2) {
        f.sigma = population_std(window);
    } else {
        f.global_fallback = true;
        f.sigma = population_std(difficulties);
    }
    f.s = 1.0 / (1.0 + config.k * f.sigma);
    return f;
}

double propose_lambda(double lambda, double selected_ratio, double delta_mu, double sigma,
                      const SelectorConfig& config) {
    const double gamma = growth_factor(config, selected_ratio);
    const double s = 1.0 / (1.0 + config.k * sigma);
    return lambda + gamma * (1.0 - selected_ratio) * s + delta_mu;
}

AgeUpdate update_lambda(const AgeState& state, std::span<const double> difficulties,
                        const SelectorConfig& config) {
    if (difficulties.empty()) throw Error(ErrorKind::invalid_argument, "empty difficulty set");
    const auto sorted = sorted_copy(difficulties);

    AgeUpdateTrace t;
    t.r_t = fraction_at_or_below(difficulties, state.lambda);
    t.mu_t = mean(difficulties);
    t.gamma_t = growth_factor(config, t.r_t);
    t.delta_mu = t.mu_t - state.mean_difficulty;
    const auto stab = stability_factor(difficulties, state.lambda, config);
    t.sigma_t = stab.sigma;
    t.s_t = stab.s;

    t.lambda_proposed = state.lambda + t.gamma_t * (1.0 - t.r_t) * t.s_t + t.delta_mu;
    t.r_proposed = fraction_at_or_below(difficulties, t.lambda_proposed);

    double next = t.lambda_proposed;
    if (t.r_proposed - t.r_t > config.r_max) {
        next = nearest_rank_quantile(sorted, std::min(1.0, t.r_t + config.r_max));
        t.capped = true;
    }
    t.lambda_unclamped = next;
    next = std::clamp(next, 0.0, 1.0);

    if (fraction_at_or_below(difficulties, next) == 0.0) {
        next = nearest_rank_quantile(sorted,
                                     std::max(config.r_init, config.effective_min_select_ratio()));
        t.floored = true;
    }
    t.lambda_next = next;

    AgeUpdate out;
    out.trace = t;
    out.state.lambda = next;
    out.state.epoch = state.epoch + 1;
    out.state.selected_ratio = fraction_at_or_below(difficulties, next);
    out.state.mean_difficulty = t.mu_t;
    out.state.prev_mean_difficulty = state.mean_difficulty;
    return out;
}

}  // namespace paced
