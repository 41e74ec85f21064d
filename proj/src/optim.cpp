#include "paced/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "paced/core.hpp"

namespace paced {

double bce_loss(double p_vul, int label) {
    const double p = std::clamp(p_vul, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return label == 1 ? -std::log(p) : -std::log1p(-p);
}

OptimizerState OptimizerState::zeros(std::size_t parameter_count, AdamWConfig config) {
    OptimizerState s;
    s.m.assign(parameter_count, 0.0);
    s.v.assign(parameter_count, 0.0);
    s.config = config;
    return s;
}

void adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != state.m.size() ||
        params.size() != state.v.size()) {
        throw Error(ErrorKind::invalid_argument, "adamw_step: parameter, gradient and moment sizes differ");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw Error(ErrorKind::data, "non-finite gradient at parameter index " + std::to_string(i));
        }
    }
    const auto& c = state.config;
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(c.beta1, t);
    const double bias2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        const double m_hat = state.m[i] / bias1;
        const double v_hat = state.v[i] / bias2;
        params[i] -= c.learning_rate * (m_hat / (std::sqrt(v_hat) + c.epsilon) + c.weight_decay * params[i]);
    }
}

}  // namespace paced
