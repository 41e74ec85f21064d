#include <algorithm>
#include <cmath>

#include "paced/models.hpp"
#include "paced/optim.hpp"

namespace paced {

namespace {

constexpr double kProbFloor = 0x1.0p-53;

double sparse_dot(std::span<const double> w, const FeatureVector& x) {
    double z = 0.0;
    for (std::size_t i = 0; i < x.indices.size(); ++i) z += w[x.indices[i]] * x.values[i];
    return z;
}

void fill_uniform(std::span<double> out, double bound, Rng& rng) {
    for (double& v : out) v = rng.uniform(-bound, bound);
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void Model::check_shapes(std::span<const double> params, const FeatureVector& x) const {
    if (x.dimension != input_dim()) {
        throw Error(ErrorKind::data, "feature dimension " + std::to_string(x.dimension) +
                                         " does not match model input dimension " +
                                         std::to_string(input_dim()));
    }
    if (params.size() != parameter_count()) {
        throw Error(ErrorKind::data, "parameter vector has " + std::to_string(params.size()) +
                                         " entries, model expects " + std::to_string(parameter_count()));
    }
}

Prediction Model::predict(std::span<const double> params, const FeatureVector& x) const {
    const double p = std::clamp(sigmoid(logit(params, x)), kProbFloor, 1.0 - kProbFloor);
    return Prediction::from_p_vul(p);
}

std::vector<double> Model::gradient(std::span<const double> params, const FeatureVector& x,
                                    int label) const {
    std::vector<double> g(parameter_count(), 0.0);
    accumulate_gradient(params, x, label, 1.0, g);
    return g;
}

void LinearModel::initialize(std::span<double> params, Rng& rng) const {
    fill_uniform(params.first(dim_), 1.0 / std::sqrt(static_cast<double>(dim_)), rng);
    params[dim_] = 0.0;
}

double LinearModel::logit(std::span<const double> params, const FeatureVector& x) const {
    check_shapes(params, x);
    return sparse_dot(params, x) + params[dim_];
}

double LinearModel::accumulate_gradient(std::span<const double> params, const FeatureVector& x,
                                        int label, double scale, std::span<double> grad) const {
    const double p = sigmoid(logit(params, x));
    const double delta = (p - static_cast<double>(label)) * scale;
    for (std::size_t i = 0; i < x.indices.size(); ++i) grad[x.indices[i]] += delta * x.values[i];
    grad[dim_] += delta;
    return bce_loss(p, label);
}

void MlpModel::initialize(std::span<double> params, Rng& rng) const {
    const std::size_t w1 = hidden_ * dim_;
    fill_uniform(params.first(w1), 1.0 / std::sqrt(static_cast<double>(dim_)), rng);
    std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(w1), hidden_, 0.0);
    fill_uniform(params.subspan(w1 + hidden_, hidden_), 1.0 / std::sqrt(static_cast<double>(hidden_)), rng);
    params[w1 + 2 * hidden_] = 0.0;
}

void MlpModel::hidden_activations(std::span<const double> params, const FeatureVector& x,
                                  std::span<double> h) const {
    const std::size_t b1 = hidden_ * dim_;
    for (std::size_t j = 0; j < hidden_; ++j) {
        h[j] = std::tanh(sparse_dot(params.subspan(j * dim_, dim_), x) + params[b1 + j]);
    }
}

double MlpModel::logit(std::span<const double> params, const FeatureVector& x) const {
    check_shapes(params, x);
    std::vector<double> h(hidden_);
    hidden_activations(params, x, h);
    const std::size_t w2 = hidden_ * dim_ + hidden_;
    double z = params[w2 + hidden_];
    for (std::size_t j = 0; j < hidden_; ++j) z += params[w2 + j] * h[j];
    return z;
}

double MlpModel::accumulate_gradient(std::span<const double> params, const FeatureVector& x,
                                     int label, double scale, std::span<double> grad) const {
    check_shapes(params, x);
    std::vector<double> h(hidden_);
    hidden_activations(params, x, h);
    const std::size_t b1 = hidden_ * dim_;
    const std::size_t w2 = b1 + hidden_;
    const std::size_t b2 = w2 + hidden_;
    double z = params[b2];
    for (std::size_t j = 0; j < hidden_; ++j) z += params[w2 + j] * h[j];
    const double p = sigmoid(z);
    const double delta = (p - static_cast<double>(label)) * scale;

    grad[b2] += delta;
    for (std::size_t j = 0; j < hidden_; ++j) {
        grad[w2 + j] += delta * h[j];
        const double dh = delta * params[w2 + j] * (1.0 - h[j] * h[j]);
        grad[b1 + j] += dh;
        double* row = grad.data() + j * dim_;
        for (std::size_t i = 0; i < x.indices.size(); ++i) row[x.indices[i]] += dh * x.values[i];
    }
    return bce_loss(p, label);
}

std::unique_ptr<Model> make_model(const ModelSpec& spec, std::size_t input_dim) {
    if (spec.kind == "linear") return std::make_unique<LinearModel>(input_dim);
    if (spec.kind == "mlp") {
        if (spec.hidden < 1) throw Error(ErrorKind::config, "model.hidden must be ≥ 1");
        return std::make_unique<MlpModel>(input_dim, spec.hidden);
    }
    throw Error(ErrorKind::config, "model.kind must be 'linear' or 'mlp', got '" + spec.kind + "'");
}

}  // namespace paced
