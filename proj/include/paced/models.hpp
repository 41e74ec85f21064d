#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paced/core.hpp"

namespace paced {

// Identifier written into feature dumps and checkpoints; bump on any change
// to tokenization or hashing.
inline constexpr std::string_view kFeatureHashAlgorithm = "fnv1a64-splitmix64/signed-bucket/v1";

struct FeaturizerConfig {
    std::size_t dimension = std::size_t{1} << 14;
    std::size_t max_tokens = 512;
    bool unigrams = true;
    bool bigrams = true;
    std::uint64_t hash_seed = 0;
};

void validate(const FeaturizerConfig& config);

// Dense-semantics feature vector stored sparsely: `indices` ascending, no
// explicit zeros.
struct FeatureVector {
    std::size_t dimension = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    double l2_norm = 0.0;

    std::vector<double> dense() const;
    std::size_t nonzeros() const { return indices.size(); }
};

// Identifier runs ([A-Za-z0-9_]+) and single non-space characters; a UTF-8
// multi-byte sequence counts as one character.
std::vector<std::string> tokenize(std::string_view code, std::size_t max_tokens = 512);

// Signed feature hashing over unigrams and/or bigrams, L2-normalized.
FeatureVector featurize(std::string_view code, const FeaturizerConfig& config);

// Writes a JSONL feature dump: a header line with the hash algorithm and
// seed, then one {"id","dimension","nonzeros":[[index,value],...]} per sample.
void write_feature_dump(std::ostream& out, const FeaturizerConfig& config,
                        std::span<const std::string> ids, std::span<const FeatureVector> features);

double sigmoid(double z);

// Probability provider over a flat parameter vector owned by the caller.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t parameter_count() const = 0;

    // Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
    virtual void initialize(std::span<double> params, Rng& rng) const = 0;

    virtual double logit(std::span<const double> params, const FeatureVector& x) const = 0;

    // Adds scale * d(bce)/d(params) into `grad` and returns the sample's loss.
    virtual double accumulate_gradient(std::span<const double> params, const FeatureVector& x,
                                       int label, double scale, std::span<double> grad) const = 0;

    Prediction predict(std::span<const double> params, const FeatureVector& x) const;
    std::vector<double> gradient(std::span<const double> params, const FeatureVector& x,
                                 int label) const;

protected:
    void check_shapes(std::span<const double> params, const FeatureVector& x) const;
};

// p = sigmoid(w.x + b). Layout: [w_0..w_{D-1}, b].
class LinearModel final : public Model {
public:
    explicit LinearModel(std::size_t input_dim) : dim_(input_dim) {}

    std::string kind() const override { return "linear"; }
    std::size_t input_dim() const override { return dim_; }
    std::size_t parameter_count() const override { return dim_ + 1; }
    void initialize(std::span<double> params, Rng& rng) const override;
    double logit(std::span<const double> params, const FeatureVector& x) const override;
    double accumulate_gradient(std::span<const double> params, const FeatureVector& x, int label,
                               double scale, std::span<double> grad) const override;

private:
    std::size_t dim_;
};

// One tanh hidden layer of width H, sigmoid output.
// Layout: [W1 (H x D, row-major), b1 (H), w2 (H), b2].
class MlpModel final : public Model {
public:
    MlpModel(std::size_t input_dim, std::size_t hidden) : dim_(input_dim), hidden_(hidden) {}

    std::string kind() const override { return "mlp"; }
    std::size_t input_dim() const override { return dim_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t parameter_count() const override { return hidden_ * dim_ + 2 * hidden_ + 1; }
    void initialize(std::span<double> params, Rng& rng) const override;
    double logit(std::span<const double> params, const FeatureVector& x) const override;
    double accumulate_gradient(std::span<const double> params, const FeatureVector& x, int label,
                               double scale, std::span<double> grad) const override;

private:
    void hidden_activations(std::span<const double> params, const FeatureVector& x,
                            std::span<double> h) const;

    std::size_t dim_;
    std::size_t hidden_;
};

struct ModelSpec {
    std::string kind = "linear";
    std::size_t hidden = 64;
};

std::unique_ptr<Model> make_model(const ModelSpec& spec, std::size_t input_dim);

}  // namespace paced
