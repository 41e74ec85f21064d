#include <bit>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

#include "paced/models.hpp"

namespace paced {

namespace {

bool is_ident_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(unsigned char lead) {
    if (lead >= 0xF0) return 4;
    if (lead >= 0xE0) return 3;
    if (lead >= 0xC0) return 2;
    return 1;
}

}  // namespace

void validate(const FeaturizerConfig& config) {
    if (config.dimension < 2 || !std::has_single_bit(config.dimension)) {
        throw Error(ErrorKind::config, "featurizer.dimension must be a power of two ≥ 2");
    }
    if (config.dimension > (std::size_t{1} << 31)) {
        throw Error(ErrorKind::config, "featurizer.dimension must be ≤ 2^31");
    }
    if (config.max_tokens < 1) throw Error(ErrorKind::config, "featurizer.max_tokens must be ≥ 1");
    if (!config.unigrams && !config.bigrams) {
        throw Error(ErrorKind::config, "featurizer.ngram_orders must include 1 or 2");
    }
}

std::vector<double> FeatureVector::dense() const {
    std::vector<double> out(dimension, 0.0);
    for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = values[i];
    return out;
}

std::vector<std::string> tokenize(std::string_view code, std::size_t max_tokens) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < code.size() && tokens.size() < max_tokens) {
        const auto c = static_cast<unsigned char>(code[i]);
        if (is_space(c)) {
            ++i;
        } else if (is_ident_char(c)) {
            std::size_t j = i;
            while (j < code.size() && is_ident_char(static_cast<unsigned char>(code[j]))) ++j;
            tokens.emplace_back(code.substr(i, j - i));
            i = j;
        } else {
            std::size_t len = std::min(utf8_length(c), code.size() - i);
            tokens.emplace_back(code.substr(i, len));
            i += len;
        }
    }
    return tokens;
}

FeatureVector featurize(std::string_view code, const FeaturizerConfig& config) {
    validate(config);
    const auto tokens = tokenize(code, config.max_tokens);
    const std::uint64_t mask = config.dimension - 1;
    const int sign_shift = std::countr_zero(config.dimension);

    std::map<std::uint32_t, double> acc;
    auto add = [&](const std::string& key) {
        const std::uint64_t h = stable_hash64(key, config.hash_seed);
        const auto bucket = static_cast<std::uint32_t>(h & mask);
        const double sign = ((h >> sign_shift) & 1U) == 0 ? 1.0 : -1.0;
        acc[bucket] += sign;
    };
    std::string key;
    if (config.unigrams) {
        for (const auto& t : tokens) {
            key.assign("1\x1f").append(t);
            add(key);
        }
    }
    if (config.bigrams) {
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            key.assign("2\x1f").append(tokens[i - 1]).append("\x1f").append(tokens[i]);
            add(key);
        }
    }

    FeatureVector fv;
    fv.dimension = config.dimension;
    double ss = 0.0;
    for (const auto& [idx, v] : acc) {
        if (v == 0.0) continue;
        fv.indices.push_back(idx);
        fv.values.push_back(v);
        ss += v * v;
    }
    if (ss > 0.0) {
        const double norm = std::sqrt(ss);
        for (double& v : fv.values) v /= norm;
        fv.l2_norm = 1.0;
    }
    return fv;
}

void write_feature_dump(std::ostream& out, const FeaturizerConfig& config,
                        std::span<const std::string> ids, std::span<const FeatureVector> features) {
    if (ids.size() != features.size()) {
        throw Error(ErrorKind::invalid_argument, "feature dump: ids and features differ in length");
    }
    nlohmann::json header = {{"format", "paced-feature-dump"},
                             {"version", 1},
                             {"algorithm", kFeatureHashAlgorithm},
                             {"hash_seed", config.hash_seed},
                             {"dimension", config.dimension},
                             {"max_tokens", config.max_tokens}};
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        nlohmann::json pairs = nlohmann::json::array();
        for (std::size_t j = 0; j < features[i].indices.size(); ++j) {
            pairs.push_back({features[i].indices[j], features[i].values[j]});
        }
        nlohmann::json rec = {{"id", ids[i]}, {"dimension", features[i].dimension}, {"nonzeros", pairs}};
        out << rec.dump() << '\n';
    }
}

}  // namespace paced
