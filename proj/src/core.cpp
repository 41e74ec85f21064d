#include "paced/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace paced {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
        case ErrorKind::data: return "data";
        case ErrorKind::internal: return "internal";
    }
    return "internal";
}

Prediction Prediction::from_p_vul(double p_vul) {
    Prediction p;
    p.p_vul = p_vul;
    p.p_safe = 1.0 - p_vul;
    p.predicted_label = p.p_vul >= p.p_safe ? 1 : 0;
    return p;
}

void validate(const Prediction& prediction) {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(prediction.p_vul) || !in_unit(prediction.p_safe)) {
        throw Error(ErrorKind::invalid_argument, "prediction probabilities must lie in [0,1]");
    }
    if (std::abs(prediction.p_vul + prediction.p_safe - 1.0) > 1e-9) {
        throw Error(ErrorKind::invalid_argument, "prediction probabilities must sum to 1");
    }
}

void validate(const SelectorConfig& c) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
    // r_init = 1 is accepted so a run can start from the full set.
    if (!(c.r_init > 0.0 && c.r_init <= 1.0)) fail("r_init must be in (0,1]");
    if (!(c.k >= 0.0) || !std::isfinite(c.k)) fail("k must be ≥ 0");
    if (!(c.gamma0 > 0.0) || !std::isfinite(c.gamma0)) fail("gamma0 must be > 0");
    if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) fail("alpha must be ≥ 0");
    if (!(c.r_max > 0.0 && c.r_max <= 1.0)) fail("r_max must be in (0,1]");
    if (!(c.local_window >= 0.0) || !std::isfinite(c.local_window)) fail("local_window must be ≥ 0");
    if (c.min_select_ratio && !(*c.min_select_ratio > 0.0 && *c.min_select_ratio <= 1.0)) {
        fail("min_select_ratio must be in (0,1]");
    }
}

double nearest_rank_quantile(std::span<const double> sorted_values, double q) {
    if (sorted_values.empty()) throw Error(ErrorKind::invalid_argument, "empty difficulty set");
    if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorKind::invalid_argument, "quantile q must be in (0,1]");
    const double n = static_cast<double>(sorted_values.size());
    double rank = q * n;
    const double nearest = std::round(rank);
    if (std::abs(rank - nearest) < 1e-9) rank = nearest;
    auto index = static_cast<std::size_t>(std::ceil(rank));
    index = std::clamp<std::size_t>(index, 1, sorted_values.size());
    return sorted_values[index - 1];
}

double mean(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::invalid_argument, "mean of empty sequence");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::invalid_argument, "std of empty sequence");
    if (values.size() == 1) return 0.0;
    const double mu = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

double fraction_at_or_below(std::span<const double> values, double threshold) {
    if (values.empty()) return 0.0;
    const auto count = std::count_if(values.begin(), values.end(),
                                     [threshold](double v) { return v <= threshold; });
    return static_cast<double>(count) / static_cast<double>(values.size());
}

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    std::sort(out.begin(), out.end());
    return out;
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw Error(ErrorKind::invalid_argument, "Rng::below requires bound > 0");
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x5851f42d4c957f2dULL));
}

std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace paced
