#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "paced/models.hpp"
#include "paced/optim.hpp"

using namespace paced;

namespace {

FeatureVector random_features(Rng& rng, std::size_t dim) {
    FeatureVector x;
    x.dimension = dim;
    double ss = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        if (rng.below(3) != 0) continue;
        x.indices.push_back(static_cast<std::uint32_t>(i));
        x.values.push_back(rng.uniform(-1, 1));
        ss += x.values.back() * x.values.back();
    }
    if (ss > 0) {
        for (auto& v : x.values) v /= std::sqrt(ss);
        x.l2_norm = 1.0;
    }
    return x;
}

double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void gradient_check(const Model& model, std::uint64_t seed) {
    Rng rng(seed);
    for (int point = 0; point < 100; ++point) {
        std::vector<double> params(model.parameter_count());
        for (auto& p : params) p = rng.uniform(-1, 1);
        const auto x = random_features(rng, model.input_dim());
        const int y = static_cast<int>(rng.below(2));
        const auto analytic = model.gradient(params, x, y);
        const auto numeric = oracle::finite_difference(
            [&](const std::vector<double>& p) { return oracle::bce(model.predict(p, x).p_vul, y); }, params, 1e-5);
        std::vector<double> diff(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            diff[i] = analytic[i] - numeric[i];
            CHECK(std::abs(diff[i]) <= 1e-4 * std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-4}));
        }
        CHECK(norm(diff) <= 1e-4 * std::max({norm(analytic), norm(numeric), 1e-12}));
    }
}

}  // namespace

TEST_CASE("tokenizer") {
    CHECK(tokenize("int a_1 = b[2];") == std::vector<std::string>{"int", "a_1", "=", "b", "[", "2", "]", ";"});
    CHECK(tokenize("x -> y", 2) == std::vector<std::string>{"x", "-"});
    CHECK(tokenize("") .empty());
    CHECK(tokenize("a\xc3\xa9z") == std::vector<std::string>{"a", "\xc3\xa9", "z"});
}

TEST_CASE("featurizer") {
    FeaturizerConfig c;
    c.dimension = 64;
    const auto a = featurize("if (ptr == NULL) return -1;", c);
    const auto b = featurize("if (ptr == NULL) return -1;", c);
    CHECK(a.indices == b.indices);
    CHECK(a.values == b.values);
    CHECK(a.l2_norm == 1.0);
    double ss = 0;
    for (double v : a.values) ss += v * v;
    CHECK(ss == doctest::Approx(1.0));
    for (std::size_t i = 1; i < a.indices.size(); ++i) CHECK(a.indices[i - 1] < a.indices[i]);
    for (auto i : a.indices) CHECK(i < 64);
    CHECK(a.dense().size() == 64);

    c.hash_seed = 99;
    const auto seeded = featurize("if (ptr == NULL) return -1;", c);
    CHECK((seeded.indices != a.indices || seeded.values != a.values));

    CHECK(featurize("", c).nonzeros() == 0);
    CHECK(featurize("", c).l2_norm == 0.0);

    c.dimension = 100;
    CHECK_THROWS_AS(featurize("x", c), Error);
    c.dimension = 64;
    c.unigrams = c.bigrams = false;
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("unigram hashing follows the documented rule") {
    FeaturizerConfig c;
    c.dimension = 1024;
    c.bigrams = false;
    const auto x = featurize("token", c);
    const auto h = stable_hash64(std::string("1\x1f") + "token", 0);
    REQUIRE(x.nonzeros() == 1);
    CHECK(x.indices[0] == (h & 1023));
    CHECK(x.values[0] == (((h >> 10) & 1) == 0 ? 1.0 : -1.0));
}

TEST_CASE("feature dump") {
    FeaturizerConfig c;
    c.dimension = 32;
    std::vector<std::string> ids{"a", "b"};
    std::vector<FeatureVector> f{featurize("x y", c), featurize("z", c)};
    std::ostringstream out;
    write_feature_dump(out, c, ids, f);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    const auto header = nlohmann::json::parse(line);
    CHECK(header["algorithm"] == std::string(kFeatureHashAlgorithm));
    std::getline(in, line);
    CHECK(nlohmann::json::parse(line)["id"] == "a");
}

TEST_CASE("linear gradient matches finite differences") { gradient_check(LinearModel(24), 1); }

TEST_CASE("mlp gradient matches finite differences") { gradient_check(MlpModel(12, 5), 2); }

TEST_CASE("initialization and shapes") {
    LinearModel lin(100);
    CHECK(lin.parameter_count() == 101);
    std::vector<double> p(101);
    Rng rng(3);
    lin.initialize(p, rng);
    for (std::size_t i = 0; i < 100; ++i) CHECK(std::abs(p[i]) <= 0.1);
    CHECK(p[100] == 0.0);

    MlpModel mlp(10, 4);
    CHECK(mlp.parameter_count() == 4 * 10 + 4 + 4 + 1);
    std::vector<double> q(mlp.parameter_count());
    mlp.initialize(q, rng);
    for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(q[i]) <= 1.0 / std::sqrt(10.0));
    for (std::size_t i = 40; i < 44; ++i) CHECK(q[i] == 0.0);
    for (std::size_t i = 44; i < 48; ++i) CHECK(std::abs(q[i]) <= 0.5);
    CHECK(q[48] == 0.0);

    FeatureVector wrong;
    wrong.dimension = 7;
    CHECK_THROWS_AS(lin.predict(p, wrong), Error);
    std::vector<double> short_params(5);
    FeatureVector ok;
    ok.dimension = 100;
    CHECK_THROWS_AS(lin.predict(short_params, ok), Error);
}

TEST_CASE("predictions stay inside (0,1)") {
    LinearModel lin(4);
    FeatureVector x;
    x.dimension = 4;
    x.indices = {0};
    x.values = {1.0};
    std::vector<double> p{1000, 0, 0, 0, 0};
    const auto pr = lin.predict(p, x);
    CHECK(pr.p_vul < 1.0);
    CHECK(pr.p_safe > 0.0);
    CHECK(pr.p_vul + pr.p_safe == doctest::Approx(1.0));
    p[0] = -1000;
    CHECK(lin.predict(p, x).p_vul > 0.0);
}

TEST_CASE("model factory") {
    CHECK(make_model({"linear", 8}, 16)->parameter_count() == 17);
    CHECK(make_model({"mlp", 3}, 16)->kind() == "mlp");
    CHECK_THROWS_AS(make_model({"tree", 3}, 16), Error);
    CHECK_THROWS_AS(make_model({"mlp", 0}, 16), Error);
}
