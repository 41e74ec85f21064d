#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "paced/corpus.hpp"
#include "paced/difficulty.hpp"
#include "paced/metrics.hpp"
#include "paced/training.hpp"

using namespace paced;

namespace {

struct Fixture {
    FeaturizerConfig features;
    Dataset train;
    Dataset validation;

    explicit Fixture(std::size_t n, double noise = 0.0, std::uint64_t seed = 1) {
        features.dimension = 1 << 12;
        SynthConfig sc;
        sc.n_samples = n;
        sc.label_noise_rate = noise;
        sc.seed = seed;
        const auto parts = split(generate(sc).samples, {0.8, 0.1, 0.1}, seed);
        train = featurize_corpus(parts.train, features);
        validation = featurize_corpus(parts.validation, features);
    }
};

TrainingConfig fast_config() {
    TrainingConfig c;
    c.optimizer.learning_rate = 0.01;
    c.max_epochs = 12;
    return c;
}

// Two-feature linearly separable set.
Dataset separable(std::size_t n) {
    Dataset d;
    Rng rng(4);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        FeatureVector x;
        x.dimension = 2;
        x.indices = {0, 1};
        x.values = {y == 1 ? rng.uniform(0.5, 1.0) : rng.uniform(-1.0, -0.5), rng.uniform(-0.1, 0.1)};
        d.ids.push_back("p" + std::to_string(i));
        d.features.push_back(x);
        d.labels.push_back(y);
    }
    return d;
}

}  // namespace

TEST_CASE("patience counter") {
    EarlyStopping es;
    es.patience = 5;
    const std::vector<double> losses{1.0, 0.9, 0.91, 0.92, 0.93, 0.94, 0.95};
    int stopped_at = 0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        es.observe(static_cast<int>(i + 1), losses[i]);
        if (es.should_stop()) {
            stopped_at = static_cast<int>(i + 1);
            break;
        }
    }
    CHECK(stopped_at == 7);
    CHECK(es.best_epoch == 2);
    CHECK(es.best_loss == 0.9);

    EarlyStopping strict;
    strict.min_delta = 0.05;
    strict.observe(1, 1.0);
    CHECK_FALSE(strict.observe(2, 0.96));
    CHECK(strict.observe(3, 0.9));
}

TEST_CASE("training config validation") {
    TrainingConfig c;
    CHECK_NOTHROW(validate(c));
    c.batch_size = 0;
    CHECK_THROWS_AS(validate(c), Error);
    c = {};
    c.optimizer.beta1 = 1.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = {};
    c.force_lambda = 1.5;
    CHECK_THROWS_AS(validate(c), Error);
    CHECK(parse_train_mode("no-spl") == TrainMode::no_spl);
    CHECK(parse_train_mode("spl") == TrainMode::spl);
    CHECK_THROWS_AS(parse_train_mode("fast"), Error);
}

TEST_CASE("single sample epoch takes one step") {
    auto d = separable(1);
    const LinearModel model(2);
    TrainingConfig c;
    auto run = start_run(model, 3, c, 1);
    const auto before = run.params;
    const auto r = run_epoch(run, d, d, model, SelectorConfig{}, c, TrainMode::spl);
    CHECK(r.selected_count == 1);
    CHECK(r.batches == 1);
    CHECK(run.optimizer.step_count == 1);
    CHECK(run.params != before);
    CHECK(run.first_selected_epoch[0] == 1);
}

TEST_CASE("both modes fit separable data") {
    const auto d = separable(64);
    const LinearModel model(2);
    TrainingConfig c;
    c.optimizer.learning_rate = 0.05;
    c.max_epochs = 60;
    c.patience = 60;
    SelectorConfig s;
    s.r_init = 0.5;
    for (auto mode : {TrainMode::spl, TrainMode::no_spl}) {
        const auto run = train(model, d, d, s, c, mode, 1);
        const auto p = predict_p_vul(model, run.params, d);
        CHECK(metrics(confusion(p, d.labels, 0.5)).acc == 1.0);
    }
}

TEST_CASE("max epochs cap") {
    const auto d = separable(32);
    const LinearModel model(2);
    TrainingConfig c;
    c.optimizer.learning_rate = 0.01;
    c.optimizer.weight_decay = 0.0;
    c.max_epochs = 7;
    const auto run = train(model, d, d, SelectorConfig{}, c, TrainMode::no_spl, 2);
    CHECK(run.epoch == 7);
    CHECK_FALSE(run.early_stopped);
    CHECK(run.early_stopping.best_epoch == 7);
    CHECK(run.best_params == run.params);
}

TEST_CASE("NO-SPL reports full selection") {
    Fixture f(300);
    const LinearModel model(f.features.dimension);
    const auto run = train(model, f.train, f.validation, SelectorConfig{}, fast_config(), TrainMode::no_spl, 1);
    for (const auto& r : run.history) {
        CHECK(r.selected_ratio == 1.0);
        CHECK(r.selected_count == f.train.size());
        CHECK(std::isnan(r.mean_difficulty));
        CHECK_FALSE(r.age_update.has_value());
    }
}

TEST_CASE("SPL starts near r_init") {
    Fixture f(500);
    const LinearModel model(f.features.dimension);
    SelectorConfig s;
    s.r_init = 0.1;
    const auto run = train(model, f.train, f.validation, s, fast_config(), TrainMode::spl, 1);
    const auto& first = run.history.front();
    CHECK(std::abs(first.selected_ratio - 0.1) <= 1.0 / static_cast<double>(f.train.size()) + 1e-12);
    for (std::size_t i = 1; i < run.history.size(); ++i) {
        REQUIRE(run.history[i].age_update.has_value());
        const auto& t = *run.history[i].age_update;
        CHECK(t.s_t == doctest::Approx(1.0 / (1.0 + s.k * t.sigma_t)));
        CHECK((t.lambda_next >= 0.0 && t.lambda_next <= 1.0));
    }
}

TEST_CASE("forced full age equals NO-SPL bit for bit") {
    Fixture f(400, 0.1);
    const LinearModel model(f.features.dimension);
    auto forced = fast_config();
    forced.force_lambda = 1.0;
    const auto a = train(model, f.train, f.validation, SelectorConfig{}, forced, TrainMode::spl, 9);
    const auto b = train(model, f.train, f.validation, SelectorConfig{}, fast_config(), TrainMode::no_spl, 9);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_loss == b.history[i].train_loss);
        CHECK(a.history[i].val_loss == b.history[i].val_loss);
        CHECK(a.history[i].selected_digest == b.history[i].selected_digest);
    }
    CHECK(a.params == b.params);
    CHECK(a.best_params == b.best_params);
}

TEST_CASE("r_init of one trains the full set in the first epoch") {
    Fixture f(300);
    const LinearModel model(f.features.dimension);
    SelectorConfig s;
    s.r_init = 1.0;
    auto c = fast_config();
    auto a = start_run(model, 4, c, f.train.size());
    auto b = start_run(model, 4, c, f.train.size());
    run_epoch(a, f.train, f.validation, model, s, c, TrainMode::spl);
    run_epoch(b, f.train, f.validation, model, s, c, TrainMode::no_spl);
    CHECK(a.params == b.params);
}

TEST_CASE("determinism and resume") {
    Fixture f(400, 0.2);
    const LinearModel model(f.features.dimension);
    const auto c = fast_config();
    const SelectorConfig s;
    const auto a = train(model, f.train, f.validation, s, c, TrainMode::spl, 5);
    const auto b = train(model, f.train, f.validation, s, c, TrainMode::spl, 5);
    CHECK(a.params == b.params);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].lambda == b.history[i].lambda);
        CHECK(a.history[i].selected_digest == b.history[i].selected_digest);
    }

    auto resumed = start_run(model, 5, c, f.train.size());
    continue_training(resumed, f.train, f.validation, model, s, c, TrainMode::spl, 2);
    CHECK(resumed.epoch == 2);
    CHECK_FALSE(resumed.finished);
    auto copy = resumed;
    continue_training(copy, f.train, f.validation, model, s, c, TrainMode::spl);
    CHECK(copy.params == a.params);
    CHECK(copy.best_params == a.best_params);
    CHECK(copy.epoch == a.epoch);
}

TEST_CASE("property: first selection follows initial difficulty") {
    Fixture f(800, 0.2, 3);
    const LinearModel model(f.features.dimension);
    auto c = fast_config();
    c.patience = 50;
    c.max_epochs = 25;
    SelectorConfig s;
    s.r_init = 0.1;
    s.gamma0 = 0.1;
    auto run = start_run(model, 2, c, f.train.size());
    const auto initial = difficulty_values(difficulty_batch(predict_all(model, run.params, f.train), f.train.labels));
    continue_training(run, f.train, f.validation, model, s, c, TrainMode::spl);
    std::vector<double> first;
    const double never = static_cast<double>(run.epoch + 1);
    for (int e : run.first_selected_epoch) first.push_back(e == 0 ? never : static_cast<double>(e));
    CHECK(oracle::spearman(initial, first) > 0.0);
}

TEST_CASE("errors") {
    const LinearModel model(2);
    Dataset empty;
    const auto d = separable(4);
    CHECK_THROWS_AS(train(model, empty, d, SelectorConfig{}, TrainingConfig{}, TrainMode::spl, 1), Error);
    CHECK_THROWS_AS(train(model, d, empty, SelectorConfig{}, TrainingConfig{}, TrainMode::spl, 1), Error);
    CHECK_THROWS_AS(mean_loss(model, std::vector<double>(3), empty), Error);
}
