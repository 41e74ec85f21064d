#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "paced/checkpoint.hpp"
#include "paced/corpus.hpp"

using namespace paced;

namespace {

struct Small {
    RunConfig config;
    Dataset train;
    Dataset validation;
    std::unique_ptr<Model> model;

    Small() {
        config.featurizer.dimension = 256;
        config.training.optimizer.learning_rate = 0.01;
        config.training.max_epochs = 8;
        config.synth.n_samples = 200;
        config.synth.label_noise_rate = 0.2;
        const auto parts = split(generate(config.synth).samples, config.split_ratios, 1);
        train = featurize_corpus(parts.train, config.featurizer);
        validation = featurize_corpus(parts.validation, config.featurizer);
        model = make_model(config.model, config.featurizer.dimension);
    }
};

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("round trip preserves the run state exactly") {
    Small s;
    Checkpoint c;
    c.config = s.config;
    c.manifest_digest = "abc";
    c.state = start_run(*s.model, 3, s.config.training, s.train.size());
    continue_training(c.state, s.train, s.validation, *s.model, s.config.selector, s.config.training,
                      TrainMode::spl, 3);

    const auto path = temp_file("paced_ckpt_roundtrip.json");
    save_checkpoint(path, c);
    const auto back = load_checkpoint(path);
    CHECK(back.manifest_digest == "abc");
    CHECK(config_digest(back.config) == config_digest(c.config));
    CHECK(back.state.params == c.state.params);
    CHECK(back.state.best_params == c.state.best_params);
    CHECK(back.state.optimizer.m == c.state.optimizer.m);
    CHECK(back.state.optimizer.v == c.state.optimizer.v);
    CHECK(back.state.optimizer.step_count == c.state.optimizer.step_count);
    CHECK(back.state.age->lambda == c.state.age->lambda);
    CHECK(back.state.epoch == 3);
    CHECK(back.state.first_selected_epoch == c.state.first_selected_epoch);
    REQUIRE(back.state.history.size() == 3);
    CHECK(back.state.history[1].age_update->sigma_t == c.state.history[1].age_update->sigma_t);
    CHECK_FALSE(back.state.history[0].age_update.has_value());

    // Continue both and compare with an uninterrupted run.
    auto resumed = back.state;
    continue_training(resumed, s.train, s.validation, *s.model, s.config.selector, s.config.training, TrainMode::spl);
    const auto full = train(*s.model, s.train, s.validation, s.config.selector, s.config.training, TrainMode::spl, 3);
    CHECK(resumed.params == full.params);
    CHECK(resumed.best_params == full.best_params);
    CHECK(resumed.epoch == full.epoch);
    std::filesystem::remove(path);
}

TEST_CASE("NO-SPL history keeps NaN fields") {
    Small s;
    Checkpoint c;
    c.config = s.config;
    c.state = start_run(*s.model, 1, s.config.training, s.train.size());
    continue_training(c.state, s.train, s.validation, *s.model, s.config.selector, s.config.training,
                      TrainMode::no_spl, 1);
    const auto back = checkpoint_from_json(to_json(c));
    CHECK(std::isnan(back.state.history[0].mean_difficulty));
    CHECK(std::isnan(back.state.history[0].objective));
    CHECK_FALSE(back.state.age.has_value());
}

TEST_CASE("rejects incompatible checkpoints") {
    Small s;
    Checkpoint c;
    c.config = s.config;
    c.state = start_run(*s.model, 1, s.config.training, s.train.size());
    const auto good = to_json(c);
    CHECK(good["format"] == "paced-checkpoint");
    CHECK(good["version"] == kCheckpointVersion);

    auto j = good;
    j["version"] = 99;
    CHECK_THROWS_AS(checkpoint_from_json(j), Error);
    j = good;
    j["feature_hash_algorithm"] = "other";
    CHECK_THROWS_AS(checkpoint_from_json(j), Error);
    j = good;
    j["state"]["params"].erase(0);
    CHECK_THROWS_AS(checkpoint_from_json(j), Error);
    j = good;
    j.erase("state");
    try {
        checkpoint_from_json(j);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
    }

    const auto path = temp_file("paced_ckpt_bad.json");
    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_checkpoint(path), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(temp_file("paced_missing_ckpt.json")), Error);
}
