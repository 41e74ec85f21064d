#include "paced/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace paced {

namespace {

using nlohmann::json;

// JSON has no NaN or infinity; both are stored as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double num_or(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

json to_json(const AgeUpdateTrace& t) {
    return {{"r_t", t.r_t},
            {"mu_t", t.mu_t},
            {"gamma_t", t.gamma_t},
            {"sigma_t", t.sigma_t},
            {"s_t", t.s_t},
            {"delta_mu", t.delta_mu},
            {"lambda_proposed", t.lambda_proposed},
            {"r_proposed", t.r_proposed},
            {"capped", t.capped},
            {"floored", t.floored},
            {"lambda_unclamped", t.lambda_unclamped},
            {"lambda_next", t.lambda_next}};
}

AgeUpdateTrace trace_from_json(const json& j) {
    AgeUpdateTrace t;
    t.r_t = j.at("r_t").get<double>();
    t.mu_t = j.at("mu_t").get<double>();
    t.gamma_t = j.at("gamma_t").get<double>();
    t.sigma_t = j.at("sigma_t").get<double>();
    t.s_t = j.at("s_t").get<double>();
    t.delta_mu = j.at("delta_mu").get<double>();
    t.lambda_proposed = j.at("lambda_proposed").get<double>();
    t.r_proposed = j.at("r_proposed").get<double>();
    t.capped = j.at("capped").get<bool>();
    t.floored = j.at("floored").get<bool>();
    t.lambda_unclamped = j.at("lambda_unclamped").get<double>();
    t.lambda_next = j.at("lambda_next").get<double>();
    return t;
}

}  // namespace

json to_json(const EpochReport& r) {
    json j = {{"epoch", r.epoch},
              {"mode", to_string(r.mode)},
              {"lambda", num(r.lambda)},
              {"selected_ratio", r.selected_ratio},
              {"selected_count", r.selected_count},
              {"train_size", r.train_size},
              {"mean_difficulty", num(r.mean_difficulty)},
              {"selected_digest", r.selected_digest},
              {"batches", r.batches},
              {"train_loss", num(r.train_loss)},
              {"val_loss", num(r.val_loss)},
              {"objective", num(r.objective)},
              {"improved", r.improved}};
    j["age_update"] = r.age_update ? to_json(*r.age_update) : json(nullptr);
    return j;
}

EpochReport epoch_report_from_json(const json& j) {
    EpochReport r;
    r.epoch = j.at("epoch").get<int>();
    r.mode = parse_train_mode(j.at("mode").get<std::string>());
    r.lambda = num_or(j.at("lambda"), kNaN);
    r.selected_ratio = j.at("selected_ratio").get<double>();
    r.selected_count = j.at("selected_count").get<std::size_t>();
    r.train_size = j.at("train_size").get<std::size_t>();
    r.mean_difficulty = num_or(j.at("mean_difficulty"), kNaN);
    r.selected_digest = j.at("selected_digest").get<std::string>();
    r.batches = j.at("batches").get<std::size_t>();
    r.train_loss = num_or(j.at("train_loss"), kNaN);
    r.val_loss = num_or(j.at("val_loss"), kNaN);
    r.objective = num_or(j.at("objective"), kNaN);
    r.improved = j.at("improved").get<bool>();
    if (!j.at("age_update").is_null()) r.age_update = trace_from_json(j.at("age_update"));
    return r;
}

json to_json(const Checkpoint& c) {
    const auto& s = c.state;
    json j;
    j["format"] = "paced-checkpoint";
    j["version"] = kCheckpointVersion;
    j["feature_hash_algorithm"] = kFeatureHashAlgorithm;
    j["manifest_digest"] = c.manifest_digest;
    j["config_digest"] = config_digest(c.config);
    j["config"] = to_key_values(c.config);

    json st;
    st["seed"] = s.seed;
    st["epoch"] = s.epoch;
    st["finished"] = s.finished;
    st["early_stopped"] = s.early_stopped;
    st["params"] = s.params;
    st["best_params"] = s.best_params;
    st["optimizer"] = {{"m", s.optimizer.m},
                       {"v", s.optimizer.v},
                       {"step_count", s.optimizer.step_count},
                       {"learning_rate", s.optimizer.config.learning_rate},
                       {"beta1", s.optimizer.config.beta1},
                       {"beta2", s.optimizer.config.beta2},
                       {"epsilon", s.optimizer.config.epsilon},
                       {"weight_decay", s.optimizer.config.weight_decay}};
    if (s.age) {
        st["age"] = {{"lambda", s.age->lambda},
                     {"epoch", s.age->epoch},
                     {"selected_ratio", s.age->selected_ratio},
                     {"mean_difficulty", s.age->mean_difficulty},
                     {"prev_mean_difficulty", s.age->prev_mean_difficulty}};
    } else {
        st["age"] = nullptr;
    }
    st["early_stopping"] = {{"patience", s.early_stopping.patience},
                            {"min_delta", s.early_stopping.min_delta},
                            {"best_loss", num(s.early_stopping.best_loss)},
                            {"best_epoch", s.early_stopping.best_epoch},
                            {"stale_epochs", s.early_stopping.stale_epochs}};
    st["first_selected_epoch"] = s.first_selected_epoch;
    json history = json::array();
    for (const auto& r : s.history) history.push_back(to_json(r));
    st["history"] = std::move(history);
    j["state"] = std::move(st);
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "paced-checkpoint") {
            throw Error(ErrorKind::data, "not a checkpoint file");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw Error(ErrorKind::data, "unsupported checkpoint version " + j.at("version").dump());
        }
        if (j.at("feature_hash_algorithm").get<std::string>() != kFeatureHashAlgorithm) {
            throw Error(ErrorKind::data, "checkpoint was written with a different feature hash algorithm");
        }
        Checkpoint c;
        apply_key_values(c.config, j.at("config").get<KeyValues>());
        validate(c.config);
        c.manifest_digest = j.at("manifest_digest").get<std::string>();

        const auto& st = j.at("state");
        auto& s = c.state;
        s.seed = st.at("seed").get<std::uint64_t>();
        s.epoch = st.at("epoch").get<int>();
        s.finished = st.at("finished").get<bool>();
        s.early_stopped = st.at("early_stopped").get<bool>();
        s.params = st.at("params").get<std::vector<double>>();
        s.best_params = st.at("best_params").get<std::vector<double>>();
        const auto& o = st.at("optimizer");
        s.optimizer.m = o.at("m").get<std::vector<double>>();
        s.optimizer.v = o.at("v").get<std::vector<double>>();
        s.optimizer.step_count = o.at("step_count").get<std::uint64_t>();
        s.optimizer.config.learning_rate = o.at("learning_rate").get<double>();
        s.optimizer.config.beta1 = o.at("beta1").get<double>();
        s.optimizer.config.beta2 = o.at("beta2").get<double>();
        s.optimizer.config.epsilon = o.at("epsilon").get<double>();
        s.optimizer.config.weight_decay = o.at("weight_decay").get<double>();
        if (!st.at("age").is_null()) {
            const auto& a = st.at("age");
            AgeState age;
            age.lambda = a.at("lambda").get<double>();
            age.epoch = a.at("epoch").get<int>();
            age.selected_ratio = a.at("selected_ratio").get<double>();
            age.mean_difficulty = a.at("mean_difficulty").get<double>();
            age.prev_mean_difficulty = a.at("prev_mean_difficulty").get<double>();
            s.age = age;
        }
        const auto& es = st.at("early_stopping");
        s.early_stopping.patience = es.at("patience").get<std::size_t>();
        s.early_stopping.min_delta = es.at("min_delta").get<double>();
        s.early_stopping.best_loss = num_or(es.at("best_loss"), kInf);
        s.early_stopping.best_epoch = es.at("best_epoch").get<int>();
        s.early_stopping.stale_epochs = es.at("stale_epochs").get<std::size_t>();
        s.first_selected_epoch = st.at("first_selected_epoch").get<std::vector<int>>();
        for (const auto& r : st.at("history")) s.history.push_back(epoch_report_from_json(r));

        const auto model = make_model(c.config.model, c.config.featurizer.dimension);
        if (s.params.size() != model->parameter_count() || s.best_params.size() != model->parameter_count() ||
            s.optimizer.m.size() != model->parameter_count() || s.optimizer.v.size() != model->parameter_count()) {
            throw Error(ErrorKind::data, "checkpoint parameter count does not match its model configuration");
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::data, std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write checkpoint " + tmp);
        out << to_json(checkpoint).dump() << '\n';
        if (!out) throw Error(ErrorKind::io, "write failed for checkpoint " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::data, "malformed checkpoint " + path.string() + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace paced
