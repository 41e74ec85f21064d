// paced: command-line harness for the self-paced curriculum engine.
//
//   paced gen-synthetic --config run.conf --out data/
//   paced train --config run.conf --corpus data/ --out runs/spl --mode spl
//   paced evaluate --checkpoint runs/spl/checkpoint.json --corpus data/ --out runs/spl/eval
//   paced ablation --config run.conf --corpus data/ --out runs/ablation --jobs 4
//   paced grid-search --config run.conf --corpus data/ --out runs/grid --jobs 8
//   paced inspect-difficulty --checkpoint runs/spl/checkpoint.json --corpus data/ --out runs/spl/inspect
//
// Exit codes: 0 success, 2 usage, 3 config, 4 io, 5 data, 6 internal. On
// failure one JSON object {"error": {"category", "message"}} goes to stderr.

#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paced/commands.hpp"

namespace {

using paced::Error;
using paced::ErrorKind;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return 2;
        case ErrorKind::config: return 3;
        case ErrorKind::io: return 4;
        case ErrorKind::data: return 5;
        case ErrorKind::internal: return 6;
    }
    return 6;
}

int report_error(std::string_view category, const std::string& message, int code) {
    nlohmann::json j;
    j["error"] = {{"category", category}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return code;
}

struct Options {
    std::string config;
    std::string corpus;
    std::string out;
    std::string checkpoint;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::size_t jobs = 1;
    std::optional<std::string> tau_grid;
    std::optional<std::string> resume;
    std::optional<std::size_t> stop_after;
    std::optional<std::string> seeds;
    std::string grid;
    bool positives_only = false;
    std::size_t bins = 10;
    std::optional<std::size_t> dimension;
};

paced::RunConfig load_config(const Options& o) {
    auto config = paced::load_run_config(o.config);
    if (o.seed) config.seed = *o.seed;
    if (o.mode) config.mode = paced::parse_train_mode(*o.mode);
    if (o.tau_grid) config.tau_grid = paced::parse_double_list(*o.tau_grid, "--tau-grid");
    paced::validate(config);
    return config;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        const auto item = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::invalid_argument, "--seeds: '" + item + "' is not an unsigned integer");
        }
        pos = comma + 1;
    }
    return seeds;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

int run(Options& o, CLI::App& app) {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    if (name == "gen-synthetic") {
        auto config = load_config(o);
        if (o.seed) config.synth.seed = *o.seed;
        const auto r = paced::cmd_gen_synthetic(config, o.out);
        print_json({{"manifest_digest", r.manifest_digest}, {"samples", r.samples}, {"mislabeled", r.mislabeled}});
    } else if (name == "split") {
        const auto digest = paced::cmd_split(load_config(o), o.corpus);
        print_json({{"manifest_digest", digest}});
    } else if (name == "train") {
        paced::TrainOptions options;
        if (o.resume) options.resume = *o.resume;
        options.stop_after_epochs = o.stop_after;
        auto config = options.resume && o.config.empty() ? paced::load_checkpoint(*options.resume).config
                                                         : load_config(o);
        const auto r = paced::cmd_train(config, o.corpus, o.out, options);
        nlohmann::json j{{"manifest_digest", r.checkpoint.manifest_digest},
                         {"epochs", r.checkpoint.state.epoch},
                         {"completed", r.completed}};
        if (r.test) j["test"] = paced::to_json(*r.test);
        print_json(j);
    } else if (name == "evaluate") {
        std::optional<std::vector<double>> grid;
        if (o.tau_grid) grid = paced::parse_double_list(*o.tau_grid, "--tau-grid");
        const auto r = paced::cmd_evaluate(o.checkpoint, o.corpus, o.out, grid);
        auto j = paced::to_json(r.summary);
        j["manifest_digest"] = r.manifest_digest;
        print_json(j);
    } else if (name == "ablation") {
        const auto seeds = o.seeds ? parse_seeds(*o.seeds) : paced::default_ablation_seeds();
        const auto r = paced::cmd_ablation(load_config(o), o.corpus, seeds, o.out, o.jobs);
        print_json({{"median_delta_f1", r.median_delta_f1},
                    {"mean_delta_f1", r.mean_delta_f1},
                    {"median_delta_top_n", r.median_delta_top_n},
                    {"top_n_values", r.top_n_values}});
    } else if (name == "grid-search") {
        const auto grid = o.grid.empty() ? paced::GridSpec::standard() : paced::load_grid_spec(o.grid);
        const auto r = paced::cmd_grid_search(grid, load_config(o), o.corpus, o.out, o.jobs);
        nlohmann::json best;
        for (const auto& [axis, v] : r.points[r.best].values) best[axis] = v;
        print_json({{"points", r.points.size()}, {"best", best}, {"best_validation_f1", r.validation_f1[r.best]}});
    } else if (name == "inspect-difficulty") {
        std::optional<paced::FeaturizerConfig> expected;
        if (o.dimension) {
            expected = paced::FeaturizerConfig{};
            expected->dimension = *o.dimension;
        }
        const auto filter = o.positives_only ? paced::HistogramFilter::positives_only : paced::HistogramFilter::all;
        const auto r = paced::cmd_inspect_difficulty(o.checkpoint, o.corpus, o.out, filter, o.bins, expected);
        nlohmann::json hardest = nlohmann::json::array();
        for (const auto& h : r.hardest) hardest.push_back({{"id", h.sample_id}, {"difficulty", h.difficulty}});
        nlohmann::json j{{"samples", r.samples}, {"hardest", hardest}, {"histogram", r.histogram.counts}};
        if (r.final_lambda) j["final_lambda"] = *r.final_lambda;
        if (r.enrichment) j["hard_decile_enrichment"] = r.enrichment->factor;
        print_json(j);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paced - self-paced curriculum training for vulnerability detectors"};
    app.require_subcommand(1);
    Options o;

    auto add_config = [&](CLI::App* s) {
        s->add_option("--config", o.config, "key = value config file (PACED_* env vars override)");
    };
    auto add_run = [&](CLI::App* s) {
        s->add_option("--seed", o.seed, "run seed");
        s->add_option("--mode", o.mode, "spl or no-spl")->check(CLI::IsMember({"spl", "no-spl"}));
        s->add_option("--tau-grid", o.tau_grid, "comma-separated thresholds for the sweep");
    };
    auto add_jobs = [&](CLI::App* s) {
        s->add_option("--jobs", o.jobs, "parallel independent runs")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    };

    auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic labelled corpus with splits");
    add_config(gen);
    gen->add_option("--seed", o.seed, "corpus and split seed");
    gen->add_option("--out", o.out, "output directory")->required();

    auto* spl = app.add_subcommand("split", "split <corpus>/corpus.jsonl into train/valid/test");
    add_config(spl);
    spl->add_option("--seed", o.seed, "split seed");
    spl->add_option("--corpus", o.corpus, "corpus directory")->required();

    auto* train = app.add_subcommand("train", "train one model");
    add_config(train);
    add_run(train);
    train->add_option("--corpus", o.corpus, "corpus directory with splits")->required();
    train->add_option("--out", o.out, "output directory")->required();
    train->add_option("--resume", o.resume, "checkpoint to resume from");
    train->add_option("--stop-after", o.stop_after, "stop after this many epochs, leaving a checkpoint");

    auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint");
    eval->add_option("--checkpoint", o.checkpoint, "checkpoint.json")->required();
    eval->add_option("--corpus", o.corpus, "JSONL file or corpus directory (test split)")->required();
    eval->add_option("--out", o.out, "output directory")->required();
    eval->add_option("--tau-grid", o.tau_grid, "comma-separated thresholds for the sweep");

    auto* abl = app.add_subcommand("ablation", "paired SPL vs NO-SPL runs over seeds");
    add_config(abl);
    add_jobs(abl);
    abl->add_option("--corpus", o.corpus, "corpus directory with splits")->required();
    abl->add_option("--out", o.out, "output directory")->required();
    abl->add_option("--seeds", o.seeds, "comma-separated seeds (default 1..10)");
    abl->add_option("--tau-grid", o.tau_grid, "comma-separated thresholds for the sweep");

    auto* grid = app.add_subcommand("grid-search", "selector hyperparameter grid search");
    add_config(grid);
    add_run(grid);
    add_jobs(grid);
    grid->add_option("--corpus", o.corpus, "corpus directory with splits")->required();
    grid->add_option("--out", o.out, "output directory")->required();
    grid->add_option("--grid", o.grid, "grid file with grid.<axis> = v1,v2,... (default: 3^5 grid)");

    auto* insp = app.add_subcommand("inspect-difficulty", "difficulty histogram and hardest samples");
    insp->add_option("--checkpoint", o.checkpoint, "checkpoint.json")->required();
    insp->add_option("--corpus", o.corpus, "JSONL file or corpus directory (train split)")->required();
    insp->add_option("--out", o.out, "output directory")->required();
    insp->add_flag("--positives-only", o.positives_only, "histogram over label-1 samples only");
    insp->add_option("--bins", o.bins, "histogram bins")->check(CLI::PositiveNumber);
    insp->add_option("--dimension", o.dimension, "expected featurizer dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    try {
        return run(o, app);
    } catch (const Error& e) {
        return report_error(paced::to_string(e.kind()), e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 6);
    }
}
