#include "paced/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "paced/difficulty.hpp"

namespace paced {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Runs task(i) for i in [0, count) on up to `jobs` threads. Results must be
// written by index so output order never depends on scheduling.
template <typename Task>
void parallel_for(std::size_t count, std::size_t jobs, Task task) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

void write_manifest(std::string_view command, const std::string& digest, const RunConfig* config,
                    const json& inputs, const fs::path& dir, const std::vector<std::string>& artifacts) {
    ordered_json m;
    m["format"] = "paced-manifest";
    m["version"] = 1;
    m["command"] = command;
    m["manifest_digest"] = digest;
    if (config) {
        m["config_digest"] = config_digest(*config);
        m["config"] = to_key_values(*config);
    }
    m["inputs"] = inputs;
    ordered_json files = ordered_json::object();
    for (const auto& a : artifacts) files[a] = file_digest(dir / a);
    m["artifacts"] = files;
    write_text(dir / kManifestFile, m.dump(2) + "\n");
}

fs::path resolve_corpus_file(const fs::path& corpus, std::string_view split_file) {
    if (fs::is_directory(corpus)) return corpus / split_file;
    return corpus;
}

std::unique_ptr<Model> model_for(const RunConfig& config) {
    return make_model(config.model, config.featurizer.dimension);
}

}  // namespace

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return hex64(stable_hash64(ss.str()));
}

// ---- gen-synthetic / split ------------------------------------------------

namespace {

std::vector<std::string> write_splits(const RunConfig& config, const Corpus& corpus, const fs::path& dir) {
    const auto parts = split(corpus, config.split_ratios, config.seed);
    save_jsonl(dir / kTrainFile, parts.train);
    save_jsonl(dir / kValidFile, parts.validation);
    save_jsonl(dir / kTestFile, parts.test);
    return {std::string(kTrainFile), std::string(kValidFile), std::string(kTestFile)};
}

}  // namespace

GenResult cmd_gen_synthetic(const RunConfig& config, const fs::path& out_dir) {
    validate(config);
    ensure_dir(out_dir);
    const auto synthetic = generate(config.synth);
    save_jsonl(out_dir / kCorpusFile, synthetic.samples);
    save_clean_labels(out_dir / kCleanLabelsFile, synthetic.clean);
    auto artifacts = write_splits(config, synthetic.samples, out_dir);
    artifacts.insert(artifacts.begin(), {std::string(kCorpusFile), std::string(kCleanLabelsFile)});

    GenResult r;
    r.manifest_digest = hex64(stable_hash64("gen-synthetic\n" + to_config_text(config)));
    r.samples = synthetic.samples.size();
    r.mislabeled = static_cast<std::size_t>(
        std::count_if(synthetic.clean.begin(), synthetic.clean.end(), [](const CleanLabel& c) { return c.mislabeled(); }));
    write_manifest("gen-synthetic", r.manifest_digest, &config, json::object(), out_dir, artifacts);
    return r;
}

std::string cmd_split(const RunConfig& config, const fs::path& corpus_dir) {
    const auto corpus = load_jsonl(corpus_dir / kCorpusFile);
    const auto corpus_digest = file_digest(corpus_dir / kCorpusFile);
    const auto artifacts = write_splits(config, corpus, corpus_dir);
    const auto digest = hex64(stable_hash64("split\n" + corpus_digest + "\n" + to_config_text(config)));
    write_manifest("split", digest, &config, json{{"corpus", corpus_digest}}, corpus_dir, artifacts);
    return digest;
}

LoadedSplits load_splits(const fs::path& corpus_dir) {
    LoadedSplits s;
    std::string joined;
    for (auto [file, target] : {std::pair{kTrainFile, &s.train}, std::pair{kValidFile, &s.validation},
                                std::pair{kTestFile, &s.test}}) {
        const auto path = corpus_dir / file;
        if (!fs::exists(path)) {
            throw Error(ErrorKind::data, "missing split " + path.string() + " (run gen-synthetic or split first)");
        }
        *target = load_jsonl(path);
        joined += file_digest(path) + "\n";
    }
    if (s.train.empty() || s.validation.empty() || s.test.empty()) {
        throw Error(ErrorKind::data, "train, valid and test splits must all be non-empty");
    }
    s.digest = hex64(stable_hash64(joined));
    return s;
}

PreparedData prepare(const LoadedSplits& splits, const FeaturizerConfig& featurizer) {
    PreparedData d;
    d.train = featurize_corpus(splits.train, featurizer);
    d.validation = featurize_corpus(splits.validation, featurizer);
    d.test = featurize_corpus(splits.test, featurizer);
    d.digest = splits.digest;
    return d;
}

// ---- evaluation -----------------------------------------------------------

EvaluationSummary evaluate_predictions(std::span<const double> p_vul, std::span<const int> labels,
                                       std::span<const std::string> ids, const EvalConfig& eval,
                                       std::span<const double> tau_grid) {
    EvaluationSummary s;
    s.report = metrics(confusion(p_vul, labels, eval.threshold), eval.threshold);
    for (auto n : eval.top_n_values) {
        if (n <= p_vul.size()) {
            s.top_n.push_back(top_n(p_vul, labels, ids, n));
        } else {
            s.top_n_skipped.push_back(n);
        }
    }
    s.sweep = threshold_sweep(p_vul, labels, tau_grid);
    return s;
}

EvaluationSummary evaluate_model(const Model& model, std::span<const double> params, const Dataset& data,
                                 const EvalConfig& eval, std::span<const double> tau_grid) {
    const auto p = predict_p_vul(model, params, data);
    return evaluate_predictions(p, data.labels, data.ids, eval, tau_grid);
}

json to_json(const MetricReport& r) {
    ordered_json j;
    j["threshold"] = r.threshold;
    j["tp"] = r.counts.tp;
    j["fp"] = r.counts.fp;
    j["tn"] = r.counts.tn;
    j["fn"] = r.counts.fn;
    j["acc"] = r.acc;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["mcc"] = r.mcc;
    return json::parse(j.dump());
}

json to_json(const EvaluationSummary& s) {
    json j;
    j["metrics"] = to_json(s.report);
    json top = json::array();
    for (const auto& t : s.top_n) {
        top.push_back({{"n", t.n}, {"f1", t.f1}, {"precision_at_n", t.precision_at_n}, {"recall_at_n", t.recall_at_n}});
    }
    j["top_n"] = top;
    j["top_n_skipped"] = s.top_n_skipped;
    return j;
}

std::string sweep_csv(std::span<const MetricReport> sweep) {
    std::string out = "threshold,acc,precision,recall,f1,mcc\n";
    for (const auto& r : sweep) {
        out += format_double(r.threshold) + "," + format_double(r.acc) + "," + format_double(r.precision) + "," +
               format_double(r.recall) + "," + format_double(r.f1) + "," + format_double(r.mcc) + "\n";
    }
    return out;
}

std::string trace_csv(std::span<const EpochReport> history) {
    std::string out =
        "epoch,mode,lambda,selected_ratio,selected_count,mean_difficulty,r_t,gamma_t,sigma_t,s_t,delta_mu,"
        "lambda_proposed,capped,floored,train_loss,val_loss,objective,selected_digest\n";
    for (const auto& r : history) {
        const auto& t = r.age_update;
        auto opt = [&](auto member) { return t ? csv_number((*t).*member) : std::string(); };
        out += std::to_string(r.epoch) + "," + std::string(to_string(r.mode)) + "," + csv_number(r.lambda) + "," +
               csv_number(r.selected_ratio) + "," + std::to_string(r.selected_count) + "," +
               csv_number(r.mean_difficulty) + "," + opt(&AgeUpdateTrace::r_t) + "," +
               opt(&AgeUpdateTrace::gamma_t) + "," + opt(&AgeUpdateTrace::sigma_t) + "," +
               opt(&AgeUpdateTrace::s_t) + "," + opt(&AgeUpdateTrace::delta_mu) + "," +
               opt(&AgeUpdateTrace::lambda_proposed) + "," + (t ? (t->capped ? "1" : "0") : "") + "," +
               (t ? (t->floored ? "1" : "0") : "") + "," + csv_number(r.train_loss) + "," +
               csv_number(r.val_loss) + "," + csv_number(r.objective) + "," + r.selected_digest + "\n";
    }
    return out;
}

// ---- train ----------------------------------------------------------------

std::string train_manifest_digest(const RunConfig& config, const std::string& corpus_digest) {
    return hex64(stable_hash64("train\n" + corpus_digest + "\n" + to_config_text(config)));
}

TrainOutcome cmd_train(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out_dir,
                       const TrainOptions& options) {
    validate(config);
    const auto splits = load_splits(corpus_dir);
    const auto data = prepare(splits, config.featurizer);
    const auto model = model_for(config);
    ensure_dir(out_dir);

    TrainOutcome outcome;
    auto& ckpt = outcome.checkpoint;
    ckpt.config = config;
    ckpt.manifest_digest = train_manifest_digest(config, splits.digest);
    if (options.resume) {
        auto loaded = load_checkpoint(*options.resume);
        if (config_digest(loaded.config) != config_digest(config)) {
            throw Error(ErrorKind::config, "resume checkpoint was produced by a different config");
        }
        if (loaded.manifest_digest != ckpt.manifest_digest) {
            throw Error(ErrorKind::data, "resume checkpoint was produced from a different corpus");
        }
        ckpt.state = std::move(loaded.state);
    } else {
        validate(config.selector);
        ckpt.state = start_run(*model, config.seed, config.training, data.train.size());
    }

    const auto ckpt_path = out_dir / kCheckpointFile;
    std::size_t ran = 0;
    while (!ckpt.state.finished) {
        if (options.stop_after_epochs && ran >= *options.stop_after_epochs) break;
        continue_training(ckpt.state, data.train, data.validation, *model, config.selector, config.training,
                          config.mode, 1);
        ++ran;
        save_checkpoint(ckpt_path, ckpt);
    }
    save_checkpoint(ckpt_path, ckpt);
    if (!ckpt.state.finished) return outcome;

    outcome.completed = true;
    outcome.test = evaluate_model(*model, ckpt.state.best_params, data.test, config.eval, config.tau_grid);
    write_text(out_dir / "trace.csv", trace_csv(ckpt.state.history));

    ordered_json report;
    report["manifest_digest"] = ckpt.manifest_digest;
    report["config_digest"] = config_digest(config);
    report["mode"] = to_string(config.mode);
    report["seed"] = config.seed;
    report["epochs_run"] = ckpt.state.epoch;
    report["best_epoch"] = ckpt.state.early_stopping.best_epoch;
    report["best_validation_loss"] = ckpt.state.early_stopping.best_loss;
    report["early_stopped"] = ckpt.state.early_stopped;
    report["test"] = to_json(*outcome.test);
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    write_text(out_dir / "test_sweep.csv", sweep_csv(outcome.test->sweep));
    write_manifest("train", ckpt.manifest_digest, &config, json{{"splits", splits.digest}}, out_dir,
                   {std::string(kCheckpointFile), "trace.csv", "report.json", "test_sweep.csv"});
    return outcome;
}

RunResult run_once(const RunConfig& config, const PreparedData& data) {
    const auto model = model_for(config);
    RunResult r;
    r.state = train(*model, data.train, data.validation, config.selector, config.training, config.mode, config.seed);
    r.test = evaluate_model(*model, r.state.best_params, data.test, config.eval, config.tau_grid);
    const auto pv = predict_p_vul(*model, r.state.best_params, data.validation);
    r.validation = metrics(confusion(pv, data.validation.labels, config.eval.threshold), config.eval.threshold);
    return r;
}

// ---- evaluate -------------------------------------------------------------

EvaluateOutcome cmd_evaluate(const fs::path& checkpoint, const fs::path& corpus, const fs::path& out_dir,
                             std::optional<std::vector<double>> tau_grid) {
    const auto ckpt = load_checkpoint(checkpoint);
    const auto corpus_file = resolve_corpus_file(corpus, kTestFile);
    const auto samples = load_jsonl(corpus_file);
    if (samples.empty()) throw Error(ErrorKind::data, "evaluation corpus is empty");
    const auto data = featurize_corpus(samples, ckpt.config.featurizer);
    const auto model = model_for(ckpt.config);
    const auto grid = tau_grid.value_or(ckpt.config.tau_grid);
    for (double t : grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::invalid_argument, "--tau-grid values must lie in [0,1]");
    }

    EvaluateOutcome out;
    out.summary = evaluate_model(*model, ckpt.state.best_params, data, ckpt.config.eval, grid);
    std::string grid_text;
    for (double t : grid) grid_text += format_double(t) + ",";
    const auto corpus_digest = file_digest(corpus_file);
    out.manifest_digest =
        hex64(stable_hash64("evaluate\n" + ckpt.manifest_digest + "\n" + corpus_digest + "\n" + grid_text));

    ensure_dir(out_dir);
    ordered_json report;
    report["manifest_digest"] = out.manifest_digest;
    report["checkpoint_manifest_digest"] = ckpt.manifest_digest;
    report["samples"] = data.size();
    report["evaluation"] = to_json(out.summary);
    write_text(out_dir / "eval_report.json", report.dump(2) + "\n");
    write_text(out_dir / "sweep.csv", sweep_csv(out.summary.sweep));
    write_manifest("evaluate", out.manifest_digest, nullptr,
                   json{{"checkpoint", ckpt.manifest_digest}, {"corpus", corpus_digest}}, out_dir,
                   {"eval_report.json", "sweep.csv"});
    return out;
}

// ---- ablation -------------------------------------------------------------

std::vector<std::uint64_t> default_ablation_seeds() {
    std::vector<std::uint64_t> s(10);
    std::iota(s.begin(), s.end(), 1);
    return s;
}

AblationReport run_ablation(const RunConfig& config, const PreparedData& data,
                            const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
    if (seeds.empty()) throw Error(ErrorKind::invalid_argument, "ablation needs at least one seed");
    std::vector<RunResult> runs(seeds.size() * 2);
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        RunConfig c = config;
        c.seed = seeds[i / 2];
        c.mode = (i % 2 == 0) ? TrainMode::spl : TrainMode::no_spl;
        runs[i] = run_once(c, data);
    });

    AblationReport report;
    for (const auto& t : runs.front().test.top_n) report.top_n_values.push_back(t.n);
    std::vector<double> deltas;
    std::vector<std::vector<double>> top_deltas(report.top_n_values.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        AblationSeedResult r;
        r.seed = seeds[s];
        r.spl = std::move(runs[2 * s]);
        r.no_spl = std::move(runs[2 * s + 1]);
        r.delta_f1 = r.spl.test.report.f1 - r.no_spl.test.report.f1;
        deltas.push_back(r.delta_f1);
        for (std::size_t k = 0; k < report.top_n_values.size(); ++k) {
            const double d = r.spl.test.top_n[k].f1 - r.no_spl.test.top_n[k].f1;
            r.delta_top_n.push_back(d);
            top_deltas[k].push_back(d);
        }
        report.seeds.push_back(std::move(r));
    }
    report.median_delta_f1 = median(deltas);
    report.mean_delta_f1 = mean(deltas);
    for (auto& d : top_deltas) report.median_delta_top_n.push_back(median(d));
    return report;
}

json to_json(const AblationReport& report) {
    ordered_json j;
    j["top_n_values"] = report.top_n_values;
    ordered_json per_seed = ordered_json::array();
    for (const auto& s : report.seeds) {
        ordered_json row;
        row["seed"] = s.seed;
        row["f1_spl"] = s.spl.test.report.f1;
        row["f1_no_spl"] = s.no_spl.test.report.f1;
        row["delta_f1"] = s.delta_f1;
        row["mcc_spl"] = s.spl.test.report.mcc;
        row["mcc_no_spl"] = s.no_spl.test.report.mcc;
        row["epochs_spl"] = s.spl.state.epoch;
        row["epochs_no_spl"] = s.no_spl.state.epoch;
        ordered_json top = ordered_json::array();
        for (std::size_t k = 0; k < report.top_n_values.size(); ++k) {
            top.push_back({{"n", report.top_n_values[k]},
                           {"spl", s.spl.test.top_n[k].f1},
                           {"no_spl", s.no_spl.test.top_n[k].f1},
                           {"delta", s.delta_top_n[k]}});
        }
        row["top_n"] = top;
        per_seed.push_back(row);
    }
    j["seeds"] = per_seed;
    j["median_delta_f1"] = report.median_delta_f1;
    j["mean_delta_f1"] = report.mean_delta_f1;
    j["median_delta_top_n"] = report.median_delta_top_n;
    return json::parse(j.dump());
}

AblationReport cmd_ablation(const RunConfig& config, const fs::path& corpus_dir,
                            const std::vector<std::uint64_t>& seeds, const fs::path& out_dir, std::size_t jobs) {
    validate(config);
    const auto splits = load_splits(corpus_dir);
    const auto data = prepare(splits, config.featurizer);
    auto report = run_ablation(config, data, seeds, jobs);

    std::string seed_text;
    for (auto s : seeds) seed_text += std::to_string(s) + ",";
    RunConfig digest_config = config;
    digest_config.seed = 0;
    digest_config.mode = TrainMode::spl;
    const auto digest = hex64(
        stable_hash64("ablation\n" + splits.digest + "\n" + seed_text + "\n" + to_config_text(digest_config)));

    ensure_dir(out_dir);
    json j = to_json(report);
    j["manifest_digest"] = digest;
    write_text(out_dir / "ablation.json", j.dump(2) + "\n");
    std::string csv = "seed,f1_spl,f1_no_spl,delta_f1";
    for (auto n : report.top_n_values) csv += ",top" + std::to_string(n) + "_delta";
    csv += "\n";
    for (const auto& s : report.seeds) {
        csv += std::to_string(s.seed) + "," + format_double(s.spl.test.report.f1) + "," +
               format_double(s.no_spl.test.report.f1) + "," + format_double(s.delta_f1);
        for (double d : s.delta_top_n) csv += "," + format_double(d);
        csv += "\n";
    }
    write_text(out_dir / "ablation.csv", csv);
    write_manifest("ablation", digest, &digest_config, json{{"splits", splits.digest}, {"seeds", seeds}}, out_dir,
                   {"ablation.json", "ablation.csv"});
    return report;
}

// ---- grid search ----------------------------------------------------------

GridResult run_grid_search(const GridSpec& grid, const RunConfig& config, const PreparedData& data,
                           std::size_t jobs) {
    validate(grid);
    GridResult result;
    result.points = enumerate(grid);
    result.validation_f1.assign(result.points.size(), 0.0);
    result.test_f1.assign(result.points.size(), 0.0);
    parallel_for(result.points.size(), jobs, [&](std::size_t i) {
        RunConfig c = config;
        apply_grid_point(c.selector, result.points[i]);
        validate(c.selector);
        const auto run = run_once(c, data);
        result.validation_f1[i] = run.validation.f1;
        result.test_f1[i] = run.test.report.f1;
    });
    auto key = [&](std::size_t i) {
        std::vector<double> v;
        for (const auto& [axis, value] : result.points[i].values) v.push_back(value);
        return v;
    };
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        const double f = result.validation_f1[i];
        const double best = result.validation_f1[result.best];
        if (f > best || (f == best && key(i) < key(result.best))) result.best = i;
    }
    return result;
}

GridResult cmd_grid_search(const GridSpec& grid, const RunConfig& config, const fs::path& corpus_dir,
                           const fs::path& out_dir, std::size_t jobs) {
    validate(config);
    const auto splits = load_splits(corpus_dir);
    const auto data = prepare(splits, config.featurizer);
    auto result = run_grid_search(grid, config, data, jobs);

    std::string grid_text;
    for (const auto& [axis, values] : grid.axes) {
        grid_text += axis + "=";
        for (double v : values) grid_text += format_double(v) + ",";
        grid_text += "\n";
    }
    const auto digest =
        hex64(stable_hash64("grid-search\n" + splits.digest + "\n" + grid_text + to_config_text(config)));

    ensure_dir(out_dir);
    std::string csv = "point";
    for (const auto& [axis, values] : grid.axes) csv += "," + axis;
    csv += ",val_f1,test_f1\n";
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        csv += std::to_string(i);
        for (const auto& [axis, v] : result.points[i].values) csv += "," + format_double(v);
        csv += "," + format_double(result.validation_f1[i]) + "," + format_double(result.test_f1[i]) + "\n";
    }
    write_text(out_dir / "grid_results.csv", csv);

    RunConfig best = config;
    apply_grid_point(best.selector, result.points[result.best]);
    write_text(out_dir / "best_config.conf", "# manifest_digest = " + digest + "\n" + to_config_text(best));
    ordered_json j;
    j["manifest_digest"] = digest;
    j["points"] = result.points.size();
    j["best_point"] = result.best;
    ordered_json best_values;
    for (const auto& [axis, v] : result.points[result.best].values) best_values[axis] = v;
    j["best"] = best_values;
    j["best_validation_f1"] = result.validation_f1[result.best];
    j["best_test_f1"] = result.test_f1[result.best];
    write_text(out_dir / "grid.json", j.dump(2) + "\n");
    write_manifest("grid-search", digest, &config, json{{"splits", splits.digest}}, out_dir,
                   {"grid_results.csv", "best_config.conf", "grid.json"});
    return result;
}

// ---- inspect-difficulty ---------------------------------------------------

namespace {

std::vector<std::size_t> hardest_order(std::span<const DifficultyRecord> records) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (records[a].difficulty != records[b].difficulty) return records[a].difficulty > records[b].difficulty;
        return records[a].sample_id < records[b].sample_id;
    });
    return order;
}

}  // namespace

Enrichment hard_decile_enrichment(std::span<const DifficultyRecord> records, const std::vector<CleanLabel>& clean) {
    std::map<std::string, bool> mislabeled;
    for (const auto& c : clean) mislabeled[c.id] = c.mislabeled();
    Enrichment e;
    e.total = records.size();
    if (records.empty()) return e;
    e.decile_size = (records.size() + 9) / 10;
    const auto order = hardest_order(records);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto it = mislabeled.find(records[order[rank]].sample_id);
        if (it == mislabeled.end()) {
            throw Error(ErrorKind::data, "sample '" + records[order[rank]].sample_id + "' missing from clean-label sidecar");
        }
        if (!it->second) continue;
        e.mislabeled_total += 1;
        if (rank < e.decile_size) e.mislabeled_in_decile += 1;
    }
    if (e.mislabeled_total > 0) {
        const double decile_rate = static_cast<double>(e.mislabeled_in_decile) / static_cast<double>(e.decile_size);
        const double base_rate = static_cast<double>(e.mislabeled_total) / static_cast<double>(e.total);
        e.factor = decile_rate / base_rate;
    }
    return e;
}

InspectResult inspect_difficulty(const Model& model, std::span<const double> params, const Dataset& data,
                                 HistogramFilter filter, std::size_t bins, std::size_t top_k,
                                 const std::vector<CleanLabel>* clean) {
    const auto predictions = predict_all(model, params, data);
    auto records = difficulty_batch(predictions, data.labels);
    for (std::size_t i = 0; i < records.size(); ++i) records[i].sample_id = data.ids[i];

    InspectResult r;
    r.samples = records.size();
    r.histogram = difficulty_histogram(records, bins, filter);
    const auto order = hardest_order(records);
    for (std::size_t i = 0; i < order.size() && r.hardest.size() < top_k; ++i) {
        const auto& rec = records[order[i]];
        if (filter == HistogramFilter::positives_only && rec.label != 1) continue;
        r.hardest.push_back(rec);
    }
    if (clean) r.enrichment = hard_decile_enrichment(records, *clean);
    return r;
}

InspectResult cmd_inspect_difficulty(const fs::path& checkpoint, const fs::path& corpus, const fs::path& out_dir,
                                     HistogramFilter filter, std::size_t bins,
                                     std::optional<FeaturizerConfig> expected_featurizer) {
    const auto ckpt = load_checkpoint(checkpoint);
    if (expected_featurizer && expected_featurizer->dimension != ckpt.config.featurizer.dimension) {
        throw Error(ErrorKind::data, "featurizer dimension " + std::to_string(expected_featurizer->dimension) +
                                         " does not match checkpoint dimension " +
                                         std::to_string(ckpt.config.featurizer.dimension));
    }
    const auto corpus_file = resolve_corpus_file(corpus, kTrainFile);
    const auto samples = load_jsonl(corpus_file);
    const auto data = featurize_corpus(samples, ckpt.config.featurizer);
    const auto model = model_for(ckpt.config);

    std::optional<std::vector<CleanLabel>> clean;
    if (fs::is_directory(corpus) && fs::exists(corpus / kCleanLabelsFile)) {
        clean = load_clean_labels(corpus / kCleanLabelsFile);
    }
    auto result = inspect_difficulty(*model, ckpt.state.best_params, data, filter, bins, 10,
                                     clean ? &*clean : nullptr);
    if (ckpt.state.age) result.final_lambda = ckpt.state.age->lambda;

    const auto corpus_digest = file_digest(corpus_file);
    const auto digest = hex64(stable_hash64("inspect-difficulty\n" + ckpt.manifest_digest + "\n" + corpus_digest +
                                            "\n" + std::to_string(bins) +
                                            (filter == HistogramFilter::positives_only ? "\npositives" : "\nall")));
    ensure_dir(out_dir);
    ordered_json hist;
    hist["manifest_digest"] = digest;
    hist["filter"] = filter == HistogramFilter::positives_only ? "positives-only" : "all";
    hist["bin_edges"] = result.histogram.bin_edges;
    hist["counts"] = result.histogram.counts;
    write_text(out_dir / "histogram.json", hist.dump(2) + "\n");

    ordered_json j;
    j["manifest_digest"] = digest;
    j["samples"] = result.samples;
    j["final_lambda"] = result.final_lambda ? json(*result.final_lambda) : json(nullptr);
    ordered_json hardest = ordered_json::array();
    for (const auto& r : result.hardest) {
        hardest.push_back({{"id", r.sample_id}, {"difficulty", r.difficulty}, {"label", r.label}, {"conf", r.conf}});
    }
    j["hardest"] = hardest;
    if (result.enrichment) {
        const auto& e = *result.enrichment;
        j["enrichment"] = {{"decile_size", e.decile_size},
                           {"mislabeled_in_decile", e.mislabeled_in_decile},
                           {"mislabeled_total", e.mislabeled_total},
                           {"total", e.total},
                           {"factor", e.factor}};
    }
    write_text(out_dir / "inspect.json", j.dump(2) + "\n");
    write_manifest("inspect-difficulty", digest, nullptr,
                   json{{"checkpoint", ckpt.manifest_digest}, {"corpus", corpus_digest}}, out_dir,
                   {"histogram.json", "inspect.json"});
    return result;
}

}  // namespace paced
