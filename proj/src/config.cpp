#include "paced/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace paced {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::string_view expected) {
    throw Error(ErrorKind::config,
                "config key '" + key + "': expected " + std::string(expected) + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) bad_value(key, value, "a finite number");
    return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        bad_value(key, value, "a non-negative integer");
    }
    return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(to_u64(key, value));
}

std::vector<std::string> split_commas(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ",";
        out += parts[i];
    }
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};


template <typename Getter>
Field make_double(Getter access) {
    return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = to_double(k, v); },
            [access](const RunConfig& c) { return format_double(access(c)); }};
}

template <typename Getter>
Field make_size(Getter access) {
    return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = to_size(k, v); },
            [access](const RunConfig& c) { return std::to_string(access(c)); }};
}

template <typename Getter>
Field make_u64(Getter access) {
    return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = to_u64(k, v); },
            [access](const RunConfig& c) { return std::to_string(access(c)); }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["seed"] = make_u64([](auto& c) -> auto& { return c.seed; });
        t["mode"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_train_mode(trim(v)); },
                     [](const RunConfig& c) { return std::string(to_string(c.mode)); }};

        t["selector.r_init"] = make_double([](auto& c) -> auto& { return c.selector.r_init; });
        t["selector.k"] = make_double([](auto& c) -> auto& { return c.selector.k; });
        t["selector.gamma0"] = make_double([](auto& c) -> auto& { return c.selector.gamma0; });
        t["selector.alpha"] = make_double([](auto& c) -> auto& { return c.selector.alpha; });
        t["selector.r_max"] = make_double([](auto& c) -> auto& { return c.selector.r_max; });
        t["selector.local_window"] = make_double([](auto& c) -> auto& { return c.selector.local_window; });
        t["selector.min_select_ratio"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                if (trim(v).empty() || trim(v) == "auto") {
                    c.selector.min_select_ratio.reset();
                } else {
                    c.selector.min_select_ratio = to_double(k, v);
                }
            },
            [](const RunConfig& c) {
                return c.selector.min_select_ratio ? format_double(*c.selector.min_select_ratio) : std::string("auto");
            }};

        t["training.max_epochs"] = make_size([](auto& c) -> auto& { return c.training.max_epochs; });
        t["training.batch_size"] = make_size([](auto& c) -> auto& { return c.training.batch_size; });
        t["training.patience"] = make_size([](auto& c) -> auto& { return c.training.patience; });
        t["training.min_delta"] = make_double([](auto& c) -> auto& { return c.training.min_delta; });
        t["training.learning_rate"] =
            make_double([](auto& c) -> auto& { return c.training.optimizer.learning_rate; });
        t["training.beta1"] = make_double([](auto& c) -> auto& { return c.training.optimizer.beta1; });
        t["training.beta2"] = make_double([](auto& c) -> auto& { return c.training.optimizer.beta2; });
        t["training.epsilon"] = make_double([](auto& c) -> auto& { return c.training.optimizer.epsilon; });
        t["training.weight_decay"] =
            make_double([](auto& c) -> auto& { return c.training.optimizer.weight_decay; });
        t["training.force_lambda"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                if (trim(v).empty() || trim(v) == "none") {
                    c.training.force_lambda.reset();
                } else {
                    c.training.force_lambda = to_double(k, v);
                }
            },
            [](const RunConfig& c) {
                return c.training.force_lambda ? format_double(*c.training.force_lambda) : std::string("none");
            }};

        t["model.kind"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.model.kind = trim(v); },
                           [](const RunConfig& c) { return c.model.kind; }};
        t["model.hidden"] = make_size([](auto& c) -> auto& { return c.model.hidden; });

        t["featurizer.dimension"] = make_size([](auto& c) -> auto& { return c.featurizer.dimension; });
        t["featurizer.max_tokens"] = make_size([](auto& c) -> auto& { return c.featurizer.max_tokens; });
        t["featurizer.hash_seed"] = make_u64([](auto& c) -> auto& { return c.featurizer.hash_seed; });
        t["featurizer.ngram_orders"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                c.featurizer.unigrams = false;
                c.featurizer.bigrams = false;
                for (const auto& part : split_commas(v)) {
                    if (part == "1") {
                        c.featurizer.unigrams = true;
                    } else if (part == "2") {
                        c.featurizer.bigrams = true;
                    } else {
                        bad_value(k, v, "a subset of {1,2}");
                    }
                }
            },
            [](const RunConfig& c) {
                std::vector<std::string> parts;
                if (c.featurizer.unigrams) parts.emplace_back("1");
                if (c.featurizer.bigrams) parts.emplace_back("2");
                return join(parts);
            }};

        t["eval.threshold"] = make_double([](auto& c) -> auto& { return c.eval.threshold; });
        t["eval.top_n"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                c.eval.top_n_values.clear();
                if (trim(v).empty()) return;
                for (const auto& part : split_commas(v)) c.eval.top_n_values.push_back(to_size(k, part));
            },
            [](const RunConfig& c) {
                std::vector<std::string> parts;
                for (auto n : c.eval.top_n_values) parts.push_back(std::to_string(n));
                return join(parts);
            }};
        t["eval.tau_grid"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) { c.tau_grid = parse_double_list(v, k); },
            [](const RunConfig& c) {
                std::vector<std::string> parts;
                for (double d : c.tau_grid) parts.push_back(format_double(d));
                return join(parts);
            }};

        t["synth.n_samples"] = make_size([](auto& c) -> auto& { return c.synth.n_samples; });
        t["synth.positive_ratio"] = make_double([](auto& c) -> auto& { return c.synth.positive_ratio; });
        t["synth.label_noise_rate"] = make_double([](auto& c) -> auto& { return c.synth.label_noise_rate; });
        t["synth.unrelated_noise_rate"] =
            make_double([](auto& c) -> auto& { return c.synth.unrelated_noise_rate; });
        t["synth.seed"] = make_u64([](auto& c) -> auto& { return c.synth.seed; });
        t["synth.template_mix"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                const auto w = parse_double_list(v, k);
                if (w.size() != kTemplateFamilies) bad_value(k, v, "three comma-separated weights");
                std::copy(w.begin(), w.end(), c.synth.template_mix.begin());
            },
            [](const RunConfig& c) {
                std::vector<std::string> parts;
                for (double d : c.synth.template_mix) parts.push_back(format_double(d));
                return join(parts);
            }};

        t["split.ratios"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                const auto r = parse_double_list(v, k);
                if (r.size() != 3) bad_value(k, v, "three comma-separated ratios");
                std::copy(r.begin(), r.end(), c.split_ratios.begin());
            },
            [](const RunConfig& c) {
                std::vector<std::string> parts;
                for (double d : c.split_ratios) parts.push_back(format_double(d));
                return join(parts);
            }};
        return t;
    }();
    return table;
}

std::string env_name(const std::string& key) {
    std::string out(kEnvPrefix);
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (key[i] == '.') {
            out += "__";
        } else {
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(key[i])));
        }
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, value);
        if (std::strtod(shorter, nullptr) == value) return shorter;
    }
    return buf;
}

std::vector<double> parse_double_list(std::string_view text, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split_commas(text)) out.push_back(to_double(key, part));
    return out;
}

KeyValues parse_key_values(std::string_view text, const std::string& source_name) {
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::config, source_name + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw Error(ErrorKind::config, source_name + ":" + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) {
            throw Error(ErrorKind::config, source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str(), path.string());
}

void apply_key_values(RunConfig& config, const KeyValues& values) {
    const auto& table = fields();
    for (const auto& [key, value] : values) {
        if (key.rfind("grid.", 0) == 0) continue;
        const auto it = table.find(key);
        if (it == table.end()) throw Error(ErrorKind::config, "unknown config key '" + key + "'");
        it->second.set(config, key, value);
    }
}

void apply_environment(RunConfig& config) {
    for (const auto& [key, field] : fields()) {
        if (const char* v = std::getenv(env_name(key).c_str())) field.set(config, key, v);
    }
}

void validate(const RunConfig& c) {
    validate(c.selector);
    validate(c.training);
    validate(c.featurizer);
    validate(c.eval);
    validate(c.synth);
    make_model(c.model, c.featurizer.dimension);
    for (double t : c.tau_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::config, "eval.tau_grid values must lie in [0,1]");
    }
    double sum = 0.0;
    for (double r : c.split_ratios) {
        if (!(r > 0.0)) throw Error(ErrorKind::config, "split.ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::config, "split.ratios must sum to 1");
}

KeyValues to_key_values(const RunConfig& config) {
    KeyValues kv;
    for (const auto& [key, field] : fields()) kv[key] = field.get(config);
    return kv;
}

std::string to_config_text(const RunConfig& config) {
    std::string out;
    for (const auto& [key, value] : to_key_values(config)) out += key + " = " + value + "\n";
    return out;
}

std::string config_digest(const RunConfig& config) { return hex64(stable_hash64(to_config_text(config))); }

std::vector<std::string> known_config_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, field] : fields()) keys.push_back(key);
    return keys;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig config;
    if (!path.empty()) apply_key_values(config, load_key_values(path));
    apply_environment(config);
    validate(config);
    return config;
}

GridSpec GridSpec::standard() {
    GridSpec g;
    g.axes["r_init"] = {0.05, 0.1, 0.15};
    g.axes["k"] = {5, 10, 15};
    g.axes["gamma0"] = {0.02, 0.025, 0.03};
    g.axes["alpha"] = {0.2, 0.3, 0.4};
    g.axes["r_max"] = {0.05, 0.1, 0.15};
    return g;
}

GridSpec parse_grid_spec(const KeyValues& values) {
    GridSpec g;
    for (const auto& [key, value] : values) {
        if (key.rfind("grid.", 0) != 0) continue;
        g.axes[key.substr(5)] = parse_double_list(value, key);
    }
    validate(g);
    return g;
}

GridSpec load_grid_spec(const std::filesystem::path& path) { return parse_grid_spec(load_key_values(path)); }

void apply_grid_point(SelectorConfig& selector, const GridPoint& point) {
    for (const auto& [axis, value] : point.values) {
        if (axis == "r_init") selector.r_init = value;
        else if (axis == "k") selector.k = value;
        else if (axis == "gamma0") selector.gamma0 = value;
        else if (axis == "alpha") selector.alpha = value;
        else if (axis == "r_max") selector.r_max = value;
        else if (axis == "local_window") selector.local_window = value;
        else throw Error(ErrorKind::config, "unknown grid axis '" + axis + "'");
    }
}

void validate(const GridSpec& grid) {
    if (grid.axes.empty()) throw Error(ErrorKind::config, "grid spec has no axes");
    for (const auto& [axis, values] : grid.axes) {
        if (values.empty()) throw Error(ErrorKind::config, "grid axis '" + axis + "' has no values");
        for (double v : values) {
            SelectorConfig probe;
            apply_grid_point(probe, GridPoint{{{axis, v}}});
            validate(probe);
        }
    }
}

std::vector<GridPoint> enumerate(const GridSpec& grid) {
    std::vector<GridPoint> points(1);
    for (const auto& [axis, values] : grid.axes) {
        std::vector<GridPoint> next;
        next.reserve(points.size() * values.size());
        for (const auto& p : points) {
            for (double v : values) {
                GridPoint q = p;
                q.values.emplace_back(axis, v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

}  // namespace paced
