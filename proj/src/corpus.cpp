#include "paced/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace paced {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, 24> kWords = {
    "buf",  "data", "len",  "idx",   "ptr",  "node", "item", "count",
    "size", "val",  "tmp",  "ctx",   "req",  "pkt",  "entry", "slot",
    "cfg",  "msg",  "rec",  "blk",   "hdr",  "seg",  "key",  "frame"};

constexpr std::array<std::string_view, 12> kVerbs = {
    "read", "write", "parse", "load", "store", "fill",
    "copy", "init",  "update", "push", "decode", "emit"};

class CodeWriter {
public:
    explicit CodeWriter(Rng& rng) : rng_(rng) {}

    std::string word() { return std::string(kWords[rng_.below(kWords.size())]); }

    std::string name() {
        std::string n = word() + "_" + word();
        if (rng_.below(2) == 0) n += std::to_string(rng_.below(10));
        return n;
    }

    std::string function_name() {
        return std::string(kVerbs[rng_.below(kVerbs.size())]) + "_" + word() + "_" + word();
    }

    int constant(int lo, int hi) { return lo + static_cast<int>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1))); }

    std::string fillers() {
        std::string out;
        const auto n = rng_.below(4);
        for (std::uint64_t i = 0; i < n; ++i) {
            switch (rng_.below(5)) {
                case 0: out += "    int " + name() + " = " + std::to_string(constant(0, 255)) + ";\n"; break;
                case 1: out += "    unsigned " + name() + " = " + std::to_string(constant(1, 64)) + "u << 2;\n"; break;
                case 2: out += "    log_debug(\"" + word() + " %d\", " + std::to_string(constant(0, 99)) + ");\n"; break;
                case 3: {
                    const auto v = name();
                    out += "    int " + v + " = " + std::to_string(constant(0, 9)) + ";\n";
                    out += "    if (" + v + " > " + std::to_string(constant(10, 99)) + ") {\n        " + v + " = 0;\n    }\n";
                    break;
                }
                default: out += "    /* " + word() + " " + word() + " */\n"; break;
            }
        }
        return out;
    }

    std::string render(TemplateFamily family, bool vulnerable) {
        switch (family) {
            case TemplateFamily::array_index: {
                const auto fn = function_name(), arr = name(), idx = name(), val = name(), tmp = name();
                std::string s = "int " + fn + "(int *" + arr + ", int " + idx + ", int " + val + ") {\n";
                s += "    int " + tmp + " = " + val + " * " + std::to_string(constant(2, 9)) + ";\n";
                s += fillers();
                if (!vulnerable) {
                    s += "    if (" + idx + " < 0 || " + idx + " >= " + std::to_string(constant(16, 4096)) +
                         ") {\n        return -1;\n    }\n";
                }
                s += "    " + arr + "[" + idx + "] = " + tmp + ";\n";
                s += "    return " + tmp + " + " + std::to_string(constant(0, 9)) + ";\n}\n";
                return s;
            }
            case TemplateFamily::null_deref: {
                const auto fn = function_name(), type = name(), ptr = name(), val = name();
                const auto f1 = word(), f2 = word();
                std::string s = "int " + fn + "(struct " + type + " *" + ptr + ", int " + val + ") {\n";
                s += fillers();
                if (!vulnerable) s += "    if (" + ptr + " == NULL) {\n        return -1;\n    }\n";
                s += "    " + ptr + "->" + f1 + " = " + val + ";\n";
                s += "    return " + ptr + "->" + f2 + " + " + std::to_string(constant(0, 9)) + ";\n}\n";
                return s;
            }
            case TemplateFamily::alloc_overflow: {
                const auto fn = function_name(), count = name(), elem = name(), buf = name();
                std::string s = "char *" + fn + "(size_t " + count + ", size_t " + elem + ") {\n";
                s += fillers();
                if (!vulnerable) {
                    s += "    if (" + elem + " != 0 && " + count + " > SIZE_MAX / " + elem +
                         ") {\n        return NULL;\n    }\n";
                }
                s += "    char *" + buf + " = malloc(" + count + " * " + elem + ");\n";
                s += "    if (!" + buf + ") {\n        return NULL;\n    }\n";
                s += "    memset(" + buf + ", 0, " + count + " * " + elem + ");\n";
                s += "    return " + buf + ";\n}\n";
                return s;
            }
        }
        return {};
    }

    TemplateFamily family(const std::array<double, kTemplateFamilies>& mix) {
        const double u = rng_.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < mix.size(); ++i) {
            acc += mix[i];
            if (u < acc) return static_cast<TemplateFamily>(i);
        }
        for (std::size_t i = mix.size(); i-- > 0;) {
            if (mix[i] > 0.0) return static_cast<TemplateFamily>(i);
        }
        return TemplateFamily::array_index;
    }

private:
    Rng& rng_;
};

std::size_t rounded_count(double rate, std::size_t n) {
    return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

std::string id_for(std::size_t i) {
    std::string digits = std::to_string(i);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return "syn-" + digits;
}

// Largest-remainder allocation of n items over the ratios; ties go to the
// earlier split.
std::array<std::size_t, 3> allocate(std::size_t n, const std::array<double, 3>& ratios) {
    std::array<std::size_t, 3> out{};
    std::array<double, 3> frac{};
    std::size_t used = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double exact = ratios[i] * static_cast<double>(n);
        double whole = std::floor(exact + 1e-9);
        out[i] = static_cast<std::size_t>(whole);
        frac[i] = exact - whole;
        used += out[i];
    }
    while (used < n) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i) {
            if (frac[i] > frac[best] + 1e-12) best = i;
        }
        out[best] += 1;
        frac[best] = -1.0;
        used += 1;
    }
    return out;
}

}  // namespace

std::string_view category_of(TemplateFamily family) {
    switch (family) {
        case TemplateFamily::array_index: return "CWE-129";
        case TemplateFamily::null_deref: return "CWE-476";
        case TemplateFamily::alloc_overflow: return "CWE-190";
    }
    return "";
}

void validate(const SynthConfig& c) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
    if (c.n_samples == 0) fail("n_samples must be positive");
    if (!(c.positive_ratio > 0.0 && c.positive_ratio < 1.0)) fail("positive_ratio must be in (0,1)");
    if (!(c.label_noise_rate >= 0.0 && c.label_noise_rate <= 1.0)) fail("label_noise_rate must be in [0,1]");
    if (!(c.unrelated_noise_rate >= 0.0 && c.unrelated_noise_rate <= 1.0)) {
        fail("unrelated_noise_rate must be in [0,1]");
    }
    double sum = 0.0;
    for (double w : c.template_mix) {
        if (!(w >= 0.0)) fail("template_mix weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("template_mix weights must sum to 1");
}

SyntheticCorpus generate(const SynthConfig& config) {
    validate(config);
    Rng rng(config.seed);
    CodeWriter writer(rng);
    const std::size_t n = config.n_samples;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> template_label(n, 0);
    const std::size_t positives = rounded_count(config.positive_ratio, n);
    for (std::size_t i = 0; i < positives; ++i) template_label[order[i]] = 1;

    SyntheticCorpus out;
    out.samples.reserve(n);
    out.clean.reserve(n);
    std::vector<TemplateFamily> families(n);
    for (std::size_t i = 0; i < n; ++i) {
        families[i] = writer.family(config.template_mix);
        Sample s;
        s.id = id_for(i);
        s.code = writer.render(families[i], template_label[i] == 1);
        s.label = template_label[i];
        s.category = std::string(category_of(families[i]));
        s.project = "synthetic";
        out.samples.push_back(std::move(s));
        out.clean.push_back({out.samples.back().id, template_label[i], template_label[i], false, false});
    }

    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t flips = rounded_count(config.label_noise_rate, n);
    for (std::size_t i = 0; i < flips; ++i) {
        auto& s = out.samples[order[i]];
        s.label = 1 - s.label;
        out.clean[order[i]].flipped = true;
        out.clean[order[i]].label = s.label;
    }

    std::vector<std::size_t> labeled_positive;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.samples[i].label == 1) labeled_positive.push_back(i);
    }
    rng.shuffle(labeled_positive);
    const std::size_t unrelated = rounded_count(config.unrelated_noise_rate, labeled_positive.size());
    for (std::size_t i = 0; i < unrelated; ++i) {
        const std::size_t idx = labeled_positive[i];
        const auto family = writer.family(config.template_mix);
        out.samples[idx].code = writer.render(family, false);
        out.clean[idx].unrelated = true;
        out.clean[idx].clean_label = 0;
    }
    return out;
}

CorpusSplits split(const Corpus& corpus, std::array<double, 3> ratios, std::uint64_t seed) {
    if (corpus.size() < 3) throw Error(ErrorKind::data, "corpus must hold at least 3 samples to split");
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw Error(ErrorKind::invalid_argument, "split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::invalid_argument, "split ratios must sum to 1");

    Rng rng(seed);
    std::array<std::vector<std::size_t>, 3> parts;
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus[i].label == cls) members.push_back(i);
        }
        rng.shuffle(members);
        const auto sizes = allocate(members.size(), ratios);
        std::size_t pos = 0;
        for (std::size_t p = 0; p < 3; ++p) {
            parts[p].insert(parts[p].end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                            members.begin() + static_cast<std::ptrdiff_t>(pos + sizes[p]));
            pos += sizes[p];
        }
    }
    CorpusSplits out;
    std::array<Corpus*, 3> targets{&out.train, &out.validation, &out.test};
    for (std::size_t p = 0; p < 3; ++p) {
        rng.shuffle(parts[p]);
        for (auto i : parts[p]) targets[p]->push_back(corpus[i]);
    }
    return out;
}

Corpus parse_jsonl(std::istream& in, const std::string& source_name) {
    Corpus corpus;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::data, source_name + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) fail("expected a JSON object");
        if (!obj.contains("id") || !obj["id"].is_string()) fail("missing string field 'id'");
        if (!obj.contains("code") || !obj["code"].is_string()) fail("missing string field 'code'");
        if (!obj.contains("label") || !obj["label"].is_number_integer()) fail("missing integer field 'label'");
        Sample s;
        s.id = obj["id"].get<std::string>();
        s.code = obj["code"].get<std::string>();
        const auto label = obj["label"].get<std::int64_t>();
        if (label != 0 && label != 1) fail("label must be 0 or 1, got " + std::to_string(label));
        s.label = static_cast<int>(label);
        for (const char* key : {"category", "project"}) {
            if (!obj.contains(key) || obj[key].is_null()) continue;
            if (!obj[key].is_string()) fail(std::string("field '") + key + "' must be a string");
            (std::string_view(key) == "category" ? s.category : s.project) = obj[key].get<std::string>();
        }
        if (!seen.insert(s.id).second) fail("duplicate id '" + s.id + "'");
        corpus.push_back(std::move(s));
    }
    return corpus;
}

Corpus load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open corpus file " + path.string());
    return parse_jsonl(in, path.string());
}

void write_jsonl(std::ostream& out, const Corpus& corpus) {
    for (const auto& s : corpus) {
        ordered_json obj;
        obj["id"] = s.id;
        obj["code"] = s.code;
        obj["label"] = s.label;
        if (s.category) obj["category"] = *s.category;
        if (s.project) obj["project"] = *s.project;
        out << obj.dump() << '\n';
    }
}

void save_jsonl(const std::filesystem::path& path, const Corpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    write_jsonl(out, corpus);
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::vector<CleanLabel> load_clean_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open clean-label sidecar " + path.string());
    std::vector<CleanLabel> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto obj = json::parse(line);
            CleanLabel c;
            c.id = obj.at("id").get<std::string>();
            c.clean_label = obj.at("clean_label").get<int>();
            c.label = obj.at("label").get<int>();
            c.flipped = obj.at("flipped").get<bool>();
            c.unrelated = obj.at("unrelated").get<bool>();
            out.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::data, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void save_clean_labels(const std::filesystem::path& path, const std::vector<CleanLabel>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    for (const auto& c : labels) {
        ordered_json obj;
        obj["id"] = c.id;
        obj["clean_label"] = c.clean_label;
        obj["label"] = c.label;
        obj["flipped"] = c.flipped;
        obj["unrelated"] = c.unrelated;
        out << obj.dump() << '\n';
    }
}

}  // namespace paced
