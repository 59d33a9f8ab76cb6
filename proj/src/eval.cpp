#include "scvd/eval.hpp"

#include "scvd/context.hpp"
#include "scvd/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace scvd {

namespace fs = std::filesystem;

DatasetManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
    DatasetManifest out;
    std::vector<std::string> violations;
    std::map<std::string, std::size_t> seen_ids;
    std::istringstream in{std::string(text)};
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = "line " + std::to_string(lineno);
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            violations.push_back(where + ": not a JSON object");
            continue;
        }
        std::vector<std::string> problems;
        auto str = [&](const char* key, bool required) -> std::optional<std::string> {
            if (!j.contains(key) || j[key].is_null()) {
                if (required) problems.push_back(std::string("missing '") + key + "'");
                return std::nullopt;
            }
            if (!j[key].is_string()) {
                problems.push_back(std::string("'") + key + "' must be a string");
                return std::nullopt;
            }
            return j[key].get<std::string>();
        };
        Instance inst;
        const auto id = str("id", true);
        const auto project = str("project", true);
        const auto contract = str("contract", true);
        const auto function = str("function", true);
        const auto category = str("category", true);
        const auto label = str("label", true);
        inst.signature = str("signature", false);
        inst.source = str("source", false);
        if (category && !parse_category(*category)) problems.push_back("unknown category '" + *category + "'");
        if (label && *label != "positive" && *label != "negative") problems.push_back("unknown label '" + *label + "'");
        if (id) {
            auto [it, fresh] = seen_ids.emplace(*id, lineno);
            if (!fresh) problems.push_back("duplicate id '" + *id + "' (first on line " + std::to_string(it->second) + ")");
        }
        if (!problems.empty()) {
            for (const auto& p : problems) violations.push_back(where + ": " + p);
            continue;
        }
        inst.id = *id;
        inst.project = *project;
        inst.project_path = fs::path(*project).is_absolute() ? fs::path(*project) : base_dir / *project;
        inst.contract = *contract;
        inst.function = *function;
        inst.category = *parse_category(*category);
        inst.positive = *label == "positive";
        out.instances.push_back(std::move(inst));
    }
    if (!violations.empty()) throw ManifestInvalid(std::move(violations));
    return out;
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

std::vector<Instance> EvalSet::instances() const {
    auto out = positives;
    out.insert(out.end(), negatives.begin(), negatives.end());
    return out;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

namespace {

// First `k` elements become a uniform random k-subset (partial Fisher-Yates).
void choose(std::vector<Instance>& pool, std::size_t k, std::mt19937_64& rng) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
}

bool by_id(const Instance& a, const Instance& b) { return a.id < b.id; }

}  // namespace

EvalSet sample_instances(const DatasetManifest& manifest, VulnCategory category, std::uint64_t seed, double neg_ratio,
                         std::optional<std::size_t> max_pos) {
    if (!(neg_ratio >= 1.0 && neg_ratio <= 2.0)) throw OutOfRange("negative ratio must be within [1, 2]");
    EvalSet set;
    set.category = category;
    set.seed = seed;
    set.neg_ratio = neg_ratio;
    std::vector<Instance> neg_pool;
    for (const auto& inst : manifest.instances) {
        if (inst.category != category) continue;
        (inst.positive ? set.positives : neg_pool).push_back(inst);
    }
    if (set.positives.empty())
        throw NoPositives("no positive instances for " + std::string(to_string(category)) + " in the manifest");
    std::sort(set.positives.begin(), set.positives.end(), by_id);
    std::sort(neg_pool.begin(), neg_pool.end(), by_id);

    std::mt19937_64 rng(seed);
    if (max_pos && *max_pos < set.positives.size()) {
        choose(set.positives, *max_pos, rng);
        std::sort(set.positives.begin(), set.positives.end(), by_id);
    }
    const auto wanted = static_cast<std::size_t>(std::llround(neg_ratio * static_cast<double>(set.positives.size())));
    if (neg_pool.size() < wanted) {
        set.warnings.push_back("negative pool has " + std::to_string(neg_pool.size()) + " instances, " +
                               std::to_string(wanted) + " requested; using all of them");
    }
    choose(neg_pool, wanted, rng);
    std::sort(neg_pool.begin(), neg_pool.end(), by_id);
    set.negatives = std::move(neg_pool);
    return set;
}

ConfusionMatrix tally(const std::vector<InstanceRecord>& records) {
    ConfusionMatrix m;
    for (const auto& r : records) {
        if (!r.verdict) continue;
        const bool flagged = r.verdict->is_vulnerable;
        if (r.positive) (flagged ? m.tp : m.fn)++;
        else (flagged ? m.fp : m.tn)++;
    }
    return m;
}

namespace {

InstanceRecord evaluate(const Instance& inst, const ProjectModel* model, const std::string& load_error,
                        const PipelineConfig& config) {
    InstanceRecord rec;
    rec.id = inst.id;
    rec.category = inst.category;
    rec.positive = inst.positive;
    std::string stage = "load";
    try {
        if (!model) throw Error(load_error);
        stage = "locate";
        const auto target = find_function(*model, inst.contract, inst.function, inst.signature);
        stage = "extract";
        const auto bundle = extract_context(*model, target, inst.category, config.depth);
        AssembledPrompt prompt;
        if (config.store) {
            stage = "assemble";
            prompt = assemble_prompt(inst.category, bundle, *config.store, {config.budget, config.allow_zero_shot});
            rec.dropped = prompt.dropped;
        } else if (config.backend.kind == BackendKind::Llm) {
            throw ConfigError("the llm backend needs an example store");
        }
        stage = "detect";
        rec.verdict = detect(config.backend, inst.category, prompt, *model, target, config.sleep);
    } catch (const std::exception& e) {
        rec.verdict.reset();
        rec.stage = stage;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

EvalResult run_eval(const EvalSet& set, const PipelineConfig& config) {
    const auto instances = set.instances();

    // load each project once, up front; models are read-only afterwards
    std::map<fs::path, std::shared_ptr<ProjectModel>> models;
    std::map<fs::path, std::string> load_errors;
    for (const auto& inst : instances) {
        if (models.count(inst.project_path) || load_errors.count(inst.project_path)) continue;
        try {
            auto m = std::make_shared<ProjectModel>(load_project(inst.project_path, config.filter));
            models.emplace(inst.project_path, std::move(m));
        } catch (const std::exception& e) {
            load_errors.emplace(inst.project_path, e.what());
        }
    }
    auto run_one = [&](const Instance& inst) {
        auto it = models.find(inst.project_path);
        const ProjectModel* model = it == models.end() ? nullptr : it->second.get();
        const auto err = model ? std::string{} : load_errors[inst.project_path];
        return evaluate(inst, model, err, config);
    };

    EvalResult result;
    result.records.resize(instances.size());
    const std::size_t workers =
        config.backend.kind == BackendKind::Llm ? std::max<std::size_t>(1, std::min(config.concurrency, instances.size())) : 1;
    if (workers <= 1) {
        for (std::size_t i = 0; i < instances.size(); ++i) result.records[i] = run_one(instances[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < instances.size(); i = next++) result.records[i] = run_one(instances[i]);
            });
        }
        for (auto& t : pool) t.join();
    }
    std::sort(result.records.begin(), result.records.end(),
              [](const InstanceRecord& a, const InstanceRecord& b) { return a.id < b.id; });
    result.matrix = tally(result.records);
    result.errors = static_cast<std::size_t>(
        std::count_if(result.records.begin(), result.records.end(), [](const auto& r) { return !r.verdict; }));
    return result;
}

Metrics compute_metrics(const ConfusionMatrix& m) {
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    return {ratio(m.tp, m.tp + m.fn), ratio(m.tn, m.tn + m.fp), ratio(m.tp, m.tp + m.fp),
            ratio(m.tp + m.tn, m.total())};
}

namespace {

std::string fixed2(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

nlohmann::ordered_json metric_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["positive_recall"] = metric_json(m.positive_recall);
    j["negative_recall"] = metric_json(m.negative_recall);
    j["precision"] = metric_json(m.precision);
    j["accuracy"] = metric_json(m.accuracy);
    return j;
}

}  // namespace

Report render_report(const std::map<VulnCategory, CategoryReport>& rows) {
    Report report;
    using Field = std::optional<double> Metrics::*;
    const Field fields[] = {&Metrics::positive_recall, &Metrics::negative_recall, &Metrics::precision,
                            &Metrics::accuracy};
    for (auto f : fields) {
        double sum = 0;
        std::size_t n = 0;
        for (const auto& [cat, row] : rows) {
            if (const auto& v = row.metrics.*f) {
                sum += *v;
                ++n;
            }
        }
        if (n) report.average.*f = sum / static_cast<double>(n);
    }

    std::ostringstream md;
    md << "| Category | Positive recall | Negative recall | Precision | Accuracy | TP | FN | TN | FP | Errors |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|\n";
    nlohmann::ordered_json j;
    auto cats = nlohmann::ordered_json::array();
    for (const auto& [cat, row] : rows) {
        const auto& m = row.metrics;
        md << "| " << to_string(cat) << " | " << fixed2(m.positive_recall) << " | " << fixed2(m.negative_recall) << " | "
           << fixed2(m.precision) << " | " << fixed2(m.accuracy) << " | ";
        if (row.matrix) {
            md << row.matrix->tp << " | " << row.matrix->fn << " | " << row.matrix->tn << " | " << row.matrix->fp;
        } else {
            md << "  |  |  | ";
        }
        md << " | " << row.errors << " |\n";

        nlohmann::ordered_json c;
        c["category"] = std::string(to_string(cat));
        c["metrics"] = metrics_json(m);
        if (row.matrix) {
            c["confusion"] = {{"tp", row.matrix->tp}, {"fn", row.matrix->fn}, {"tn", row.matrix->tn},
                              {"fp", row.matrix->fp}};
        }
        c["errors"] = row.errors;
        c["warnings"] = row.warnings;
        cats.push_back(std::move(c));
    }
    const auto& a = report.average;
    md << "| **Average** | " << fixed2(a.positive_recall) << " | " << fixed2(a.negative_recall) << " | "
       << fixed2(a.precision) << " | " << fixed2(a.accuracy) << " |  |  |  |  |  |\n";
    report.markdown = md.str();

    auto rounded = [](const std::optional<double>& v) -> nlohmann::ordered_json {
        if (!v) return nullptr;
        return std::round(*v * 100.0) / 100.0;
    };
    j["categories"] = std::move(cats);
    j["average"] = {{"positive_recall", rounded(a.positive_recall)},
                    {"negative_recall", rounded(a.negative_recall)},
                    {"precision", rounded(a.precision)},
                    {"accuracy", rounded(a.accuracy)}};
    j["averaging"] = "macro: unweighted mean over categories with a defined value";
    report.json = j.dump(2) + "\n";
    return report;
}

}  // namespace scvd
