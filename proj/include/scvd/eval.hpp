#pragma once

#include "scvd/backends.hpp"
#include "scvd/category.hpp"
#include "scvd/project.hpp"
#include "scvd/prompt.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace scvd {

struct Instance {
    std::string id;
    std::string project;  // as written in the manifest
    std::filesystem::path project_path;  // resolved against the manifest directory
    std::string contract;
    std::string function;
    std::optional<std::string> signature;
    VulnCategory category = VulnCategory::Reentrancy;
    bool positive = false;
    std::optional<std::string> source;  // originating report id or provenance note
};

struct DatasetManifest {
    std::vector<Instance> instances;  // file order
};

/// JSONL, one instance per line: id, project, contract, function, category,
/// label ("positive" | "negative"), optional signature and source. Blank
/// lines are skipped. Throws ManifestInvalid listing each bad line by number,
/// IoError when the file cannot be read.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);

struct EvalSet {
    VulnCategory category = VulnCategory::Reentrancy;
    std::uint64_t seed = 0;
    double neg_ratio = 1.0;
    std::vector<Instance> positives;  // sorted by id
    std::vector<Instance> negatives;  // sorted by id
    std::vector<std::string> warnings;

    std::vector<Instance> instances() const;  // positives then negatives
    std::size_t size() const noexcept { return positives.size() + negatives.size(); }
};

/// Uniform integer in [0, n) by rejection from mt19937_64 output, so results
/// do not depend on the standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// All positives of `category` (a seeded random subset when `max_pos` caps
/// them) plus round(neg_ratio * P) negatives drawn without replacement.
/// A short negative pool is taken whole and noted in `warnings`. The pool is
/// sorted by id first, so manifest order does not matter. Throws OutOfRange
/// for a ratio outside [1, 2] and NoPositives when the category has none.
EvalSet sample_instances(const DatasetManifest& manifest, VulnCategory category, std::uint64_t seed, double neg_ratio,
                         std::optional<std::size_t> max_pos = std::nullopt);

struct ConfusionMatrix {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

    std::size_t total() const noexcept { return tp + fn + tn + fp; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct InstanceRecord {
    std::string id;
    VulnCategory category = VulnCategory::Reentrancy;
    bool positive = false;
    std::optional<Verdict> verdict;
    std::string stage;  // pipeline stage that failed, empty on success
    std::string error;
    std::vector<std::string> dropped;  // prompt truncation report
};

struct PipelineConfig {
    BackendConfig backend;
    const ExampleStore* store = nullptr;  // required for the llm backend
    FilterConfig filter = FilterConfig::defaults();
    int depth = kDefaultCallstackDepth;
    std::size_t budget = kDefaultTokenBudget;
    bool allow_zero_shot = false;
    std::size_t concurrency = 4;  // requests in flight for the llm backend
    Sleeper sleep = real_sleep;
};

struct EvalResult {
    std::vector<InstanceRecord> records;  // sorted by id
    ConfusionMatrix matrix;
    std::size_t errors = 0;
};

/// Verdict-vs-label counts over the records that have a verdict.
ConfusionMatrix tally(const std::vector<InstanceRecord>& records);

/// Runs load, extract, assemble, detect for each instance. Failures are
/// recorded per instance and left out of the matrix.
EvalResult run_eval(const EvalSet& set, const PipelineConfig& config);

struct Metrics {
    std::optional<double> positive_recall, negative_recall, precision, accuracy;
};

/// Undefined (nullopt) whenever a denominator is zero.
Metrics compute_metrics(const ConfusionMatrix& m);

struct CategoryReport {
    Metrics metrics;
    std::optional<ConfusionMatrix> matrix;
    std::size_t errors = 0;
    std::vector<std::string> warnings;
};

struct Report {
    std::string markdown;
    std::string json;
    Metrics average;  // unrounded macro average over defined values
};

/// One row per category plus a macro-average row (unweighted mean of the
/// defined values, shown to two decimals).
Report render_report(const std::map<VulnCategory, CategoryReport>& rows);

}  // namespace scvd
