#pragma once

#include "scvd/category.hpp"
#include "scvd/context.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scvd {

struct Example {
    std::string name;  // file stem
    bool positive = false;
    std::string code;
    std::string explanation;
    std::string source;
};

struct CategoryPrompts {
    std::optional<std::string> instruction;  // instruction.md, verbatim
    std::optional<std::string> output;       // output.md, overrides the default response schema
    std::vector<Example> examples;           // sorted by file name

    std::size_t count(bool positive) const;
};

/// Per-category instructions and few-shot examples, laid out as
/// `<root>/<category>/instruction.md` and `<root>/<category>/examples/*.json`.
struct ExampleStore {
    std::filesystem::path root;
    std::map<VulnCategory, CategoryPrompts> categories;

    const CategoryPrompts* find(VulnCategory c) const;
};

/// Validates every example file. Throws StoreInvalid listing each problem
/// (bad JSON, unknown label, missing code or explanation, unknown category
/// directory, no categories at all).
ExampleStore load_example_store(const std::filesystem::path& dir);

/// Directory of the bundled store; SCVD_PROMPTS_DIR overrides it.
std::filesystem::path default_prompts_dir();

/// ceil(bytes / 4)
inline std::size_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

inline constexpr std::size_t kDefaultTokenBudget = 4000;

/// Instruction text for `category`, exactly as stored. Throws
/// TemplateMissing for an unknown category or a missing instruction file.
std::string render_instruction(const ExampleStore& store, std::string_view category);

/// Response schema used when a category has no `output.md`.
std::string default_output_schema();

struct AssembleOptions {
    std::size_t budget = kDefaultTokenBudget;
    bool allow_zero_shot = false;
};

struct AssembledPrompt {
    std::string instruction;
    std::string context;
    std::string input;
    std::string output;
    std::string text;  // the four sections joined under their headers
    std::size_t token_count = 0;
    std::vector<std::string> dropped;  // truncation report, in drop order
    ContextBundle bundle;              // the bundle as sent, after truncation
    std::size_t examples_used = 0;
};

inline constexpr std::string_view kSectionNames[] = {"Instruction", "Context", "Input", "Output"};

/// Builds the four-section prompt. When over budget, drops whole pieces in
/// this order until it fits: events, imports, callstack entries from the
/// deepest, modifiers_codes, internal_states not named in the target
/// function, examples (positives first, negatives last), then the remaining
/// non-target fields. The instruction, output schema and target function
/// are never cut. Throws BudgetImpossible when even that does not fit and
/// ZeroShotRefused when the store lacks a positive or a negative example
/// (unless allowed).
AssembledPrompt assemble_prompt(VulnCategory category, const ContextBundle& bundle, const ExampleStore& store,
                                const AssembleOptions& options = {});

}  // namespace scvd
