#include "scvd/prompt.hpp"

#include "scvd/errors.hpp"
#include "scvd/lexer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace scvd {

namespace fs = std::filesystem;

std::size_t CategoryPrompts::count(bool positive) const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(), [&](const Example& e) { return e.positive == positive; }));
}

const CategoryPrompts* ExampleStore::find(VulnCategory c) const {
    auto it = categories.find(c);
    return it == categories.end() ? nullptr : &it->second;
}

fs::path default_prompts_dir() {
    if (const char* env = std::getenv("SCVD_PROMPTS_DIR"); env && *env) return env;
    return SCVD_DEFAULT_PROMPTS_DIR;
}

namespace {

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string rel(const fs::path& p, const fs::path& root) { return fs::relative(p, root).generic_string(); }

std::vector<fs::path> sorted_entries(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

ExampleStore load_example_store(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw StoreInvalid({dir.string() + ": not a directory"});

    ExampleStore store;
    store.root = dir;
    std::vector<std::string> violations;
    for (const auto& cat_dir : sorted_entries(dir)) {
        if (!fs::is_directory(cat_dir)) continue;
        const auto name = cat_dir.filename().string();
        const auto cat = parse_category(name);
        if (!cat) {
            violations.push_back(name + ": unknown category");
            continue;
        }
        CategoryPrompts prompts;
        prompts.instruction = read_file(cat_dir / "instruction.md");
        prompts.output = read_file(cat_dir / "output.md");
        for (const auto& file : sorted_entries(cat_dir / "examples")) {
            if (file.extension() != ".json") continue;
            const auto where = rel(file, dir);
            const auto text = read_file(file);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(text.value_or(""));
            } catch (const nlohmann::json::parse_error& e) {
                violations.push_back(where + ": invalid JSON (" + e.what() + ")");
                continue;
            }
            if (!j.is_object()) {
                violations.push_back(where + ": not a JSON object");
                continue;
            }
            auto str = [&](const char* key) -> std::string {
                return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string{};
            };
            Example ex;
            ex.name = file.stem().string();
            const auto label = str("label");
            bool ok = true;
            if (label == "positive" || label == "negative") {
                ex.positive = label == "positive";
            } else {
                violations.push_back(where + ": unknown label '" + label + "'");
                ok = false;
            }
            ex.code = str("code");
            ex.explanation = str("explanation");
            ex.source = str("source");
            if (ex.code.empty()) {
                violations.push_back(where + ": missing code");
                ok = false;
            }
            if (ex.explanation.empty()) {
                violations.push_back(where + ": missing explanation");
                ok = false;
            }
            if (ok) prompts.examples.push_back(std::move(ex));
        }
        store.categories.emplace(*cat, std::move(prompts));
    }
    if (store.categories.empty() && violations.empty()) violations.push_back(dir.string() + ": no categories");
    if (!violations.empty()) throw StoreInvalid(std::move(violations));
    return store;
}

std::string render_instruction(const ExampleStore& store, std::string_view category) {
    const auto cat = parse_category(category);
    if (!cat) throw TemplateMissing("no instruction template for unknown category '" + std::string(category) + "'");
    const auto* prompts = store.find(*cat);
    if (!prompts || !prompts->instruction)
        throw TemplateMissing("no instruction template for " + std::string(category) + " under " +
                              store.root.string());
    return *prompts->instruction;
}

std::string default_output_schema() {
    return "Respond with one JSON object and nothing else. Use double quotes for keys and strings.\n"
           "If the target function is vulnerable:\n"
           "{\"is_vulnerable\": true, \"code_snippet\": \"<the vulnerable statement, copied verbatim>\", "
           "\"line\": <line of that statement within the target function, counting from 1>}\n"
           "If it is not vulnerable:\n"
           "{\"is_vulnerable\": false}";
}

namespace {

std::string trim_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

std::string render_context(const std::vector<const Example*>& examples) {
    if (examples.empty()) return "(no examples)";
    std::string out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = *examples[i];
        if (i) out += "\n\n";
        out += "Example " + std::to_string(i + 1) + " (" + (ex.positive ? "positive" : "negative") + "):\n";
        out += "```solidity\n" + trim_newlines(ex.code) + "\n```\n";
        out += "Analysis:\n" + trim_newlines(ex.explanation) + "\n";
        out += std::string("Verdict: {\"is_vulnerable\": ") + (ex.positive ? "true" : "false") + "}";
    }
    return out;
}

std::string join_sections(const AssembledPrompt& p) {
    const std::string* bodies[] = {&p.instruction, &p.context, &p.input, &p.output};
    std::string out;
    for (std::size_t i = 0; i < 4; ++i) {
        if (i) out += "\n\n";
        out += "=== " + std::string(kSectionNames[i]) + " ===\n" + *bodies[i];
    }
    return out + "\n";
}

// Name declared by a state-variable declaration: the identifier before `=`
// or `;` at nesting depth zero.
std::string declared_name(const std::string& decl) {
    try {
        std::string last;
        int depth = 0;
        for (const auto& t : tokenize(decl)) {
            if (t.kind == TokenKind::Comment) continue;
            if (t.is_punct("(") || t.is_punct("[")) ++depth;
            if (t.is_punct(")") || t.is_punct("]")) --depth;
            if (depth == 0 && (t.is_op("=") || t.is_punct(";"))) return last;
            if (t.kind == TokenKind::Identifier) last = t.text;
        }
        return last;
    } catch (const Error&) {
        return {};
    }
}

std::set<std::string> identifiers_in(const std::string& code) {
    std::set<std::string> out;
    try {
        for (const auto& t : tokenize(code)) {
            if (t.kind == TokenKind::Identifier) out.insert(t.text);
        }
    } catch (const Error&) {
    }
    return out;
}

}  // namespace

AssembledPrompt assemble_prompt(VulnCategory category, const ContextBundle& bundle, const ExampleStore& store,
                                const AssembleOptions& options) {
    if (options.budget == 0) throw BudgetImpossible("token budget must be positive");
    const auto* prompts = store.find(category);
    const std::string cat_name(to_string(category));
    if (!prompts || !prompts->instruction) throw TemplateMissing("no instruction template for " + cat_name);
    if (!options.allow_zero_shot && (prompts->count(true) == 0 || prompts->count(false) == 0))
        throw ZeroShotRefused("example store for " + cat_name +
                              " needs at least one positive and one negative example (or allow zero-shot)");

    AssembledPrompt p;
    p.instruction = trim_newlines(*prompts->instruction);
    p.output = trim_newlines(prompts->output.value_or(default_output_schema()));
    p.bundle = bundle;

    std::vector<const Example*> examples;
    for (const auto& e : prompts->examples) {
        if (e.positive) examples.push_back(&e);
    }
    for (const auto& e : prompts->examples) {
        if (!e.positive) examples.push_back(&e);
    }

    auto render = [&] {
        p.context = render_context(examples);
        p.input = "<code>\n" + trim_newlines(bundle_to_json(p.bundle)) + "\n</code>";
        p.text = join_sections(p);
        p.token_count = estimate_tokens(p.text);
        return p.token_count <= options.budget;
    };
    auto& b = p.bundle;

    if (render()) {
        p.examples_used = examples.size();
        return p;
    }

    // Each step removes one piece and reports it; the loop stops at the
    // first step after which the prompt fits.
    std::vector<std::function<bool()>> steps;
    steps.emplace_back([&] {
        if (b.events.empty()) return false;
        b.events.clear();
        p.dropped.push_back("events");
        return true;
    });
    steps.emplace_back([&] {
        if (b.imports.empty()) return false;
        b.imports.clear();
        p.dropped.push_back("imports");
        return true;
    });
    steps.emplace_back([&] {
        if (b.callstack.empty()) return false;
        p.dropped.push_back("callstack:" + b.callstack.back().signature);
        b.callstack.pop_back();
        return true;
    });
    steps.emplace_back([&] {
        if (b.modifiers_codes.empty()) return false;
        b.modifiers_codes.clear();
        p.dropped.push_back("modifiers_codes");
        return true;
    });
    const auto target_ids = identifiers_in(b.target_function);
    steps.emplace_back([&] {
        for (auto it = b.internal_states.rbegin(); it != b.internal_states.rend(); ++it) {
            const auto name = declared_name(*it);
            if (name.empty() || !target_ids.count(name)) {
                p.dropped.push_back("internal_states:" + (name.empty() ? *it : name));
                b.internal_states.erase(std::next(it).base());
                return true;
            }
        }
        return false;
    });
    steps.emplace_back([&] {
        // positives go first so negatives, which curb over-reporting, stay longest
        std::size_t positives = 0;
        for (const auto* e : examples) positives += e->positive;
        if (examples.empty()) return false;
        const std::size_t victim = positives > 0 ? positives - 1 : examples.size() - 1;
        p.dropped.push_back("example:" + examples[victim]->name);
        examples.erase(examples.begin() + static_cast<std::ptrdiff_t>(victim));
        return true;
    });
    auto drop_field = [&](const char* name, auto& field) {
        return [&, name] {
            if (field.empty()) return false;
            field = {};
            p.dropped.push_back(name);
            return true;
        };
    };
    steps.emplace_back(drop_field("initializer", b.initializer));
    steps.emplace_back(drop_field("constructor", b.constructor));
    steps.emplace_back(drop_field("internal_calls", b.internal_calls));
    steps.emplace_back(drop_field("external_objects", b.external_objects));
    steps.emplace_back(drop_field("modifiers", b.modifiers));
    steps.emplace_back(drop_field("internal_states", b.internal_states));
    steps.emplace_back(drop_field("external_calls", b.external_calls));

    for (auto& step : steps) {
        while (step()) {
            if (render()) {
                p.examples_used = examples.size();
                return p;
            }
        }
    }
    throw BudgetImpossible("prompt needs " + std::to_string(p.token_count) + " tokens with every optional part removed; budget is " +
                           std::to_string(options.budget));
}

}  // namespace scvd
