#include "cli.hpp"

#include "scvd/ast_json.hpp"
#include "scvd/backends.hpp"
#include "scvd/config.hpp"
#include "scvd/context.hpp"
#include "scvd/errors.hpp"
#include "scvd/eval.hpp"
#include "scvd/parser.hpp"
#include "scvd/project.hpp"
#include "scvd/prompt.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace scvd::cli {

namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

struct Globals {
    std::optional<std::string> config;
    bool verbose = false;
};

struct Io {
    std::ostream& out;
    std::ostream& err;
    const Globals& globals;
};

struct ProjectArgs {
    std::string project;
    std::vector<std::string> exclude;
};

struct TargetArgs {
    ProjectArgs project;
    std::string contract;
    std::string function;
    std::optional<std::string> signature;
    std::string category;
    std::optional<int> depth;
};

struct PromptArgs {
    std::optional<std::size_t> budget;
    bool allow_zero_shot = false;
    std::optional<std::string> prompts;
};

struct BackendArgs {
    std::string backend = "llm";
    std::optional<double> timeout;
    std::optional<int> retries;
};

// Accepts a category name (or `all`); the list is spelled out on error
// rather than in --help.
CLI::Validator category_check(bool with_all) {
    return CLI::Validator(
        [with_all](std::string& s) -> std::string {
            if ((with_all && s == "all") || parse_category(s)) return {};
            std::string names;
            for (auto c : kAllCategories) names += (names.empty() ? "" : ", ") + std::string(to_string(c));
            return "unknown category '" + s + "'; expected one of " + names + (with_all ? ", all" : "");
        },
        "", "category");
}

void add_project_options(CLI::App* sub, ProjectArgs& a) {
    sub->add_option("--project", a.project, "Project root directory")->required()->type_name("DIR");
    sub->add_option("--exclude", a.exclude, "Extra exclude glob, repeatable")->type_name("GLOB")->take_all();
}

void add_target_options(CLI::App* sub, TargetArgs& a) {
    add_project_options(sub, a.project);
    sub->add_option("--contract", a.contract, "Contract name")->required()->type_name("NAME");
    sub->add_option("--function", a.function, "Function name")->required()->type_name("NAME");
    sub->add_option("--signature", a.signature, "Parameter types, e.g. uint256,address")->type_name("TYPES");
    sub->add_option("--category", a.category, "Vulnerability category")
        ->required()
        ->type_name("CAT")
        ->check(category_check(false));
    sub->add_option("--depth", a.depth, "Callstack depth (default 2)")->type_name("N")->check(CLI::NonNegativeNumber);
}

void add_prompt_options(CLI::App* sub, PromptArgs& a) {
    sub->add_option("--budget", a.budget, "Prompt token budget (default 4000)")->type_name("TOKENS");
    sub->add_flag("--allow-zero-shot", a.allow_zero_shot, "Allow a prompt without examples");
    sub->add_option("--prompts", a.prompts, "Prompt store directory")->type_name("DIR");
}

void add_backend_options(CLI::App* sub, BackendArgs& a) {
    sub->add_option("--backend", a.backend, "Detection backend (default llm)")
        ->type_name("NAME")
        ->check(CLI::IsMember({"llm", "rules"}));
    sub->add_option("--timeout", a.timeout, "Request timeout in seconds (default 60)")
        ->type_name("SECONDS")
        ->check(CLI::PositiveNumber);
    sub->add_option("--retries", a.retries, "Retries after a transient failure (default 3)")
        ->type_name("N")
        ->check(CLI::NonNegativeNumber);
}

ToolConfig resolve_config(const Globals& g, const fs::path* project_root) {
    if (g.config) return load_tool_config(*g.config);
    if (project_root && fs::is_regular_file(*project_root / "scvd.toml"))
        return load_tool_config(*project_root / "scvd.toml");
    ToolConfig c;
    c.filter = FilterConfig::defaults();
    return c;
}

FilterConfig effective_filter(const ToolConfig& cfg, const std::vector<std::string>& extra) {
    auto f = cfg.filter;
    for (const auto& g : extra) f.add_exclude(g);
    return f;
}

ProjectModel open_project(const Io& io, const fs::path& root, const FilterConfig& filter) {
    auto model = load_project(root, filter);
    for (const auto& f : model.unparsed) io.err << "warning: skipped " << f << " (does not parse)\n";
    if (io.globals.verbose) {
        io.err << "loaded " << model.units.size() << " files, " << model.contracts.size() << " contracts\n";
        for (const auto& x : model.excluded) io.err << "excluded " << x.path << " (" << x.reason << ")\n";
        for (const auto& d : model.diagnostics) io.err << d << "\n";
    }
    return model;
}

VulnCategory category_of(const std::string& name) {
    auto c = parse_category(name);
    if (!c) throw ConfigError("unknown category " + name);
    return *c;
}

// Layers, lowest first: built-in defaults, config file, environment, flags.
BackendConfig backend_config(const BackendArgs& a, const ToolConfig& cfg) {
    BackendConfig b;
    b.kind = a.backend == "rules" ? BackendKind::Rules : BackendKind::Llm;
    if (cfg.endpoint) b.endpoint = *cfg.endpoint;
    if (cfg.model) b.model = *cfg.model;
    if (cfg.timeout_seconds) b.timeout_seconds = *cfg.timeout_seconds;
    if (cfg.max_retries) b.max_retries = *cfg.max_retries;
    if (cfg.temperature) b.temperature = *cfg.temperature;
    if (const char* v = std::getenv("SCVD_API_BASE"); v && *v) b.endpoint = v;
    if (const char* v = std::getenv("SCVD_MODEL"); v && *v) b.model = v;
    if (const char* v = std::getenv("SCVD_API_KEY"); v && *v) b.api_key = v;
    if (a.timeout) b.timeout_seconds = *a.timeout;
    if (a.retries) b.max_retries = *a.retries;
    b.validate();
    if (b.kind == BackendKind::Llm && b.api_key.empty()) throw AuthError("no API key; set SCVD_API_KEY");
    return b;
}

AssembleOptions assemble_options(const PromptArgs& a, const ToolConfig& cfg) {
    AssembleOptions o;
    o.budget = a.budget.value_or(cfg.budget.value_or(kDefaultTokenBudget));
    o.allow_zero_shot = a.allow_zero_shot || cfg.allow_zero_shot.value_or(false);
    return o;
}

int depth_of(const std::optional<int>& flag, const ToolConfig& cfg) {
    const int d = flag.value_or(cfg.depth.value_or(kDefaultCallstackDepth));
    if (d < 0) throw OutOfRange("depth must be >= 0");
    return d;
}

ExampleStore open_store(const PromptArgs& a) {
    return load_example_store(a.prompts ? fs::path(*a.prompts) : default_prompts_dir());
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream o(p, std::ios::binary);
    if (!(o << text)) throw IoError("cannot write " + p.string());
}

ojson record_json(const InstanceRecord& r) {
    ojson j;
    j["id"] = r.id;
    j["category"] = to_string(r.category);
    j["label"] = r.positive ? "positive" : "negative";
    j["verdict"] = r.verdict ? ojson::parse(verdict_to_json(*r.verdict)) : ojson();
    if (!r.stage.empty()) {
        j["stage"] = r.stage;
        j["error"] = r.error;
    }
    j["dropped"] = r.dropped;
    return j;
}

std::string dump(const ojson& j) { return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace); }

// Subcommands -------------------------------------------------------------

struct ParseCmd {
    std::string file;
    bool json = false;

    int run(const Io& io) const {
        auto unit = parse_source_unit(read_text(file), file);
        for (const auto& d : unit.diagnostics) io.err << d << "\n";
        if (json) {
            io.out << dump(to_json(unit)) << "\n";
            return kOk;
        }
        for (const auto& c : unit.contracts) {
            io.out << to_string(c.kind) << " " << c.name << ": " << c.functions.size() << " functions, "
                   << c.modifiers.size() << " modifiers, " << c.state_variables.size() << " state variables\n";
        }
        return kOk;
    }
};

struct CandidatesCmd {
    ProjectArgs project;
    std::string category;
    bool json = false;

    int run(const Io& io) const {
        const fs::path root = project.project;
        const auto cfg = resolve_config(io.globals, &root);
        const auto model = open_project(io, root, effective_filter(cfg, project.exclude));
        const auto found = candidate_functions(model, category_of(category));
        if (json) {
            auto arr = ojson::array();
            for (const auto& f : found) {
                arr.push_back({{"file", f.file}, {"contract", f.contract}, {"function", f.name},
                               {"signature", f.signature}, {"display", f.display()}});
            }
            io.out << dump(arr) << "\n";
        } else {
            for (const auto& f : found) io.out << f.file << "\t" << f.display() << "\n";
        }
        return kOk;
    }
};

struct Located {
    ToolConfig config;
    ProjectModel model;
    FunctionRef target;
    VulnCategory category;
};

Located locate(const Io& io, const TargetArgs& a) {
    const fs::path root = a.project.project;
    Located l{resolve_config(io.globals, &root), {}, {}, category_of(a.category)};
    l.model = open_project(io, root, effective_filter(l.config, a.project.exclude));
    std::optional<std::string_view> sig;
    if (a.signature) sig = *a.signature;
    l.target = find_function(l.model, a.contract, a.function, sig);
    if (io.globals.verbose) io.err << "target " << l.target.display() << " in " << l.target.file << "\n";
    return l;
}

struct ExtractCmd {
    TargetArgs target;

    int run(const Io& io) const {
        const auto l = locate(io, target);
        io.out << bundle_to_json(extract_context(l.model, l.target, l.category, depth_of(target.depth, l.config)));
        return kOk;
    }
};

void report_prompt(const Io& io, const AssembledPrompt& p) {
    if (!io.globals.verbose) return;
    io.err << "prompt: " << p.token_count << " tokens, " << p.examples_used << " examples\n";
    for (const auto& d : p.dropped) io.err << "dropped " << d << "\n";
}

struct PromptCmd {
    TargetArgs target;
    PromptArgs prompt;
    bool json = false;

    int run(const Io& io) const {
        const auto store = open_store(prompt);
        const auto l = locate(io, target);
        const auto bundle = extract_context(l.model, l.target, l.category, depth_of(target.depth, l.config));
        const auto p = assemble_prompt(l.category, bundle, store, assemble_options(prompt, l.config));
        report_prompt(io, p);
        if (json) {
            ojson j;
            j["token_count"] = p.token_count;
            j["examples_used"] = p.examples_used;
            j["dropped"] = p.dropped;
            j["text"] = p.text;
            io.out << dump(j) << "\n";
        } else {
            io.out << p.text;
            if (p.text.empty() || p.text.back() != '\n') io.out << "\n";
        }
        return kOk;
    }
};

struct DetectCmd {
    TargetArgs target;
    PromptArgs prompt;
    BackendArgs backend;

    int run(const Io& io) const {
        const fs::path root = target.project.project;
        // Credentials are checked before any project work.
        const auto backend_cfg = backend_config(backend, resolve_config(io.globals, &root));
        const auto store = open_store(prompt);
        const auto l = locate(io, target);
        const auto bundle = extract_context(l.model, l.target, l.category, depth_of(target.depth, l.config));
        const auto p = assemble_prompt(l.category, bundle, store, assemble_options(prompt, l.config));
        report_prompt(io, p);
        const auto v = detect(backend_cfg, l.category, p, l.model, l.target);
        io.out << verdict_to_json(v) << "\n";
        return v.is_vulnerable ? kVulnerable : kOk;
    }
};

struct EvalCmd {
    std::string manifest;
    std::string category;
    BackendArgs backend;
    PromptArgs prompt;
    std::uint64_t seed = 0;
    double neg_ratio = 1.0;
    std::optional<std::size_t> max_pos;
    std::string out_dir;
    std::optional<int> depth;
    std::size_t concurrency = 4;
    std::vector<std::string> exclude;
    bool json = false;

    int run(const Io& io) const {
        const auto cfg = resolve_config(io.globals, nullptr);
        PipelineConfig pc;
        pc.backend = backend_config(backend, cfg);
        const auto store = open_store(prompt);
        pc.store = &store;
        pc.filter = effective_filter(cfg, exclude);
        pc.depth = depth_of(depth, cfg);
        const auto opts = assemble_options(prompt, cfg);
        pc.budget = opts.budget;
        pc.allow_zero_shot = opts.allow_zero_shot;
        pc.concurrency = concurrency;

        const auto m = load_manifest(manifest);
        std::vector<VulnCategory> cats;
        if (category == "all") cats.assign(kAllCategories.begin(), kAllCategories.end());
        else cats.push_back(category_of(category));

        std::map<VulnCategory, CategoryReport> rows;
        std::vector<InstanceRecord> records;
        for (auto cat : cats) {
            EvalSet set;
            try {
                set = sample_instances(m, cat, seed, neg_ratio, max_pos);
            } catch (const NoPositives& e) {
                if (category != "all") throw;
                if (io.globals.verbose) io.err << "skipping " << to_string(cat) << ": " << e.what() << "\n";
                continue;
            }
            for (const auto& w : set.warnings) io.err << "warning: " << to_string(cat) << ": " << w << "\n";
            auto res = run_eval(set, pc);
            if (io.globals.verbose) {
                io.err << to_string(cat) << ": " << set.positives.size() << " positives, " << set.negatives.size()
                       << " negatives, " << res.errors << " errors\n";
            }
            for (const auto& r : res.records) {
                if (!r.stage.empty()) io.err << r.id << ": " << r.stage << " failed: " << r.error << "\n";
            }
            CategoryReport row;
            row.metrics = compute_metrics(res.matrix);
            row.matrix = res.matrix;
            row.errors = res.errors;
            row.warnings = set.warnings;
            rows.emplace(cat, std::move(row));
            records.insert(records.end(), std::make_move_iterator(res.records.begin()),
                           std::make_move_iterator(res.records.end()));
        }
        if (rows.empty()) throw NoPositives("no category in the manifest has positive instances");

        const auto report = render_report(rows);
        const fs::path dir = out_dir;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
        std::string lines;
        for (const auto& r : records) lines += record_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
        write_text(dir / "report.md", report.markdown);
        write_text(dir / "report.json", report.json);
        write_text(dir / "records.jsonl", lines);
        for (const char* name : {"report.md", "report.json", "records.jsonl"})
            io.err << "wrote " << (dir / name).string() << "\n";

        io.out << (json ? report.json : report.markdown);
        return kOk;
    }
};

std::string kind_of(const std::exception& e) {
#define SCVD_KIND(T) \
    if (dynamic_cast<const T*>(&e)) return #T;
    SCVD_KIND(LexError)
    SCVD_KIND(ParseError)
    SCVD_KIND(OutOfRange)
    SCVD_KIND(IoError)
    SCVD_KIND(NoSourcesFound)
    SCVD_KIND(LinearizationError)
    SCVD_KIND(NotFound)
    SCVD_KIND(AmbiguousTarget)
    SCVD_KIND(StoreInvalid)
    SCVD_KIND(TemplateMissing)
    SCVD_KIND(BudgetImpossible)
    SCVD_KIND(ZeroShotRefused)
    SCVD_KIND(BackendUnavailable)
    SCVD_KIND(AuthError)
    SCVD_KIND(UnsupportedCategory)
    SCVD_KIND(UnparseableResponse)
    SCVD_KIND(ManifestInvalid)
    SCVD_KIND(NoPositives)
    SCVD_KIND(ConfigError)
#undef SCVD_KIND
    return "Error";
}

bool is_backend_error(const std::exception& e) {
    return dynamic_cast<const BackendUnavailable*>(&e) || dynamic_cast<const AuthError*>(&e) ||
           dynamic_cast<const UnparseableResponse*>(&e) || dynamic_cast<const UnsupportedCategory*>(&e);
}

// With --json, stdout still carries exactly one document on failure.
int fail(const Io& io, bool json, int code, const std::string& kind, const std::string& message) {
    const auto nl = message.find('\n');
    io.err << "scvd: " << kind << ": " << message.substr(0, nl) << "\n";
    if (nl != std::string::npos) io.err << message.substr(nl + 1) << (message.back() == '\n' ? "" : "\n");
    if (json) io.out << dump(ojson{{"error", kind}, {"message", message}, {"exit_code", code}}) << "\n";
    return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    bool json = false;
    for (int i = 1; i < argc; ++i) json = json || std::string_view(argv[i]) == "--json";

    Globals globals;
    const Io io{out, err, globals};

    CLI::App app{"Context-aware smart contract vulnerability detection", "scvd"};
    app.require_subcommand(1);
    app.add_option("--config", globals.config, "Config file (default: <project>/scvd.toml when present)")
        ->type_name("PATH");
    app.add_flag("--verbose", globals.verbose, "Progress and diagnostics on stderr");

    ParseCmd parse_cmd;
    auto* parse = app.add_subcommand("parse", "Parse one Solidity file");
    parse->add_option("file", parse_cmd.file, "Solidity source file")->required()->type_name("FILE");
    parse->add_flag("--json", parse_cmd.json, "Print the AST as JSON");

    CandidatesCmd cand_cmd;
    auto* cand = app.add_subcommand("candidates", "List functions matching a category's trigger");
    add_project_options(cand, cand_cmd.project);
    cand->add_option("--category", cand_cmd.category, "Vulnerability category")
        ->required()
        ->type_name("CAT")
        ->check(category_check(false));
    cand->add_flag("--json", cand_cmd.json, "Print a JSON array");

    ExtractCmd extract_cmd;
    auto* extract = app.add_subcommand("extract", "Print the context bundle of a function as JSON");
    add_target_options(extract, extract_cmd.target);

    PromptCmd prompt_cmd;
    auto* prompt = app.add_subcommand("prompt", "Print the assembled prompt for a function");
    add_target_options(prompt, prompt_cmd.target);
    add_prompt_options(prompt, prompt_cmd.prompt);
    prompt->add_flag("--json", prompt_cmd.json, "Print token count, truncation report and text as JSON");

    DetectCmd detect_cmd;
    auto* det = app.add_subcommand("detect", "Judge one function; exit 1 when vulnerable");
    add_target_options(det, detect_cmd.target);
    add_prompt_options(det, detect_cmd.prompt);
    add_backend_options(det, detect_cmd.backend);

    EvalCmd eval_cmd;
    auto* ev = app.add_subcommand("eval", "Score a backend against a labelled manifest");
    ev->add_option("--manifest", eval_cmd.manifest, "JSONL dataset manifest")->required()->type_name("FILE");
    ev->add_option("--category", eval_cmd.category, "Category to evaluate, or all")
        ->required()
        ->type_name("CAT")
        ->check(category_check(true));
    add_backend_options(ev, eval_cmd.backend);
    ev->add_option("--seed", eval_cmd.seed, "Sampling seed (default 0)")->type_name("N");
    ev->add_option("--neg-ratio", eval_cmd.neg_ratio, "Negatives per positive, in [1, 2] (default 1)")->type_name("R");
    ev->add_option("--max-pos", eval_cmd.max_pos, "Cap on sampled positives per category")->type_name("K");
    ev->add_option("--out", eval_cmd.out_dir, "Directory for report.md, report.json, records.jsonl")
        ->required()
        ->type_name("DIR");
    ev->add_option("--depth", eval_cmd.depth, "Callstack depth (default 2)")->type_name("N")->check(CLI::NonNegativeNumber);
    ev->add_option("--concurrency", eval_cmd.concurrency, "LLM requests in flight (default 4)")
        ->type_name("N")
        ->check(CLI::PositiveNumber);
    ev->add_option("--exclude", eval_cmd.exclude, "Extra exclude glob, repeatable")->type_name("GLOB")->take_all();
    add_prompt_options(ev, eval_cmd.prompt);
    ev->add_flag("--json", eval_cmd.json, "Print report.json instead of the markdown table");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return fail(io, json, kUsage, "usage", std::string(e.what()) + " (see --help)");
    }

    try {
        if (*parse) return parse_cmd.run(io);
        if (*cand) return cand_cmd.run(io);
        if (*extract) return extract_cmd.run(io);
        if (*prompt) return prompt_cmd.run(io);
        if (*det) return detect_cmd.run(io);
        if (*ev) return eval_cmd.run(io);
    } catch (const std::exception& e) {
        return fail(io, json, is_backend_error(e) ? kBackend : kUsage, kind_of(e), e.what());
    }
    return fail(io, json, kUsage, "usage", "no subcommand");
}

}  // namespace scvd::cli
