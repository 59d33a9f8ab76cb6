#include "scvd/project.hpp"

#include "scvd/errors.hpp"
#include "scvd/glob.hpp"
#include "scvd/parser.hpp"
#include "scvd/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

namespace scvd {

namespace fs = std::filesystem;
using namespace ast;

FilterConfig FilterConfig::defaults() {
    FilterConfig f;
    f.exclude = {
        {"**/test/**", "test-glob"},           {"**/tests/**", "test-glob"},
        {"**/*.t.sol", "test-glob"},           {"**/node_modules/**", "vendored-glob"},
        {"**/lib/**", "vendored-glob"},        {"**/mocks/**", "mock-glob"},
        {"**/script/**", "script-glob"},
    };
    return f;
}

void FilterConfig::add_exclude(std::string glob, std::string reason) {
    exclude.push_back({std::move(glob), std::move(reason)});
}

std::optional<std::string> FilterConfig::match(std::string_view relative_path) const {
    for (const auto& rule : exclude) {
        if (glob_match(rule.glob, relative_path)) return rule.reason;
    }
    return std::nullopt;
}

const SourceUnit* ProjectModel::find_unit(std::string_view path) const noexcept {
    for (const auto& u : units) {
        if (u->path == path) return u.get();
    }
    return nullptr;
}

const ContractRef* ProjectModel::contract_by_qualified(std::string_view qualified) const {
    auto it = contracts.find(std::string(qualified));
    return it == contracts.end() ? nullptr : &it->second;
}

const ContractRef* ProjectModel::resolve_contract(std::string_view dotted, std::string_view from_file) const {
    const auto name = last_segment(dotted);
    auto in_file = [&](std::string_view file) -> const ContractRef* {
        auto it = contracts.find(std::string(file) + ":" + std::string(name));
        return it == contracts.end() ? nullptr : &it->second;
    };
    if (!from_file.empty()) {
        if (const auto* c = in_file(from_file)) return c;
        std::set<std::string, std::less<>> seen{std::string(from_file)};
        std::deque<std::string> queue{std::string(from_file)};
        while (!queue.empty()) {
            auto file = queue.front();
            queue.pop_front();
            auto it = imports.find(file);
            if (it == imports.end()) continue;
            for (const auto& dep : it->second) {
                if (!seen.insert(dep).second) continue;
                if (const auto* c = in_file(dep)) return c;
                queue.push_back(dep);
            }
        }
    }
    for (const auto& [qualified, ref] : contracts) {
        if (ref.contract->name == name) return &ref;
    }
    return nullptr;
}

std::vector<const ContractRef*> ProjectModel::linearized(std::string_view qualified) const {
    std::vector<const ContractRef*> out;
    auto it = linearization.find(std::string(qualified));
    if (it == linearization.end()) {
        if (const auto* c = contract_by_qualified(qualified)) out.push_back(c);
        return out;
    }
    for (const auto& q : it->second) {
        if (const auto* c = contract_by_qualified(q)) out.push_back(c);
    }
    return out;
}

std::optional<std::size_t> ProjectModel::function_index(const FunctionRef& ref) const {
    for (std::size_t i = 0; i < functions.size(); ++i) {
        if (functions[i].ref == ref) return i;
    }
    return std::nullopt;
}

const FunctionHandle& ProjectModel::handle(const FunctionRef& ref) const {
    auto i = function_index(ref);
    if (!i) throw NotFound("function " + ref.display() + " is not part of the project");
    return functions[*i];
}

bool ProjectModel::is_struct_name(std::string_view name) const { return struct_names.count(last_segment(name)) > 0; }

bool ProjectModel::is_enum_name(std::string_view name) const { return enum_names.count(last_segment(name)) > 0; }

const StructDefinition* ProjectModel::find_struct(std::string_view dotted, std::string_view contract_qualified) const {
    const auto name = last_segment(dotted);
    for (const auto* c : linearized(contract_qualified)) {
        for (const auto& s : c->contract->structs) {
            if (s.name == name) return &s;
        }
    }
    // Qualified `Lib.Struct` or a struct declared in an unrelated contract.
    for (const auto& [q, ref] : contracts) {
        for (const auto& s : ref.contract->structs) {
            if (s.name == name) return &s;
        }
    }
    return nullptr;
}

std::vector<std::size_t> ProjectModel::functions_named(std::string_view qualified, std::string_view name) const {
    std::vector<std::size_t> out;
    for (const auto* c : linearized(qualified)) {
        auto it = functions_by_contract.find(c->qualified_name);
        if (it == functions_by_contract.end()) continue;
        for (auto i : it->second) {
            const auto& h = functions[i];
            if (h.function && h.function->kind == FunctionKind::Function && h.function->name == name) out.push_back(i);
        }
    }
    return out;
}

namespace {

using LinMemo = std::map<std::string, std::vector<std::string>>;

const std::vector<std::string>& linearize_one(const ProjectModel& model, const std::string& qualified, LinMemo& memo,
                                              std::set<std::string>& active) {
    if (auto it = memo.find(qualified); it != memo.end()) return it->second;
    const auto& ref = model.contracts.at(qualified);
    if (!active.insert(qualified).second) throw LinearizationError(ref.contract->name, "cyclic inheritance");

    std::vector<std::string> direct;
    for (const auto& base : ref.contract->bases) {
        const auto* b = model.resolve_contract(base.name, ref.unit->path);
        if (!b) continue;
        if (b->qualified_name == qualified) throw LinearizationError(ref.contract->name, "cyclic inheritance");
        direct.push_back(b->qualified_name);
    }
    // Solidity lists bases from most base-like to most derived, so merge in reverse.
    std::reverse(direct.begin(), direct.end());

    std::vector<std::deque<std::string>> seqs;
    for (const auto& b : direct) {
        const auto& lb = linearize_one(model, b, memo, active);
        seqs.emplace_back(lb.begin(), lb.end());
    }
    seqs.emplace_back(direct.begin(), direct.end());

    std::vector<std::string> result{qualified};
    for (;;) {
        seqs.erase(std::remove_if(seqs.begin(), seqs.end(), [](const auto& s) { return s.empty(); }), seqs.end());
        if (seqs.empty()) break;
        std::optional<std::string> pick;
        for (const auto& s : seqs) {
            const auto& head = s.front();
            const bool in_tail = std::any_of(seqs.begin(), seqs.end(), [&](const auto& other) {
                return std::find(other.begin() + 1, other.end(), head) != other.end();
            });
            if (!in_tail) {
                pick = head;
                break;
            }
        }
        if (!pick) throw LinearizationError(ref.contract->name, "inconsistent base order");
        result.push_back(*pick);
        for (auto& s : seqs) {
            if (!s.empty() && s.front() == *pick) s.pop_front();
        }
    }
    active.erase(qualified);
    return memo.emplace(qualified, std::move(result)).first->second;
}

std::string normalize_path(const fs::path& p) { return p.lexically_normal().generic_string(); }

std::string resolve_import(const std::string& from, const std::string& target, const std::set<std::string>& known) {
    std::vector<std::string> candidates;
    if (target.rfind("./", 0) == 0 || target.rfind("../", 0) == 0) {
        candidates.push_back(normalize_path(fs::path(from).parent_path() / target));
    } else {
        candidates.push_back(normalize_path(target));
        candidates.push_back(normalize_path(fs::path("node_modules") / target));
        candidates.push_back(normalize_path(fs::path("lib") / target));
        candidates.push_back(normalize_path(fs::path(from).parent_path() / target));
    }
    for (const auto& c : candidates) {
        if (known.count(c)) return c;
    }
    return target;
}

ProjectModel assemble(fs::path root, const std::vector<std::string>& all_paths,
                      const std::function<std::string(const std::string&)>& read, const FilterConfig& filter) {
    if (all_paths.empty()) throw NoSourcesFound("no .sol files under " + root.string());

    ProjectModel model;
    model.root = std::move(root);
    std::vector<std::string> retained;
    for (const auto& p : all_paths) {
        if (auto reason = filter.match(p)) {
            model.excluded.push_back({p, *reason});
        } else {
            retained.push_back(p);
        }
    }

    std::uint32_t file_id = 0;
    for (const auto& path : retained) {
        auto text = read(path);
        try {
            auto unit = parse_source_unit(std::move(text), path, ParseOptions{file_id++, true});
            for (const auto& d : unit.diagnostics) model.diagnostics.push_back(path + ": " + d);
            model.units.push_back(std::make_shared<const SourceUnit>(std::move(unit)));
        } catch (const Error& e) {
            model.unparsed.push_back(path);
            model.diagnostics.push_back(path + ": unparseable: " + e.what());
        }
    }

    const std::set<std::string> known(all_paths.begin(), all_paths.end());
    for (const auto& u : model.units) {
        auto& deps = model.imports[u->path];
        for (const auto& imp : u->imports) deps.push_back(resolve_import(u->path, imp.path, known));
        for (const auto& c : u->contracts) {
            auto qualified = u->path + ":" + c.name;
            if (model.contracts.count(qualified)) {
                model.diagnostics.push_back(u->path + ": duplicate contract " + c.name + " ignored");
                continue;
            }
            model.contracts.emplace(qualified, ContractRef{qualified, u.get(), &c});
            for (const auto& s : c.structs) model.struct_names.insert(s.name);
            for (const auto& e : c.enums) model.enum_names.insert(e.name);
        }
    }

    for (const auto& [qualified, ref] : model.contracts) {
        for (const auto& base : ref.contract->bases) {
            if (!model.resolve_contract(base.name, ref.unit->path))
                model.diagnostics.push_back(ref.unit->path + ": base " + base.name + " of " + ref.contract->name +
                                            " not in the retained sources, skipped");
        }
    }
    LinMemo memo;
    for (const auto& [qualified, ref] : model.contracts) {
        std::set<std::string> active;
        try {
            linearize_one(model, qualified, memo, active);
        } catch (const LinearizationError& e) {
            model.diagnostics.push_back(ref.unit->path + ": " + e.what());
            memo[qualified] = {qualified};
        }
    }
    model.linearization = std::move(memo);

    for (const auto& [qualified, ref] : model.contracts) {
        for (const auto& f : ref.contract->functions) {
            FunctionHandle h;
            h.ref = FunctionRef{ref.unit->path, ref.contract->name, f.display_name(), f.parameter_types(), f.span, false};
            h.unit = ref.unit;
            h.contract = ref.contract;
            h.contract_qualified = qualified;
            h.function = &f;
            model.functions.push_back(std::move(h));
        }
        for (const auto& m : ref.contract->modifiers) {
            std::string types;
            for (const auto& p : m.parameters) types += (types.empty() ? "" : ",") + p.type->canonical();
            FunctionHandle h;
            h.ref = FunctionRef{ref.unit->path, ref.contract->name, m.name, types, m.span, true};
            h.unit = ref.unit;
            h.contract = ref.contract;
            h.contract_qualified = qualified;
            h.modifier = &m;
            model.functions.push_back(std::move(h));
        }
    }
    std::stable_sort(model.functions.begin(), model.functions.end(), [](const auto& a, const auto& b) {
        if (a.ref.file != b.ref.file) return a.ref.file < b.ref.file;
        return a.ref.span.start < b.ref.span.start;
    });
    for (std::size_t i = 0; i < model.functions.size(); ++i)
        model.functions_by_contract[model.functions[i].contract_qualified].push_back(i);

    model.call_graph = build_call_graph(model);
    return model;
}

}  // namespace

ProjectModel load_project(const fs::path& root, const FilterConfig& filter) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("project root " + root.string() + " is not a directory");

    std::vector<std::string> paths;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot walk " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw IoError("cannot walk " + root.string() + ": " + ec.message());
        if (it->is_regular_file(ec) && it->path().extension() == ".sol")
            paths.push_back(fs::relative(it->path(), root).generic_string());
    }
    std::sort(paths.begin(), paths.end());

    auto read = [&](const std::string& rel) {
        std::ifstream in(root / rel, std::ios::binary);
        if (!in) throw IoError("cannot read " + (root / rel).string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    return assemble(root, paths, read, filter);
}

ProjectModel load_project_from_sources(const std::map<std::string, std::string>& files, const FilterConfig& filter) {
    std::vector<std::string> paths;
    for (const auto& [path, text] : files) paths.push_back(path);
    return assemble(".", paths, [&](const std::string& p) { return files.at(p); }, filter);
}

std::map<std::string, std::vector<std::string>> linearize_inheritance(const ProjectModel& model) {
    LinMemo memo;
    for (const auto& [qualified, ref] : model.contracts) {
        std::set<std::string> active;
        linearize_one(model, qualified, memo, active);
    }
    return memo;
}

namespace {

std::string normalize_signature(std::string_view sig) {
    std::string compact;
    for (char c : sig) {
        if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    }
    std::string prefix;
    if (auto open = compact.find('('); open != std::string::npos) {
        prefix = compact.substr(0, open + 1);
        compact = compact.substr(open + 1);
        if (!compact.empty() && compact.back() == ')') compact.pop_back();
    }
    std::string out;
    std::size_t start = 0;
    while (start <= compact.size() && !compact.empty()) {
        auto comma = compact.find(',', start);
        auto piece = compact.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        // `uint[]` -> `uint256[]`
        auto bracket = piece.find('[');
        auto head = piece.substr(0, bracket);
        if (is_elementary(head)) head = normalize_elementary(head);
        out += (out.empty() && start == 0 ? "" : ",") + head + (bracket == std::string::npos ? "" : piece.substr(bracket));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return prefix.empty() ? out : prefix + out + ")";
}

}  // namespace

FunctionRef find_function(const ProjectModel& model, std::string_view contract, std::string_view function,
                          std::optional<std::string_view> signature) {
    std::vector<const ContractRef*> owners;
    for (const auto& [q, ref] : model.contracts) {
        if (ref.contract->name == contract) owners.push_back(&ref);
    }
    if (owners.empty()) throw NotFound("contract " + std::string(contract) + " not found");

    auto matches_in = [&](const ContractRef& c) {
        std::vector<const FunctionHandle*> out;
        auto it = model.functions_by_contract.find(c.qualified_name);
        if (it == model.functions_by_contract.end()) return out;
        for (auto i : it->second) {
            const auto& h = model.functions[i];
            if (h.function && h.ref.name == function) out.push_back(&h);
        }
        return out;
    };

    std::vector<const FunctionHandle*> found;
    for (const auto* owner : owners) {
        auto direct = matches_in(*owner);
        if (direct.empty()) {
            // inherited: the first base in linearization order defining it
            auto lin = model.linearized(owner->qualified_name);
            for (std::size_t k = 1; k < lin.size() && direct.empty(); ++k) direct = matches_in(*lin[k]);
        }
        found.insert(found.end(), direct.begin(), direct.end());
    }

    const std::string what = std::string(contract) + "." + std::string(function);
    if (signature) {
        const auto wanted = normalize_signature(*signature);
        const bool full = wanted.find('(') != std::string::npos;
        found.erase(std::remove_if(found.begin(), found.end(),
                                   [&](const FunctionHandle* h) {
                                       return full ? h->function->signature() != wanted : h->ref.signature != wanted;
                                   }),
                    found.end());
        if (found.empty()) throw NotFound("function " + what + " with signature " + std::string(*signature) + " not found");
    }
    if (found.empty()) throw NotFound("function " + what + " not found");
    if (found.size() > 1) {
        std::vector<std::string> sigs;
        for (const auto* h : found) sigs.push_back(h->function->signature());
        throw AmbiguousTarget(what, sigs);
    }
    return found.front()->ref;
}

}  // namespace scvd
