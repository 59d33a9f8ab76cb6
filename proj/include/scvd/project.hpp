#pragma once

#include "scvd/ast.hpp"
#include "scvd/call_graph.hpp"
#include "scvd/category.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scvd {

struct ExcludeRule {
    std::string glob;
    std::string reason;
};

/// Coarse filter: the first matching rule excludes a file and names why.
struct FilterConfig {
    std::vector<ExcludeRule> exclude;

    /// test / tests / mocks / node_modules / lib / script directories and
    /// `*.t.sol` files.
    static FilterConfig defaults();

    void add_exclude(std::string glob, std::string reason = "user-glob");
    /// Reason of the first rule matching `relative_path`, if any.
    std::optional<std::string> match(std::string_view relative_path) const;
};

/// Reads the `exclude = [...]` array from a `scvd.toml`-style file. When the
/// key is present it replaces the rules of `base`; other keys are ignored.
FilterConfig load_filter_config(const std::filesystem::path& file, FilterConfig base = FilterConfig::defaults());

struct ExcludedFile {
    std::string path;
    std::string reason;
};

struct ContractRef {
    std::string qualified_name;  // "<path>:<Name>"
    const ast::SourceUnit* unit = nullptr;
    const ast::ContractDefinition* contract = nullptr;
};

/// A function or modifier of the retained project, plus where it lives.
struct FunctionHandle {
    FunctionRef ref;
    const ast::SourceUnit* unit = nullptr;
    const ast::ContractDefinition* contract = nullptr;
    std::string contract_qualified;
    const ast::FunctionDefinition* function = nullptr;
    const ast::ModifierDefinition* modifier = nullptr;

    const ast::Stmt* body() const noexcept {
        return function ? function->body.get() : (modifier ? modifier->body.get() : nullptr);
    }
    const std::vector<ast::Parameter>& parameters() const noexcept {
        return function ? function->parameters : modifier->parameters;
    }
};

/// Whole-project view. Built once by load_project and immutable afterwards;
/// the raw pointers all point into `units`, which the model co-owns.
class ProjectModel {
public:
    std::filesystem::path root;
    std::vector<std::shared_ptr<const ast::SourceUnit>> units;  // retained and parsed, sorted by path
    std::vector<ExcludedFile> excluded;
    std::vector<std::string> unparsed;  // retained files that failed to lex or parse
    std::vector<std::string> diagnostics;
    std::map<std::string, ContractRef> contracts;  // by qualified name
    std::map<std::string, std::vector<std::string>> imports;
    std::map<std::string, std::vector<std::string>> linearization;  // qualified names, most-derived first
    std::vector<FunctionHandle> functions;  // sorted by (file, span start); call-graph node ids index this
    std::map<std::string, std::vector<std::size_t>> functions_by_contract;  // qualified -> function ids
    std::set<std::string, std::less<>> struct_names;
    std::set<std::string, std::less<>> enum_names;
    CallGraph call_graph;

    const ast::SourceUnit* find_unit(std::string_view path) const noexcept;
    /// Resolves a contract name as seen from `from_file`: same file first,
    /// then the transitive import closure, then the first match in path order.
    const ContractRef* resolve_contract(std::string_view name, std::string_view from_file = {}) const;
    const ContractRef* contract_by_qualified(std::string_view qualified) const;
    /// Contracts of the linearization of `qualified`, most-derived first.
    std::vector<const ContractRef*> linearized(std::string_view qualified) const;

    std::optional<std::size_t> function_index(const FunctionRef& ref) const;
    const FunctionHandle& handle(const FunctionRef& ref) const;

    bool is_struct_name(std::string_view name) const;
    bool is_enum_name(std::string_view name) const;
    const ast::StructDefinition* find_struct(std::string_view name, std::string_view contract_qualified) const;

    /// Functions defined in one of `qualified`'s linearized contracts, with a
    /// given name; most-derived first.
    std::vector<std::size_t> functions_named(std::string_view qualified, std::string_view name) const;
};

/// Walks `root`, applies the filter, parses every retained file (recovering
/// per contract), and builds contract table, imports, linearization and call
/// graph. Throws NoSourcesFound when there is no `.sol` file, IoError when
/// the root is missing or a file cannot be read.
ProjectModel load_project(const std::filesystem::path& root, const FilterConfig& filter = FilterConfig::defaults());

/// Builds a model from in-memory sources (path -> text); used by tests and
/// by callers that already hold file contents.
ProjectModel load_project_from_sources(const std::map<std::string, std::string>& files,
                                       const FilterConfig& filter = FilterConfig::defaults());

/// C3 linearization of every contract in the table. Bases are merged
/// right-to-left as Solidity does. Throws LinearizationError on a cycle or
/// an inconsistent hierarchy; bases missing from the project are skipped.
std::map<std::string, std::vector<std::string>> linearize_inheritance(const ProjectModel& model);

/// Unique function by contract and name. `signature` may be the parameter
/// list (`uint256,address`) or a full `name(types)`. Throws NotFound or
/// AmbiguousTarget.
FunctionRef find_function(const ProjectModel& model, std::string_view contract, std::string_view function,
                          std::optional<std::string_view> signature = std::nullopt);

/// Functions whose shape matches the category's trigger predicate, ordered
/// by file path and then position.
std::vector<FunctionRef> candidate_functions(const ProjectModel& model, VulnCategory category);

}  // namespace scvd
