#pragma once

#include "scvd/project.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scvd {

struct Binding {
    ast::TypeNamePtr type;
    bool is_state = false;
    const ast::StateVariable* state = nullptr;  // when is_state
    std::string owner;                          // qualified contract declaring the state variable
    std::string location;                       // data location of a local
};

/// A state variable touched by an expression. `var` is null when the write
/// goes through a storage pointer whose origin is unknown.
struct StateAccess {
    const ast::StateVariable* var = nullptr;
    std::string owner;
    const ast::Expr* site = nullptr;

    friend bool operator==(const StateAccess& a, const StateAccess& b) noexcept { return a.var == b.var; }
};

/// Name resolution and light type inference inside one function or modifier
/// (or at contract level when constructed without one). Locals are collected
/// without block scoping: Solidity forbids shadowing inside a function body.
class FunctionScope {
public:
    FunctionScope(const ProjectModel& model, const FunctionHandle& fn);
    FunctionScope(const ProjectModel& model, std::string contract_qualified);

    const ProjectModel& model() const noexcept { return *model_; }
    const std::string& contract() const noexcept { return contract_; }
    const ast::ContractDefinition* contract_def() const noexcept;

    std::optional<Binding> lookup(std::string_view name) const;
    /// Best-effort static type; null when unknown.
    ast::TypeNamePtr type_of(const ast::Expr& e) const;
    /// A user-defined type naming a contract, interface or library, or an
    /// unknown user-defined name that is not a struct or enum.
    bool is_contract_type(const ast::TypeNamePtr& t) const;

    /// State variable at the root of an lvalue (`a[i].b` -> `a`).
    std::optional<StateAccess> lvalue_state(const ast::Expr& lvalue) const;
    /// State writes performed directly inside `e` (assignments, `++`/`--`,
    /// `delete`, `push`/`pop`), in pre-order.
    std::vector<StateAccess> state_writes(const ast::Expr& e) const;
    std::vector<StateAccess> state_writes(const ast::Stmt& s) const;
    /// State variables read or written anywhere in the tree.
    std::vector<StateAccess> state_refs(const ast::Stmt& s) const;
    std::vector<StateAccess> state_refs(const ast::Expr& e) const;

private:
    void collect_locals(const ast::Stmt& body);
    void add_local(const ast::Parameter& p);

    const ProjectModel* model_;
    std::string contract_;
    std::map<std::string, Binding, std::less<>> locals_;
    std::map<std::string, StateAccess, std::less<>> storage_aliases_;
};

ast::TypeNamePtr make_elementary(std::string name);
ast::TypeNamePtr make_user_defined(std::string name);

/// Last segment of a dotted user-defined type name.
std::string_view last_segment(std::string_view dotted) noexcept;

}  // namespace scvd
