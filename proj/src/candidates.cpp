#include "predicates.hpp"
#include "scvd/project.hpp"
#include "scvd/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

namespace scvd {

using namespace ast;
using namespace detail;

namespace {

bool is_privileged_name(std::string_view name) { return contains(name, "owner") || contains(name, "admin"); }

bool references_privileged_state(const ProjectModel& model, std::size_t node) {
    const auto& h = model.functions[node];
    if (!h.body()) return false;
    FunctionScope scope(model, h);
    for (const auto& ref : scope.state_refs(*h.body())) {
        if (is_privileged_name(ref.var->name)) return true;
    }
    return false;
}

// A modifier that gates on a privileged account. Modifiers defined outside
// the retained sources are judged by name.
bool is_access_modifier(const ProjectModel& model, const FunctionHandle& fn, const ModifierInvocation& inv) {
    for (const auto* c : model.linearized(fn.contract_qualified)) {
        auto it = model.functions_by_contract.find(c->qualified_name);
        if (it == model.functions_by_contract.end()) continue;
        for (auto i : it->second) {
            const auto& h = model.functions[i];
            if (!h.modifier || h.modifier->name != inv.name) continue;
            if (references_privileged_state(model, i)) return true;
            // one level of helpers such as `_checkOwner()`
            for (const auto* e : model.call_graph.edges_from(i)) {
                if (e->kind == CallKind::Internal && e->callee && references_privileged_state(model, *e->callee))
                    return true;
            }
            return false;
        }
    }
    const auto name = lower(inv.name);
    if (fn.contract && std::any_of(fn.contract->bases.begin(), fn.contract->bases.end(),
                                   [&](const auto& b) { return lower(b.name) == name; }))
        return false;  // base-constructor call, not a modifier
    return name.rfind("only", 0) == 0 || is_privileged_name(name) || contains(name, "auth") || contains(name, "role");
}

bool matches(const ProjectModel& model, std::size_t node, VulnCategory category) {
    const auto& h = model.functions[node];
    const auto* f = h.function;
    const auto* body = h.body();
    const auto& g = model.call_graph;

    switch (category) {
        case VulnCategory::Reentrancy:
            return !g.external_calls_from(node).empty();
        case VulnCategory::MissingEvent: {
            if (!f->is_public_entry() || !body) return false;
            FunctionScope scope(model, h);
            return !scope.state_writes(*body).empty();
        }
        case VulnCategory::Centralization:
            return std::any_of(f->modifiers.begin(), f->modifiers.end(),
                               [&](const auto& inv) { return is_access_modifier(model, h, inv); });
        case VulnCategory::InputValidation:
            return f->is_public_entry() && !f->parameters.empty();
        case VulnCategory::WeakRandomness:
            return body && any_expr(*body, [](const Expr& e) {
                       if (is_member_of(e, "block", "timestamp") || is_member_of(e, "block", "difficulty") ||
                           is_member_of(e, "block", "prevrandao") || is_member_of(e, "block", "blockhash"))
                           return true;
                       if (e.kind == ExprKind::Identifier && e.text == "now") return true;
                       const auto* c = callee_of(e);
                       return c && c->kind == ExprKind::Identifier && c->text == "blockhash";
                   });
        case VulnCategory::SandwichAttack:
            for (const auto* e : g.external_calls_from(node)) {
                const auto m = lower(e->member);
                if (m.find("swap") != std::string::npos || m.find("addliquidity") != std::string::npos ||
                    m.find("removeliquidity") != std::string::npos)
                    return true;
            }
            return false;
        case VulnCategory::RedundantStatements:
            return body != nullptr;
        case VulnCategory::FlashloanAttack: {
            if (f->name == "onFlashLoan" || f->name == "executeOperation") return true;
            for (const auto* e : g.edges_from(node)) {
                if (e->kind != CallKind::EventEmit && lower(e->member).find("flashloan") != std::string::npos)
                    return true;
            }
            return false;
        }
        case VulnCategory::TooManyDigits:
            return body && any_expr(*body, is_decimal_with_many_digits);
        case VulnCategory::ErrorMessage: {
            if (!body) return false;
            bool hit = false;
            for_each_stmt(*body, [&](const Stmt& s) {
                if (s.kind == StmtKind::Revert) hit = true;
            });
            return hit || any_expr(*body, [](const Expr& e) {
                       const auto* c = callee_of(e);
                       return c && c->kind == ExprKind::Identifier && (c->text == "require" || c->text == "revert");
                   });
        }
        case VulnCategory::ConstantOptimization:
            return body && !constant_candidates(model, h.contract_qualified).empty();
        case VulnCategory::ReturnValueCheck:
            return first_unused_return(model, node) != nullptr;
        case VulnCategory::DivisionBeforeMultiplication:
            return body && any_expr(*body, divides_then_multiplies);
    }
    return false;
}

}  // namespace

std::vector<FunctionRef> candidate_functions(const ProjectModel& model, VulnCategory category) {
    std::vector<FunctionRef> out;
    for (std::size_t i = 0; i < model.functions.size(); ++i) {
        const auto& h = model.functions[i];
        if (!h.function || !h.body()) continue;
        if (matches(model, i, category)) out.push_back(h.ref);
    }
    return out;
}

}  // namespace scvd
