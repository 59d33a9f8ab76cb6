#include "predicates.hpp"

#include "scvd/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace scvd::detail {

using namespace ast;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains(std::string_view haystack, std::string_view needle) { return lower(haystack).find(needle) != std::string::npos; }

bool any_expr(const Stmt& body, const std::function<bool(const Expr&)>& pred) {
    bool hit = false;
    for_each_expr(body, [&](const Expr& e) {
        if (!hit && pred(e)) hit = true;
    });
    return hit;
}

bool is_member_of(const Expr& e, std::string_view base, std::string_view member) {
    if (e.kind != ExprKind::MemberAccess || e.text != member || !e.child(0)) return false;
    const auto& b = unparenthesize(*e.child(0));
    return b.kind == ExprKind::Identifier && b.text == base;
}

const Expr* callee_of(const Expr& call) {
    if (call.kind != ExprKind::Call || !call.child(0)) return nullptr;
    const Expr* c = &unparenthesize(*call.child(0));
    while (c->kind == ExprKind::CallOptions && c->child(0)) c = &unparenthesize(*c->child(0));
    return c;
}

bool is_decimal_with_many_digits(const Expr& e) {
    if (e.kind != ExprKind::Literal || e.literal != LiteralKind::Number || !e.unit.empty()) return false;
    const auto& t = e.text;
    if (t.size() > 1 && (t[1] == 'x' || t[1] == 'X')) return false;
    if (t.find('_') != std::string::npos) return false;
    std::size_t digits = 0;
    for (char c : t) {
        if (c == 'e' || c == 'E') break;
        if (std::isdigit(static_cast<unsigned char>(c))) ++digits;
    }
    return digits >= 7;
}

// `a / b * c` or `x *= a / b`
bool divides_then_multiplies(const Expr& e) {
    const bool mul = (e.kind == ExprKind::Binary && e.text == "*") || (e.kind == ExprKind::Assignment && e.text == "*=");
    if (!mul) return false;
    for (const auto& c : e.children) {
        if (!c) continue;
        const auto& op = unparenthesize(*c);
        if (op.kind == ExprKind::Binary && op.text == "/") return true;
    }
    return false;
}

bool is_value_type(const TypeNamePtr& t, const ProjectModel& model) {
    if (!t) return false;
    if (t->kind == TypeName::Kind::Elementary) return t->name != "string" && t->name != "bytes";
    if (t->kind == TypeName::Kind::UserDefined) return !model.is_struct_name(t->name);
    return false;
}

// State variables of `contract_qualified` that are only assigned at their
// declaration or inside a constructor, and not declared constant/immutable.
std::vector<const StateVariable*> constant_candidates(const ProjectModel& model, const std::string& contract_qualified) {
    const auto* ref = model.contract_by_qualified(contract_qualified);
    std::vector<const StateVariable*> out;
    if (!ref) return out;

    std::map<const StateVariable*, int> writes_outside_ctor;
    std::map<const StateVariable*, bool> written_in_ctor;
    // Any function in the project whose linearization includes this contract
    // can write its variables.
    for (std::size_t i = 0; i < model.functions.size(); ++i) {
        const auto& h = model.functions[i];
        if (!h.body()) continue;
        const auto lin = model.linearized(h.contract_qualified);
        if (std::find(lin.begin(), lin.end(), ref) == lin.end()) continue;
        FunctionScope scope(model, h);
        const bool ctor = h.function && h.function->kind == FunctionKind::Constructor;
        for (const auto& w : scope.state_writes(*h.body())) {
            if (!w.var) continue;
            if (ctor) {
                written_in_ctor[w.var] = true;
            } else {
                ++writes_outside_ctor[w.var];
            }
        }
    }
    for (const auto& v : ref->contract->state_variables) {
        if (v.constant || v.immutable || !is_value_type(v.type, model)) continue;
        if (writes_outside_ctor.count(&v)) continue;
        if (v.initializer || written_in_ctor.count(&v)) out.push_back(&v);
    }
    return out;
}

const CallEdge* first_unused_return(const ProjectModel& model, std::size_t node) {
    const auto& g = model.call_graph;
    const auto* body = model.functions[node].body();
    if (!body) return nullptr;
    std::set<const Expr*> statement_calls, unbound_success;
    for_each_stmt(*body, [&](const Stmt& s) {
        if (s.kind == StmtKind::Expression && s.expr) {
            const auto& e = unparenthesize(*s.expr);
            if (e.kind == ExprKind::Call) statement_calls.insert(&e);
        }
        // `(, bytes memory data) = target.call(...)`: success flag not bound
        if (s.kind == StmtKind::VariableDecl && s.expr && !s.decls.empty() && !s.decls.front()) {
            const auto& e = unparenthesize(*s.expr);
            if (e.kind == ExprKind::Call) unbound_success.insert(&e);
        }
    });
    for (const auto* e : g.edges_from(node)) {
        if (unbound_success.count(e->expr) && e->low_level && e->member != "transfer" && e->member != "sendValue")
            return e;
        if (!statement_calls.count(e->expr)) continue;
        if (e->callee) {
            const auto* f = model.functions[*e->callee].function;
            if (f && !f->returns.empty()) return e;
            continue;
        }
        if (e->kind == CallKind::External) {
            if (e->low_level && e->member != "transfer" && e->member != "sendValue") return e;
            if (e->member == "transfer" || e->member == "transferFrom" || e->member == "approve") {
                if (!e->low_level) return e;
            }
        }
    }
    return nullptr;
}

}  // namespace scvd::detail
