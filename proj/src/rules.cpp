#include "predicates.hpp"
#include "scvd/backends.hpp"
#include "scvd/errors.hpp"
#include "scvd/semantics.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace scvd {

using namespace ast;
using namespace detail;

namespace {

bool is_compound(StmtKind k) {
    switch (k) {
        case StmtKind::Block:
        case StmtKind::Unchecked:
        case StmtKind::If:
        case StmtKind::For:
        case StmtKind::While:
        case StmtKind::DoWhile:
        case StmtKind::Try:
            return true;
        default:
            return false;
    }
}

// Verdict pointing at the statement that holds `span` inside the target.
Verdict flag(const FunctionHandle& h, const Span& span) {
    const Stmt* best = nullptr;
    for_each_stmt(*h.body(), [&](const Stmt& s) {
        if (s.span.contains(span) && (!best || best->span.contains(s.span))) best = &s;
    });
    Verdict v;
    v.is_vulnerable = true;
    v.backend = "rules";
    // for a loop or branch head, the expression alone reads better than the whole block
    const Span& cut = best && !is_compound(best->kind) ? best->span : span;
    v.code_snippet = h.unit->slice(cut);
    v.line = static_cast<int>(cut.start_line - h.ref.span.start_line + 1);
    return v;
}

Verdict clean() {
    Verdict v;
    v.backend = "rules";
    return v;
}

const FunctionHandle& resolve(const ProjectModel& model, const FunctionRef& target, std::size_t& idx) {
    const auto found = model.function_index(target);
    if (!found) throw NotFound("function " + target.display() + " is not part of the project");
    idx = *found;
    return model.functions[idx];
}

bool is_guard(const ModifierInvocation& inv) { return contains(inv.name, "nonreentrant"); }

// Ordered side effects of one function body, used for the
// call-then-effect check.
struct Effect {
    enum Kind { ExternalCall, StateWrite, Emit, InternalCall } kind;
    Span span;
    std::optional<std::size_t> callee;
};

struct Summary {
    bool external = false;  // makes a qualifying external call somewhere in its closure
    bool effect = false;    // writes state or emits somewhere in its closure
    bool reentrant = false; // an external call is followed by an effect inside its closure
};

class ReentrancyAnalysis {
public:
    explicit ReentrancyAnalysis(const ProjectModel& model) : model_(model) {}

    std::vector<Effect> effects(std::size_t node) const {
        const auto& h = model_.functions[node];
        std::vector<Effect> out;
        if (!h.body()) return out;
        for (const auto* e : model_.call_graph.edges_from(node)) {
            switch (e->kind) {
                case CallKind::External:
                    if (!e->is_stipend_transfer()) out.push_back({Effect::ExternalCall, e->span, {}});
                    break;
                case CallKind::EventEmit:
                    out.push_back({Effect::Emit, e->span, {}});
                    break;
                case CallKind::Internal:
                case CallKind::SuperCall:
                    if (e->callee) out.push_back({Effect::InternalCall, e->span, e->callee});
                    break;
                case CallKind::Unresolved:
                    break;
            }
        }
        FunctionScope scope(model_, h);
        for_each_expr(*h.body(), [&](const Expr& e) {
            const bool writes = e.kind == ExprKind::Assignment ||
                                (e.kind == ExprKind::Unary && (e.text == "++" || e.text == "--" || e.text == "delete"));
            if (writes && !scope.state_writes(e).empty()) out.push_back({Effect::StateWrite, e.span, {}});
            if (e.kind == ExprKind::Call) {
                const auto* callee = callee_of(e);
                if (callee && callee->kind == ExprKind::MemberAccess && (callee->text == "push" || callee->text == "pop") &&
                    callee->child(0) && scope.lvalue_state(*callee->child(0)))
                    out.push_back({Effect::StateWrite, e.span, {}});
            }
        });
        // an effect completes when its expression ends; `x = ext()` writes after the call
        std::stable_sort(out.begin(), out.end(), [](const Effect& a, const Effect& b) { return a.span.end < b.span.end; });
        return out;
    }

    const Summary& summary(std::size_t node) {
        if (auto it = memo_.find(node); it != memo_.end()) return it->second;
        memo_[node] = {};  // cycle guard: a recursive call contributes nothing new
        Summary s;
        bool seen_external = false;
        for (const auto& e : effects(node)) {
            bool ext = e.kind == Effect::ExternalCall, eff = e.kind == Effect::StateWrite || e.kind == Effect::Emit;
            if (e.kind == Effect::InternalCall) {
                const auto sub = summary(*e.callee);
                ext = sub.external;
                eff = sub.effect;
                s.reentrant |= sub.reentrant;
            }
            if (eff && seen_external) s.reentrant = true;
            seen_external |= ext;
            s.external |= ext;
            s.effect |= eff;
        }
        return memo_[node] = s;
    }

private:
    const ProjectModel& model_;
    std::map<std::size_t, Summary> memo_;
};

bool is_require_or_revert(const Expr& e, const char* name) {
    const auto* c = callee_of(e);
    return c && c->kind == ExprKind::Identifier && c->text == name;
}

bool is_empty_string(const Expr* e) {
    if (!e) return false;
    const auto& u = unparenthesize(*e);
    return u.kind == ExprKind::Literal && u.literal == LiteralKind::String && u.text.size() <= 2;
}

const Expr* first_expr(const Stmt& body, const std::function<bool(const Expr&)>& pred) {
    const Expr* hit = nullptr;
    for_each_expr(body, [&](const Expr& e) {
        if (!hit && pred(e)) hit = &e;
    });
    return hit;
}

Verdict missing_event(const ProjectModel& model, std::size_t idx) {
    const auto& h = model.functions[idx];
    const auto* f = h.function;
    if (f->kind != FunctionKind::Function || !f->is_public_entry() || f->is_read_only()) return clean();
    ReentrancyAnalysis analysis(model);
    const Effect* first_write = nullptr;
    bool emits = false;
    const auto effects = analysis.effects(idx);
    for (const auto& e : effects) {
        if (e.kind == Effect::Emit) emits = true;
        if (e.kind == Effect::InternalCall) {
            // look through helpers for both the write and the emit
            std::set<std::size_t> seen;
            std::vector<std::size_t> stack{*e.callee};
            while (!stack.empty()) {
                const auto n = stack.back();
                stack.pop_back();
                if (!seen.insert(n).second) continue;
                for (const auto& sub : analysis.effects(n)) {
                    if (sub.kind == Effect::Emit) emits = true;
                    if (sub.kind == Effect::StateWrite && !first_write) first_write = &e;
                    if (sub.kind == Effect::InternalCall) stack.push_back(*sub.callee);
                }
            }
        }
        if (e.kind == Effect::StateWrite && !first_write) first_write = &e;
    }
    if (emits || !first_write) return clean();
    return flag(h, first_write->span);
}

}  // namespace

Verdict rule_detect_reentrancy(const ProjectModel& model, const FunctionRef& target) {
    std::size_t idx = 0;
    const auto& h = resolve(model, target, idx);
    if (!h.body()) return clean();
    if (h.function && std::any_of(h.function->modifiers.begin(), h.function->modifiers.end(), is_guard))
        return clean();

    ReentrancyAnalysis analysis(model);
    bool seen_external = false;
    for (const auto& e : analysis.effects(idx)) {
        bool ext = e.kind == Effect::ExternalCall, eff = e.kind == Effect::StateWrite || e.kind == Effect::Emit;
        if (e.kind == Effect::InternalCall) {
            const auto sub = analysis.summary(*e.callee);
            if (sub.reentrant) return flag(h, e.span);
            ext = sub.external;
            eff = sub.effect;
        }
        if (eff && seen_external) return flag(h, e.span);
        seen_external |= ext;
    }
    return clean();
}

bool rules_support(VulnCategory category) noexcept {
    switch (category) {
        case VulnCategory::Reentrancy:
        case VulnCategory::MissingEvent:
        case VulnCategory::TooManyDigits:
        case VulnCategory::ErrorMessage:
        case VulnCategory::ReturnValueCheck:
        case VulnCategory::DivisionBeforeMultiplication:
        case VulnCategory::ConstantOptimization:
            return true;
        default:
            return false;
    }
}

Verdict rule_detect(VulnCategory category, const ProjectModel& model, const FunctionRef& target) {
    if (!rules_support(category))
        throw UnsupportedCategory("the rules backend has no detector for " + std::string(to_string(category)) +
                                  "; use the llm backend");
    if (category == VulnCategory::Reentrancy) return rule_detect_reentrancy(model, target);

    std::size_t idx = 0;
    const auto& h = resolve(model, target, idx);
    const auto* body = h.body();
    if (!body || !h.function) return clean();

    switch (category) {
        case VulnCategory::MissingEvent:
            return missing_event(model, idx);
        case VulnCategory::TooManyDigits:
            if (const auto* e = first_expr(*body, is_decimal_with_many_digits)) return flag(h, e->span);
            return clean();
        case VulnCategory::ErrorMessage: {
            const auto* e = first_expr(*body, [](const Expr& x) {
                if (is_require_or_revert(x, "require")) return x.arg_count() < 2 || is_empty_string(x.child(2));
                if (is_require_or_revert(x, "revert")) return x.arg_count() == 0 || is_empty_string(x.child(1));
                return false;
            });
            if (e) return flag(h, e->span);
            return clean();
        }
        case VulnCategory::ReturnValueCheck:
            if (const auto* e = first_unused_return(model, idx)) return flag(h, e->span);
            return clean();
        case VulnCategory::DivisionBeforeMultiplication:
            if (const auto* e = first_expr(*body, divides_then_multiplies)) return flag(h, e->span);
            return clean();
        case VulnCategory::ConstantOptimization: {
            FunctionScope scope(model, h);
            std::map<std::string, std::vector<const StateVariable*>> by_owner;
            for (const auto& r : scope.state_refs(*body)) {
                auto it = by_owner.find(r.owner);
                if (it == by_owner.end()) it = by_owner.emplace(r.owner, constant_candidates(model, r.owner)).first;
                if (std::find(it->second.begin(), it->second.end(), r.var) == it->second.end()) continue;
                const auto* owner = model.contract_by_qualified(r.owner);
                Verdict v;
                v.is_vulnerable = true;
                v.backend = "rules";
                v.code_snippet = owner->unit->slice(r.var->span);
                return v;
            }
            return clean();
        }
        default:
            return clean();
    }
}

}  // namespace scvd
