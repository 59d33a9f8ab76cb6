#include "scvd/semantics.hpp"

#include "scvd/parser.hpp"

#include <algorithm>

namespace scvd {

using namespace ast;

ast::TypeNamePtr make_elementary(std::string name) {
    auto t = std::make_shared<TypeName>();
    t->kind = TypeName::Kind::Elementary;
    t->name = std::move(name);
    return t;
}

ast::TypeNamePtr make_user_defined(std::string name) {
    auto t = std::make_shared<TypeName>();
    t->kind = TypeName::Kind::UserDefined;
    t->name = std::move(name);
    return t;
}

std::string_view last_segment(std::string_view dotted) noexcept {
    const auto dot = dotted.rfind('.');
    return dot == std::string_view::npos ? dotted : dotted.substr(dot + 1);
}

namespace {

const Expr& strip_options(const Expr& callee) {
    const Expr* e = &unparenthesize(callee);
    while (e->kind == ExprKind::CallOptions && e->child(0)) e = &unparenthesize(*e->child(0));
    return *e;
}

TypeNamePtr first_return(const ProjectModel& model, const std::vector<std::size_t>& candidates, std::size_t argc) {
    const FunctionHandle* pick = nullptr;
    for (auto i : candidates) {
        const auto& h = model.functions[i];
        if (!h.function) continue;
        if (h.function->parameters.size() == argc) {
            pick = &h;
            break;
        }
        if (!pick) pick = &h;
    }
    if (!pick || pick->function->returns.empty()) return nullptr;
    return pick->function->returns.front().type;
}

}  // namespace

FunctionScope::FunctionScope(const ProjectModel& model, const FunctionHandle& fn)
    : model_(&model), contract_(fn.contract_qualified) {
    for (const auto& p : fn.parameters()) add_local(p);
    if (fn.function) {
        for (const auto& p : fn.function->returns) add_local(p);
    }
    if (const auto* body = fn.body()) collect_locals(*body);
}

FunctionScope::FunctionScope(const ProjectModel& model, std::string contract_qualified)
    : model_(&model), contract_(std::move(contract_qualified)) {}

const ast::ContractDefinition* FunctionScope::contract_def() const noexcept {
    const auto* c = model_->contract_by_qualified(contract_);
    return c ? c->contract : nullptr;
}

void FunctionScope::add_local(const Parameter& p) {
    if (p.name.empty() || locals_.count(p.name)) return;
    locals_.emplace(p.name, Binding{p.type, false, nullptr, {}, p.location});
}

void FunctionScope::collect_locals(const Stmt& body) {
    for_each_stmt(body, [&](const Stmt& s) {
        if (s.kind == StmtKind::VariableDecl) {
            for (const auto& d : s.decls) {
                if (d) add_local(*d);
            }
            if (s.decls.size() == 1 && s.decls[0] && s.decls[0]->location == "storage" && s.expr) {
                if (auto origin = lvalue_state(*s.expr)) storage_aliases_.emplace(s.decls[0]->name, *origin);
            }
        } else if (s.kind == StmtKind::Try) {
            for (const auto& clause : s.clauses) {
                for (const auto& p : clause.params) add_local(p);
            }
        }
    });
}

std::optional<Binding> FunctionScope::lookup(std::string_view name) const {
    if (auto it = locals_.find(name); it != locals_.end()) return it->second;
    for (const auto* c : model_->linearized(contract_)) {
        for (const auto& v : c->contract->state_variables) {
            if (v.name == name) return Binding{v.type, true, &v, c->qualified_name, "storage"};
        }
    }
    return std::nullopt;
}

bool FunctionScope::is_contract_type(const TypeNamePtr& t) const {
    if (!t || t->kind != TypeName::Kind::UserDefined) return false;
    const auto name = last_segment(t->name);
    const auto* from = model_->contract_by_qualified(contract_);
    if (model_->resolve_contract(name, from ? std::string_view(from->unit->path) : std::string_view{})) return true;
    return !model_->is_struct_name(name) && !model_->is_enum_name(name);
}

TypeNamePtr FunctionScope::type_of(const Expr& expr) const {
    const Expr& e = unparenthesize(expr);
    switch (e.kind) {
        case ExprKind::Identifier: {
            if (e.text == "this") {
                const auto* c = contract_def();
                return c ? make_user_defined(c->name) : nullptr;
            }
            if (e.text == "now") return make_elementary("uint256");
            if (auto b = lookup(e.text)) return b->type;
            return nullptr;
        }
        case ExprKind::Literal:
            if (e.literal == LiteralKind::Number) return make_elementary("uint256");
            if (e.literal == LiteralKind::Bool) return make_elementary("bool");
            if (e.literal == LiteralKind::String) return make_elementary("string");
            return nullptr;
        case ExprKind::MemberAccess: {
            const Expr* base = e.child(0);
            if (!base) return nullptr;
            const Expr& b = unparenthesize(*base);
            if (b.kind == ExprKind::Identifier && !lookup(b.text)) {
                if ((b.text == "msg" && e.text == "sender") || (b.text == "tx" && e.text == "origin") ||
                    (b.text == "block" && e.text == "coinbase"))
                    return make_elementary("address");
                if (b.text == "msg" || b.text == "block" || b.text == "tx") {
                    if (e.text == "data") return make_elementary("bytes");
                    if (e.text == "sig") return make_elementary("bytes4");
                    return make_elementary("uint256");
                }
            }
            auto bt = type_of(b);
            if (!bt) return nullptr;
            if (bt->is_address() && e.text == "balance") return make_elementary("uint256");
            if (e.text == "length" &&
                (bt->kind == TypeName::Kind::Array || (bt->kind == TypeName::Kind::Elementary && bt->name == "bytes")))
                return make_elementary("uint256");
            if (bt->kind == TypeName::Kind::UserDefined) {
                if (const auto* st = model_->find_struct(bt->name, contract_)) {
                    for (const auto& f : st->fields) {
                        if (f.name == e.text) return f.type;
                    }
                }
            }
            return nullptr;
        }
        case ExprKind::IndexAccess: {
            auto bt = e.child(0) ? type_of(*e.child(0)) : nullptr;
            if (!bt) return nullptr;
            if (bt->kind == TypeName::Kind::Mapping) return bt->value;
            if (bt->kind == TypeName::Kind::Array) return bt->base;
            if (bt->kind == TypeName::Kind::Elementary && bt->name == "bytes") return make_elementary("bytes1");
            return nullptr;
        }
        case ExprKind::IndexRange:
            return e.child(0) ? type_of(*e.child(0)) : nullptr;
        case ExprKind::Call: {
            if (!e.child(0)) return nullptr;
            const Expr& callee = strip_options(*e.child(0));
            const auto argc = e.arg_count();
            if (callee.kind == ExprKind::New) return callee.type;
            if (callee.kind == ExprKind::Identifier) {
                const auto& name = callee.text;
                if (name == "address" || name == "payable") {
                    auto t = std::make_shared<TypeName>();
                    t->name = "address";
                    t->payable = name == "payable";
                    return t;
                }
                if (is_elementary(name)) return make_elementary(normalize_elementary(name));
                if (lookup(name)) return nullptr;
                auto named = model_->functions_named(contract_, name);
                if (!named.empty()) return first_return(*model_, named, argc);
                const auto* from = model_->contract_by_qualified(contract_);
                if (model_->resolve_contract(name, from ? std::string_view(from->unit->path) : std::string_view{}) ||
                    model_->is_struct_name(name))
                    return make_user_defined(name);
                return nullptr;
            }
            if (callee.kind == ExprKind::MemberAccess && callee.child(0)) {
                const Expr& base = unparenthesize(*callee.child(0));
                const auto* from = model_->contract_by_qualified(contract_);
                const std::string_view from_file = from ? std::string_view(from->unit->path) : std::string_view{};
                if (base.kind == ExprKind::Identifier && !lookup(base.text) && base.text != "this") {
                    if (const auto* target = model_->resolve_contract(base.text, from_file)) {
                        return first_return(*model_, model_->functions_named(target->qualified_name, callee.text),
                                            argc);
                    }
                    return nullptr;
                }
                auto bt = type_of(base);
                if (is_contract_type(bt)) {
                    if (const auto* target = model_->resolve_contract(last_segment(bt->name), from_file)) {
                        if (auto r = first_return(*model_, model_->functions_named(target->qualified_name, callee.text),
                                                  argc))
                            return r;
                    }
                }
                for (const auto* c : model_->linearized(contract_)) {
                    for (const auto& uf : c->contract->using_for) {
                        const auto* lib = model_->resolve_contract(uf.library, c->unit->path);
                        if (!lib) continue;
                        auto named = model_->functions_named(lib->qualified_name, callee.text);
                        if (!named.empty()) return first_return(*model_, named, argc + 1);
                    }
                }
            }
            return nullptr;
        }
        case ExprKind::New:
            return e.type;
        case ExprKind::Conditional:
            return e.child(1) ? type_of(*e.child(1)) : nullptr;
        case ExprKind::Tuple:
            return e.children.size() == 1 && e.child(0) ? type_of(*e.child(0)) : nullptr;
        case ExprKind::Assignment:
            return e.child(0) ? type_of(*e.child(0)) : nullptr;
        case ExprKind::Binary: {
            static constexpr std::string_view kBoolOps[] = {"==", "!=", "<", ">", "<=", ">=", "&&", "||"};
            if (std::find(std::begin(kBoolOps), std::end(kBoolOps), e.text) != std::end(kBoolOps))
                return make_elementary("bool");
            return e.child(0) ? type_of(*e.child(0)) : nullptr;
        }
        case ExprKind::Unary:
            if (e.text == "!") return make_elementary("bool");
            return e.child(0) ? type_of(*e.child(0)) : nullptr;
        case ExprKind::CallOptions:
        case ExprKind::ArrayLiteral:
            return nullptr;
    }
    return nullptr;
}

std::optional<StateAccess> FunctionScope::lvalue_state(const Expr& lvalue) const {
    const Expr* cur = &unparenthesize(lvalue);
    for (;;) {
        if ((cur->kind == ExprKind::MemberAccess || cur->kind == ExprKind::IndexAccess ||
             cur->kind == ExprKind::IndexRange) &&
            cur->child(0)) {
            cur = &unparenthesize(*cur->child(0));
        } else {
            break;
        }
    }
    if (cur->kind != ExprKind::Identifier) return std::nullopt;
    if (auto it = storage_aliases_.find(cur->text); it != storage_aliases_.end()) {
        auto access = it->second;
        access.site = &lvalue;
        return access;
    }
    auto b = lookup(cur->text);
    if (!b) return std::nullopt;
    if (b->is_state) return StateAccess{b->state, b->owner, &lvalue};
    if (b->location == "storage") return StateAccess{nullptr, {}, &lvalue};
    return std::nullopt;
}

std::vector<StateAccess> FunctionScope::state_writes(const Expr& root) const {
    std::vector<StateAccess> out;
    std::function<void(const Expr&)> target = [&](const Expr& lhs) {
        const Expr& l = unparenthesize(lhs);
        if (l.kind == ExprKind::Tuple) {
            for (const auto& c : l.children) {
                if (c) target(*c);
            }
            return;
        }
        if (auto w = lvalue_state(l)) out.push_back(*w);
    };
    for_each_expr(root, [&](const Expr& e) {
        if (e.kind == ExprKind::Assignment && e.child(0)) {
            target(*e.child(0));
        } else if (e.kind == ExprKind::Unary && (e.text == "++" || e.text == "--" || e.text == "delete") &&
                   e.child(0)) {
            target(*e.child(0));
        } else if (e.kind == ExprKind::Call && e.child(0)) {
            const Expr& callee = strip_options(*e.child(0));
            if (callee.kind == ExprKind::MemberAccess && (callee.text == "push" || callee.text == "pop") &&
                callee.child(0))
                target(*callee.child(0));
        }
    });
    return out;
}

std::vector<StateAccess> FunctionScope::state_writes(const Stmt& s) const {
    std::vector<StateAccess> out;
    for_each_stmt(s, [&](const Stmt& st) {
        for (const Expr* e : {st.expr.get(), st.post.get()}) {
            if (!e) continue;
            auto w = state_writes(*e);
            out.insert(out.end(), w.begin(), w.end());
        }
    });
    return out;
}

std::vector<StateAccess> FunctionScope::state_refs(const Expr& root) const {
    std::vector<StateAccess> out;
    for_each_expr(root, [&](const Expr& e) {
        if (e.kind != ExprKind::Identifier) return;
        std::optional<StateAccess> hit;
        if (auto it = storage_aliases_.find(e.text); it != storage_aliases_.end()) {
            hit = it->second;
        } else if (auto b = lookup(e.text); b && b->is_state) {
            hit = StateAccess{b->state, b->owner, nullptr};
        }
        if (!hit || !hit->var) return;
        hit->site = &e;
        if (std::find(out.begin(), out.end(), *hit) == out.end()) out.push_back(*hit);
    });
    return out;
}

std::vector<StateAccess> FunctionScope::state_refs(const Stmt& s) const {
    std::vector<StateAccess> out;
    for_each_stmt(s, [&](const Stmt& st) {
        for (const Expr* e : {st.expr.get(), st.post.get()}) {
            if (!e) continue;
            for (auto& r : state_refs(*e)) {
                if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
            }
        }
    });
    return out;
}

}  // namespace scvd
