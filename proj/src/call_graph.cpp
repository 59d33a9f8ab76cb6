#include "scvd/call_graph.hpp"

#include "scvd/parser.hpp"
#include "scvd/project.hpp"
#include "scvd/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace scvd {

using namespace ast;

std::string_view to_string(CallKind k) noexcept {
    switch (k) {
        case CallKind::Internal: return "Internal";
        case CallKind::External: return "External";
        case CallKind::EventEmit: return "EventEmit";
        case CallKind::SuperCall: return "SuperCall";
        case CallKind::Unresolved: return "Unresolved";
    }
    return "Unresolved";
}

std::vector<const CallEdge*> CallGraph::edges_from(std::size_t node) const {
    std::vector<const CallEdge*> out;
    if (node >= outgoing.size()) return out;
    for (auto id : outgoing[node]) out.push_back(&edges[id]);
    return out;
}

std::vector<const CallEdge*> CallGraph::external_calls_from(std::size_t node) const {
    auto all = edges_from(node);
    all.erase(std::remove_if(all.begin(), all.end(), [](const CallEdge* e) { return e->kind != CallKind::External; }),
              all.end());
    return all;
}

namespace {

constexpr std::string_view kBuiltinFunctions[] = {
    "require",  "assert",    "revert",   "keccak256", "sha256", "sha3",     "ripemd160", "ecrecover",
    "addmod",   "mulmod",    "selfdestruct", "suicide", "blockhash", "gasleft", "type",   "address",
    "payable",
};

constexpr std::string_view kBuiltinNamespaces[] = {"abi", "msg", "block", "tx", "string", "bytes", "super"};

constexpr std::string_view kLowLevel[] = {"call", "delegatecall", "staticcall", "callcode"};

// Address-library helpers that forward to a low-level call on the receiver.
constexpr std::string_view kAddressWrappers[] = {
    "sendValue",         "functionCall",         "functionCallWithValue",
    "functionStaticCall", "functionDelegateCall",
};

template <std::size_t N>
bool among(const std::string_view (&table)[N], std::string_view word) {
    return std::find(std::begin(table), std::end(table), word) != std::end(table);
}

const Expr& strip_options(const Expr& callee) {
    const Expr* e = &unparenthesize(callee);
    while (e->kind == ExprKind::CallOptions && e->child(0)) e = &unparenthesize(*e->child(0));
    return *e;
}

std::optional<std::size_t> pick_overload(const ProjectModel& model, const std::vector<std::size_t>& named,
                                         std::size_t argc) {
    for (auto i : named) {
        if (model.functions[i].function->parameters.size() == argc) return i;
    }
    if (!named.empty()) return named.front();
    return std::nullopt;
}

bool is_event_name(const ProjectModel& model, const std::string& contract_qualified, std::string_view name) {
    for (const auto* c : model.linearized(contract_qualified)) {
        for (const auto& ev : c->contract->events) {
            if (ev.name == name) return true;
        }
    }
    return false;
}

struct UsingHit {
    bool found = false;
    bool library_known = false;
    std::optional<std::size_t> callee;
};

// `x.f(...)` through `using L for T`.
UsingHit using_for_call(const ProjectModel& model, const FunctionScope& scope, const TypeNamePtr& receiver,
                        std::string_view member, std::size_t argc) {
    UsingHit hit;
    for (const auto* c : model.linearized(scope.contract())) {
        for (const auto& uf : c->contract->using_for) {
            const bool type_ok = !uf.type || (receiver && uf.type->canonical() == receiver->canonical()) ||
                                 (receiver && uf.type->kind == TypeName::Kind::UserDefined &&
                                  receiver->kind == TypeName::Kind::UserDefined &&
                                  last_segment(uf.type->name) == last_segment(receiver->name));
            const auto* lib = model.resolve_contract(uf.library, c->unit->path);
            if (lib) {
                auto named = model.functions_named(lib->qualified_name, member);
                if (named.empty()) continue;
                if (!type_ok && receiver) continue;
                hit.found = true;
                hit.library_known = true;
                hit.callee = pick_overload(model, named, argc + 1);
                return hit;
            }
            if (type_ok && receiver) hit.found = true;
        }
    }
    return hit;
}

class EdgeBuilder {
public:
    EdgeBuilder(const ProjectModel& model, std::size_t caller)
        : model_(model), handle_(model.functions[caller]), scope_(model, handle_), caller_(caller) {}

    CallEdge classify(const Expr& call, bool is_emit, bool is_revert) const {
        CallEdge edge;
        edge.caller = caller_;
        edge.expr = &call;
        edge.span = call.span;
        edge.arg_count = call.arg_count();
        edge.call_text = handle_.unit->slice(call.span);
        const Expr& callee = strip_options(*call.child(0));
        edge.callee_name = handle_.unit->slice(callee.span);

        if (is_emit) {
            edge.kind = CallKind::EventEmit;
            edge.member = callee.kind == ExprKind::MemberAccess ? callee.text : edge.callee_name;
            return edge;
        }
        if (is_revert) {
            edge.builtin = true;
            edge.member = edge.callee_name;
            return edge;
        }

        if (callee.kind == ExprKind::Identifier) {
            classify_identifier(edge, callee);
        } else if (callee.kind == ExprKind::MemberAccess && callee.child(0)) {
            classify_member(edge, callee);
        } else {
            // `new C(...)`, function-typed expressions, `type(X)...`
            edge.builtin = callee.kind == ExprKind::New;
        }
        return edge;
    }

private:
    void classify_identifier(CallEdge& edge, const Expr& callee) const {
        const auto& name = callee.text;
        edge.member = name;
        if (scope_.lookup(name)) return;  // function-typed local or state variable
        if (among(kBuiltinFunctions, name) || is_elementary(name)) {
            edge.builtin = true;
            return;
        }
        auto named = model_.functions_named(handle_.contract_qualified, name);
        if (!named.empty()) {
            edge.kind = CallKind::Internal;
            edge.callee = pick_overload(model_, named, edge.arg_count);
            return;
        }
        if (is_event_name(model_, handle_.contract_qualified, name)) {
            edge.kind = CallKind::EventEmit;  // pre-0.4.21 event syntax
            return;
        }
        if (model_.resolve_contract(name, handle_.unit->path) || model_.is_struct_name(name) ||
            model_.is_enum_name(name)) {
            edge.builtin = true;  // conversion or struct constructor
            return;
        }
        // Unknown names with a capital first letter are conversions to types
        // that live outside the retained sources (`IERC20(x)`).
        if (!name.empty() && std::isupper(static_cast<unsigned char>(name[0]))) edge.builtin = true;
    }

    void classify_member(CallEdge& edge, const Expr& callee) const {
        const Expr& base = unparenthesize(*callee.child(0));
        const auto& member = callee.text;
        edge.member = member;
        edge.receiver = handle_.unit->slice(base.span);

        if (base.kind == ExprKind::Identifier && base.text == "super") {
            edge.kind = CallKind::SuperCall;
            auto lin = model_.linearization.find(handle_.contract_qualified);
            if (lin != model_.linearization.end()) {
                for (std::size_t k = 1; k < lin->second.size() && !edge.callee; ++k) {
                    auto it = model_.functions_by_contract.find(lin->second[k]);
                    if (it == model_.functions_by_contract.end()) continue;
                    std::vector<std::size_t> named;
                    for (auto i : it->second) {
                        const auto* f = model_.functions[i].function;
                        if (f && f->kind == FunctionKind::Function && f->name == member) named.push_back(i);
                    }
                    edge.callee = pick_overload(model_, named, edge.arg_count);
                }
            }
            return;
        }

        if (base.kind == ExprKind::Identifier && base.text == "this") {
            edge.kind = CallKind::External;
            edge.callee = pick_overload(model_, model_.functions_named(handle_.contract_qualified, member),
                                        edge.arg_count);
            return;
        }

        const bool is_variable = base.kind == ExprKind::Identifier && scope_.lookup(base.text).has_value();
        if (base.kind == ExprKind::Identifier && !is_variable) {
            if (among(kBuiltinNamespaces, base.text)) {
                edge.builtin = true;
                return;
            }
            if (const auto* target = model_.resolve_contract(base.text, handle_.unit->path)) {
                const auto& lin = model_.linearized(handle_.contract_qualified);
                const bool is_base = std::find(lin.begin(), lin.end(), target) != lin.end();
                if (target->contract->kind == ContractKind::Library || is_base) {
                    edge.kind = CallKind::Internal;
                    edge.callee = pick_overload(model_, model_.functions_named(target->qualified_name, member),
                                                edge.arg_count);
                }
                return;
            }
        }

        const auto receiver = scope_.type_of(base);
        edge.receiver_is_address = receiver && receiver->is_address();

        if (among(kLowLevel, member)) {
            edge.kind = CallKind::External;
            edge.low_level = true;
            return;
        }
        if ((member == "transfer" || member == "send") && (edge.receiver_is_address || !receiver) &&
            edge.arg_count == 1) {
            edge.kind = CallKind::External;
            edge.low_level = true;
            return;
        }
        if ((member == "push" || member == "pop" || member == "concat") &&
            (!receiver || receiver->kind == TypeName::Kind::Array ||
             (receiver->kind == TypeName::Kind::Elementary && receiver->name == "bytes"))) {
            edge.builtin = true;
            return;
        }
        // `x.selector`-style members never reach here (not calls); `f.value(...)`
        // and similar legacy options are treated as unresolved.

        auto lib = using_for_call(model_, scope_, receiver, member, edge.arg_count);
        if (lib.found && lib.library_known) {
            edge.kind = CallKind::Internal;
            edge.callee = lib.callee;
            return;
        }
        if (scope_.is_contract_type(receiver)) {
            edge.kind = CallKind::External;
            if (const auto* target = model_.resolve_contract(last_segment(receiver->name), handle_.unit->path)) {
                edge.callee =
                    pick_overload(model_, model_.functions_named(target->qualified_name, member), edge.arg_count);
            }
            return;
        }
        if (edge.receiver_is_address && among(kAddressWrappers, member)) {
            edge.kind = CallKind::External;
            edge.low_level = true;
            return;
        }
    }

    const ProjectModel& model_;
    const FunctionHandle& handle_;
    FunctionScope scope_;
    std::size_t caller_;
};

}  // namespace

CallGraph build_call_graph(const ProjectModel& model) {
    CallGraph g;
    g.outgoing.resize(model.functions.size());
    for (const auto& h : model.functions) g.nodes.push_back(h.ref);

    for (std::size_t i = 0; i < model.functions.size(); ++i) {
        const auto* body = model.functions[i].body();
        if (!body) continue;
        std::set<const Expr*> emits, reverts;
        for_each_stmt(*body, [&](const Stmt& s) {
            if (s.kind == StmtKind::Emit && s.expr) emits.insert(s.expr.get());
            if (s.kind == StmtKind::Revert && s.expr) reverts.insert(s.expr.get());
        });
        std::vector<const Expr*> calls;
        for_each_expr(*body, [&](const Expr& e) {
            if (e.kind == ExprKind::Call && e.child(0)) calls.push_back(&e);
        });
        std::stable_sort(calls.begin(), calls.end(), [](const Expr* a, const Expr* b) {
            if (a->span.start != b->span.start) return a->span.start < b->span.start;
            return a->span.end < b->span.end;
        });

        EdgeBuilder builder(model, i);
        for (const auto* call : calls) {
            g.outgoing[i].push_back(g.edges.size());
            g.edges.push_back(builder.classify(*call, emits.count(call) > 0, reverts.count(call) > 0));
        }
    }
    return g;
}

}  // namespace scvd
