#include "scvd/context.hpp"

#include "scvd/errors.hpp"
#include "scvd/semantics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace scvd {

using namespace ast;

namespace {

template <typename T>
void push_unique(std::vector<T>& out, T value) {
    if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(std::move(value));
}

std::optional<std::size_t> node_of(const CallGraph& g, const FunctionRef& ref) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i] == ref) return i;
    }
    return std::nullopt;
}

}  // namespace

std::vector<FunctionRef> collect_callstack(const CallGraph& graph, const FunctionRef& target, int depth) {
    std::vector<FunctionRef> out;
    const auto start = node_of(graph, target);
    if (!start || depth <= 0) return out;

    std::set<std::size_t> seen{*start};
    std::set<std::string> unresolved_seen;
    std::deque<std::pair<std::size_t, int>> queue{{*start, 0}};
    while (!queue.empty()) {
        const auto [node, level] = queue.front();
        queue.pop_front();
        if (level >= depth) continue;
        for (const auto* e : graph.edges_from(node)) {
            const bool follow = (e->kind == CallKind::Internal || e->kind == CallKind::SuperCall) && e->callee;
            if (follow) {
                if (!seen.insert(*e->callee).second) continue;
                out.push_back(graph.nodes[*e->callee]);
                queue.emplace_back(*e->callee, level + 1);
            } else if (e->kind == CallKind::Unresolved && !e->builtin) {
                if (!unresolved_seen.insert(e->call_text).second) continue;
                FunctionRef ref;
                ref.name = e->callee_name;
                ref.signature = e->call_text;
                ref.span = e->span;
                out.push_back(std::move(ref));
            }
        }
    }
    return out;
}

ContextBundle extract_context(const ProjectModel& model, const FunctionRef& target, VulnCategory /*category*/,
                              int depth) {
    if (depth < 0) throw OutOfRange("callstack depth must be >= 0");
    const auto target_idx = model.function_index(target);
    if (!target_idx) throw NotFound("function " + target.display() + " is not part of the project");
    const auto& h = model.functions[*target_idx];
    const auto& g = model.call_graph;

    ContextBundle b;
    for (const auto& imp : h.unit->imports) b.imports.push_back(h.unit->slice(imp.span));
    b.target_function = h.unit->slice(h.ref.span);

    // closure: target plus resolved callstack members
    std::vector<std::size_t> closure{*target_idx};
    for (const auto& ref : collect_callstack(g, target, depth)) {
        if (ref.file.empty()) {
            b.callstack.push_back({ref.signature, ""});
            continue;
        }
        const auto idx = model.function_index(ref);
        const auto& callee = model.functions[*idx];
        b.callstack.push_back({ref.display(), callee.unit->slice(ref.span)});
        closure.push_back(*idx);
    }

    // modifiers applied to the target
    std::vector<std::size_t> applied;
    if (h.function) {
        const auto lin = model.linearized(h.contract_qualified);
        for (const auto& inv : h.function->modifiers) {
            b.modifiers.push_back(h.unit->slice(inv.span));
            for (const auto* c : lin) {
                auto it = model.functions_by_contract.find(c->qualified_name);
                if (it == model.functions_by_contract.end()) continue;
                auto hit = std::find_if(it->second.begin(), it->second.end(), [&](std::size_t i) {
                    return model.functions[i].modifier && model.functions[i].modifier->name == inv.name;
                });
                if (hit != it->second.end()) {
                    push_unique(applied, *hit);
                    break;
                }
            }
        }
    }
    for (auto i : applied) {
        const auto& m = model.functions[i];
        push_unique(b.modifiers_codes, m.unit->slice(m.ref.span));
    }

    // state variables: those the target touches first, then the rest of the closure
    auto refs_of = [&](std::size_t i) {
        const auto& f = model.functions[i];
        std::vector<const StateVariable*> vars;
        if (!f.body()) return vars;
        FunctionScope scope(model, f);
        for (const auto& r : scope.state_refs(*f.body())) vars.push_back(r.var);
        return vars;
    };
    std::vector<const StateVariable*> target_vars = refs_of(*target_idx);
    std::vector<const StateVariable*> other_vars;
    for (std::size_t k = 1; k < closure.size(); ++k) {
        for (const auto* v : refs_of(closure[k])) other_vars.push_back(v);
    }
    for (auto i : applied) {
        for (const auto* v : refs_of(i)) other_vars.push_back(v);
    }
    // declaration order, bases first (storage layout order)
    std::map<const StateVariable*, std::pair<std::size_t, std::string>> owner_text;
    std::vector<const StateVariable*> layout;
    {
        auto lin = model.linearized(h.contract_qualified);
        std::vector<const ContractRef*> contracts(lin.rbegin(), lin.rend());
        for (std::size_t k = 1; k < closure.size(); ++k) {
            for (const auto* c : model.linearized(model.functions[closure[k]].contract_qualified)) {
                if (std::find(contracts.begin(), contracts.end(), c) == contracts.end()) contracts.push_back(c);
            }
        }
        for (const auto* c : contracts) {
            for (const auto& v : c->contract->state_variables) {
                layout.push_back(&v);
                owner_text[&v] = {layout.size(), c->unit->slice(v.span)};
            }
        }
    }
    auto emit_vars = [&](const std::vector<const StateVariable*>& wanted) {
        for (const auto* v : layout) {
            if (std::find(wanted.begin(), wanted.end(), v) != wanted.end())
                push_unique(b.internal_states, owner_text[v].second);
        }
    };
    emit_vars(target_vars);
    emit_vars(other_vars);

    if (const auto* ctor = h.contract->constructor(); ctor && ctor->body) b.constructor = h.unit->slice(ctor->span);
    for (const auto* c : model.linearized(h.contract_qualified)) {
        auto it = model.functions_by_contract.find(c->qualified_name);
        if (it == model.functions_by_contract.end()) continue;
        for (auto i : it->second) {
            const auto* f = model.functions[i].function;
            if (f && f->kind == FunctionKind::Function && (f->name == "initialize" || f->has_modifier("initializer"))) {
                b.initializer = model.functions[i].unit->slice(f->span);
                break;
            }
        }
        if (!b.initializer.empty()) break;
    }

    // calls and events over the closure
    std::vector<std::string> event_defs, emit_texts;
    for (auto i : closure) {
        const auto& f = model.functions[i];
        std::map<const Expr*, const Stmt*> emit_stmt;
        if (f.body()) {
            for_each_stmt(*f.body(), [&](const Stmt& s) {
                if (s.kind == StmtKind::Emit && s.expr) emit_stmt[s.expr.get()] = &s;
            });
        }
        for (const auto* e : g.edges_from(i)) {
            switch (e->kind) {
                case CallKind::Internal:
                case CallKind::SuperCall:
                    if (e->callee) push_unique(b.internal_calls, g.nodes[*e->callee].display());
                    break;
                case CallKind::External:
                    push_unique(b.external_calls, e->call_text);
                    push_unique(b.external_objects, e->receiver);
                    break;
                case CallKind::EventEmit: {
                    for (const auto* c : model.linearized(f.contract_qualified)) {
                        auto ev = std::find_if(c->contract->events.begin(), c->contract->events.end(),
                                               [&](const auto& d) { return d.name == e->member; });
                        if (ev != c->contract->events.end()) {
                            push_unique(event_defs, c->unit->slice(ev->span));
                            break;
                        }
                    }
                    if (auto it = emit_stmt.find(e->expr); it != emit_stmt.end())
                        push_unique(emit_texts, f.unit->slice(it->second->span));
                    break;
                }
                case CallKind::Unresolved:
                    break;
            }
        }
    }
    b.events = std::move(event_defs);
    for (auto& t : emit_texts) push_unique(b.events, std::move(t));
    return b;
}

std::string bundle_to_json(const ContextBundle& b) {
    nlohmann::ordered_json j;
    j["imports"] = b.imports;
    j["internal_states"] = b.internal_states;
    j["target_function"] = b.target_function;
    auto stack = nlohmann::ordered_json::array();
    for (const auto& e : b.callstack) {
        nlohmann::ordered_json entry;
        entry["signature"] = e.signature;
        entry["source"] = e.source;
        stack.push_back(std::move(entry));
    }
    j["callstack"] = std::move(stack);
    j["modifiers"] = b.modifiers;
    j["modifiers_codes"] = b.modifiers_codes;
    j["constructor"] = b.constructor;
    j["initializer"] = b.initializer;
    j["internal_calls"] = b.internal_calls;
    j["external_calls"] = b.external_calls;
    j["external_objects"] = b.external_objects;
    j["events"] = b.events;
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

ContextBundle bundle_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("bundle is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("bundle must be a JSON object");
    for (auto key : kBundleKeys) {
        if (!j.contains(std::string(key))) throw ConfigError("bundle is missing key '" + std::string(key) + "'");
    }
    auto strings = [&](const char* key) {
        const auto& v = j.at(key);
        if (!v.is_array()) throw ConfigError(std::string("bundle key '") + key + "' must be an array");
        std::vector<std::string> out;
        for (const auto& s : v) {
            if (!s.is_string()) throw ConfigError(std::string("bundle key '") + key + "' must hold strings");
            out.push_back(s.get<std::string>());
        }
        return out;
    };
    auto string = [&](const char* key) {
        const auto& v = j.at(key);
        if (!v.is_string()) throw ConfigError(std::string("bundle key '") + key + "' must be a string");
        return v.get<std::string>();
    };

    ContextBundle b;
    b.imports = strings("imports");
    b.internal_states = strings("internal_states");
    b.target_function = string("target_function");
    const auto& stack = j.at("callstack");
    if (!stack.is_array()) throw ConfigError("bundle key 'callstack' must be an array");
    for (const auto& e : stack) {
        if (!e.is_object() || !e.contains("signature") || !e.contains("source") || !e["signature"].is_string() ||
            !e["source"].is_string())
            throw ConfigError("callstack entries need string 'signature' and 'source'");
        b.callstack.push_back({e["signature"].get<std::string>(), e["source"].get<std::string>()});
    }
    b.modifiers = strings("modifiers");
    b.modifiers_codes = strings("modifiers_codes");
    b.constructor = string("constructor");
    b.initializer = string("initializer");
    b.internal_calls = strings("internal_calls");
    b.external_calls = strings("external_calls");
    b.external_objects = strings("external_objects");
    b.events = strings("events");
    return b;
}

}  // namespace scvd
