#include "scvd/ast_json.hpp"

namespace scvd {

using nlohmann::ordered_json;
using namespace ast;

namespace {

ordered_json span_json(const Span& s) {
    return ordered_json{{"start", s.start}, {"end", s.end}, {"start_line", s.start_line}, {"end_line", s.end_line}};
}

ordered_json node(std::string_view kind, const Span& s) {
    ordered_json j;
    j["kind"] = kind;
    j["span"] = span_json(s);
    return j;
}

ordered_json type_json(const TypeNamePtr& t) { return t ? ordered_json(t->canonical()) : ordered_json(nullptr); }

ordered_json param_json(const Parameter& p) {
    auto j = node("Parameter", p.span);
    j["type"] = type_json(p.type);
    j["name"] = p.name;
    if (!p.location.empty()) j["location"] = p.location;
    if (p.indexed) j["indexed"] = true;
    return j;
}

ordered_json params_json(const std::vector<Parameter>& ps) {
    auto arr = ordered_json::array();
    for (const auto& p : ps) arr.push_back(param_json(p));
    return arr;
}

ordered_json function_json(const FunctionDefinition& f) {
    auto j = node("FunctionDefinition", f.span);
    j["name"] = f.name;
    j["function_kind"] = to_string(f.kind);
    j["signature"] = f.signature();
    j["visibility"] = to_string(f.visibility);
    j["mutability"] = to_string(f.mutability);
    if (f.is_virtual) j["virtual"] = true;
    if (f.is_override) j["override"] = true;
    j["parameters"] = params_json(f.parameters);
    j["returns"] = params_json(f.returns);
    auto mods = ordered_json::array();
    for (const auto& m : f.modifiers) {
        auto mj = node("ModifierInvocation", m.span);
        mj["name"] = m.name;
        mj["arguments"] = m.arguments;
        mods.push_back(std::move(mj));
    }
    j["modifiers"] = std::move(mods);
    if (f.body) j["children"] = ordered_json::array({to_json(*f.body)});
    return j;
}

ordered_json contract_json(const ContractDefinition& c) {
    auto j = node("ContractDefinition", c.span);
    j["name"] = c.name;
    j["contract_kind"] = to_string(c.kind);
    auto bases = ordered_json::array();
    for (const auto& b : c.bases) bases.push_back(b.name);
    j["bases"] = std::move(bases);
    auto children = ordered_json::array();
    for (const auto& u : c.using_for) {
        auto uj = node("UsingForDirective", u.span);
        uj["library"] = u.library;
        uj["type"] = u.type ? ordered_json(u.type->canonical()) : ordered_json("*");
        children.push_back(std::move(uj));
    }
    for (const auto& s : c.structs) {
        auto sj = node("StructDefinition", s.span);
        sj["name"] = s.name;
        sj["members"] = params_json(s.fields);
        children.push_back(std::move(sj));
    }
    for (const auto& e : c.enums) {
        auto ej = node("EnumDefinition", e.span);
        ej["name"] = e.name;
        ej["values"] = e.values;
        children.push_back(std::move(ej));
    }
    for (const auto& v : c.state_variables) {
        auto vj = node("StateVariableDeclaration", v.span);
        vj["name"] = v.name;
        vj["type"] = type_json(v.type);
        vj["visibility"] = to_string(v.visibility);
        if (v.constant) vj["constant"] = true;
        if (v.immutable) vj["immutable"] = true;
        if (v.initializer) vj["children"] = ordered_json::array({to_json(*v.initializer)});
        children.push_back(std::move(vj));
    }
    for (const auto& e : c.events) {
        auto ej = node("EventDefinition", e.span);
        ej["name"] = e.name;
        ej["parameters"] = params_json(e.parameters);
        if (e.anonymous) ej["anonymous"] = true;
        children.push_back(std::move(ej));
    }
    for (const auto& e : c.errors) {
        auto ej = node("ErrorDefinition", e.span);
        ej["name"] = e.name;
        ej["parameters"] = params_json(e.parameters);
        children.push_back(std::move(ej));
    }
    for (const auto& m : c.modifiers) {
        auto mj = node("ModifierDefinition", m.span);
        mj["name"] = m.name;
        mj["parameters"] = params_json(m.parameters);
        if (m.body) mj["children"] = ordered_json::array({to_json(*m.body)});
        children.push_back(std::move(mj));
    }
    for (const auto& f : c.functions) children.push_back(function_json(f));
    j["children"] = std::move(children);
    return j;
}

}  // namespace

ordered_json to_json(const Expr& e) {
    auto j = node(to_string(e.kind), e.span);
    switch (e.kind) {
        case ExprKind::Identifier: j["name"] = e.text; break;
        case ExprKind::Literal:
            j["value"] = e.text;
            if (!e.unit.empty()) j["subdenomination"] = e.unit;
            break;
        case ExprKind::MemberAccess: j["member"] = e.text; break;
        case ExprKind::Assignment:
        case ExprKind::Binary: j["operator"] = e.text; break;
        case ExprKind::Unary:
            j["operator"] = e.text;
            j["prefix"] = e.prefix;
            break;
        case ExprKind::New: j["type"] = e.text; break;
        default: break;
    }
    if (!e.names.empty()) j["names"] = e.names;
    if (!e.children.empty()) {
        auto arr = ordered_json::array();
        for (const auto& c : e.children) arr.push_back(c ? to_json(*c) : ordered_json(nullptr));
        j["children"] = std::move(arr);
    }
    return j;
}

ordered_json to_json(const Stmt& s) {
    auto j = node(to_string(s.kind), s.span);
    if (s.kind == StmtKind::Assembly) j["text"] = s.text;
    if (!s.decls.empty()) {
        auto arr = ordered_json::array();
        for (const auto& d : s.decls) arr.push_back(d ? param_json(*d) : ordered_json(nullptr));
        j["declarations"] = std::move(arr);
    }
    auto children = ordered_json::array();
    if (s.init) children.push_back(to_json(*s.init));
    if (s.expr) children.push_back(to_json(*s.expr));
    if (s.post) children.push_back(to_json(*s.post));
    for (const auto& b : s.body) children.push_back(to_json(*b));
    if (!children.empty()) j["children"] = std::move(children);
    return j;
}

ordered_json to_json(const SourceUnit& unit) {
    auto j = node("SourceUnit", unit.span);
    j["path"] = unit.path;
    auto children = ordered_json::array();
    for (const auto& p : unit.pragmas) {
        auto pj = node("PragmaDirective", p.span);
        pj["text"] = p.text;
        children.push_back(std::move(pj));
    }
    for (const auto& i : unit.imports) {
        auto ij = node("ImportDirective", i.span);
        ij["path"] = i.path;
        children.push_back(std::move(ij));
    }
    for (const auto& c : unit.contracts) children.push_back(contract_json(c));
    j["children"] = std::move(children);
    if (!unit.diagnostics.empty()) j["diagnostics"] = unit.diagnostics;
    return j;
}

}  // namespace scvd
