#include "scvd/ast.hpp"

#include "scvd/parser.hpp"

namespace scvd::ast {

std::string TypeName::canonical() const {
    switch (kind) {
        case Kind::Elementary:
        case Kind::UserDefined:
        case Kind::Function: return name;
        case Kind::Mapping:
            return "mapping(" + (key ? key->canonical() : "") + "=>" + (value ? value->canonical() : "") + ")";
        case Kind::Array: return (base ? base->canonical() : "") + "[" + length + "]";
    }
    return name;
}

std::string_view to_string(Visibility v) noexcept {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::External: return "external";
        case Visibility::Internal: return "internal";
        case Visibility::Private: return "private";
        case Visibility::Unspecified: break;
    }
    return "unspecified";
}

std::string_view to_string(Mutability m) noexcept {
    switch (m) {
        case Mutability::Pure: return "pure";
        case Mutability::View: return "view";
        case Mutability::Payable: return "payable";
        case Mutability::NonPayable: break;
    }
    return "nonpayable";
}

std::string_view to_string(FunctionKind k) noexcept {
    switch (k) {
        case FunctionKind::Constructor: return "constructor";
        case FunctionKind::Fallback: return "fallback";
        case FunctionKind::Receive: return "receive";
        case FunctionKind::Function: break;
    }
    return "function";
}

std::string_view to_string(ContractKind k) noexcept {
    switch (k) {
        case ContractKind::Interface: return "interface";
        case ContractKind::Library: return "library";
        case ContractKind::AbstractContract: return "abstract-contract";
        case ContractKind::Contract: break;
    }
    return "contract";
}

std::string_view to_string(ExprKind k) noexcept {
    switch (k) {
        case ExprKind::Identifier: return "Identifier";
        case ExprKind::Literal: return "Literal";
        case ExprKind::MemberAccess: return "MemberAccess";
        case ExprKind::IndexAccess: return "IndexAccess";
        case ExprKind::IndexRange: return "IndexRange";
        case ExprKind::Call: return "FunctionCall";
        case ExprKind::CallOptions: return "CallOptions";
        case ExprKind::Assignment: return "Assignment";
        case ExprKind::Binary: return "BinaryOperation";
        case ExprKind::Unary: return "UnaryOperation";
        case ExprKind::Conditional: return "Conditional";
        case ExprKind::Tuple: return "Tuple";
        case ExprKind::ArrayLiteral: return "ArrayLiteral";
        case ExprKind::New: return "NewExpression";
    }
    return "Expression";
}

std::string_view to_string(StmtKind k) noexcept {
    switch (k) {
        case StmtKind::Block: return "Block";
        case StmtKind::Unchecked: return "UncheckedBlock";
        case StmtKind::Expression: return "ExpressionStatement";
        case StmtKind::VariableDecl: return "VariableDeclarationStatement";
        case StmtKind::If: return "IfStatement";
        case StmtKind::For: return "ForStatement";
        case StmtKind::While: return "WhileStatement";
        case StmtKind::DoWhile: return "DoWhileStatement";
        case StmtKind::Return: return "Return";
        case StmtKind::Emit: return "EmitStatement";
        case StmtKind::Revert: return "RevertStatement";
        case StmtKind::Break: return "Break";
        case StmtKind::Continue: return "Continue";
        case StmtKind::Assembly: return "InlineAssembly";
        case StmtKind::Try: return "TryStatement";
        case StmtKind::Placeholder: return "PlaceholderStatement";
    }
    return "Statement";
}

std::string FunctionDefinition::parameter_types() const {
    std::string out;
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        if (i) out += ",";
        out += parameters[i].type ? parameters[i].type->canonical() : "";
    }
    return out;
}

std::string FunctionDefinition::display_name() const {
    return kind == FunctionKind::Function ? name : std::string(to_string(kind));
}

bool FunctionDefinition::has_modifier(std::string_view modifier) const noexcept {
    for (const auto& m : modifiers) {
        if (m.name == modifier) return true;
    }
    return false;
}

const FunctionDefinition* ContractDefinition::constructor() const noexcept {
    for (const auto& f : functions) {
        if (f.kind == FunctionKind::Constructor) return &f;
    }
    return nullptr;
}

std::string SourceUnit::slice(const Span& s) const { return slice_source(text(), s); }

const ContractDefinition* SourceUnit::find_contract(std::string_view name) const noexcept {
    for (const auto& c : contracts) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

bool same_relative_span(const Span& a, std::size_t base_a, const Span& b, std::size_t base_b) {
    return a.start - base_a == b.start - base_b && a.size() == b.size();
}

bool expr_equal(const Expr* a, std::size_t base_a, const Expr* b, std::size_t base_b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind || a->text != b->text || a->literal != b->literal || a->unit != b->unit ||
        a->prefix != b->prefix || a->names != b->names || a->children.size() != b->children.size())
        return false;
    if (!same_relative_span(a->span, base_a, b->span, base_b)) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i) {
        if (!expr_equal(a->children[i].get(), base_a, b->children[i].get(), base_b)) return false;
    }
    return true;
}

bool param_equal(const Parameter& a, std::size_t base_a, const Parameter& b, std::size_t base_b) {
    return a.name == b.name && a.location == b.location && a.indexed == b.indexed &&
           (a.type ? a.type->canonical() : "") == (b.type ? b.type->canonical() : "") &&
           same_relative_span(a.span, base_a, b.span, base_b);
}

bool stmt_equal(const Stmt* a, std::size_t base_a, const Stmt* b, std::size_t base_b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind || a->text != b->text || a->body.size() != b->body.size() ||
        a->decls.size() != b->decls.size() || a->clauses.size() != b->clauses.size())
        return false;
    if (!same_relative_span(a->span, base_a, b->span, base_b)) return false;
    for (std::size_t i = 0; i < a->decls.size(); ++i) {
        if (a->decls[i].has_value() != b->decls[i].has_value()) return false;
        if (a->decls[i] && !param_equal(*a->decls[i], base_a, *b->decls[i], base_b)) return false;
    }
    for (std::size_t i = 0; i < a->clauses.size(); ++i) {
        if (a->clauses[i].error_name != b->clauses[i].error_name ||
            a->clauses[i].params.size() != b->clauses[i].params.size())
            return false;
        for (std::size_t j = 0; j < a->clauses[i].params.size(); ++j) {
            if (!param_equal(a->clauses[i].params[j], base_a, b->clauses[i].params[j], base_b)) return false;
        }
    }
    if (!expr_equal(a->expr.get(), base_a, b->expr.get(), base_b)) return false;
    if (!expr_equal(a->post.get(), base_a, b->post.get(), base_b)) return false;
    if (!stmt_equal(a->init.get(), base_a, b->init.get(), base_b)) return false;
    for (std::size_t i = 0; i < a->body.size(); ++i) {
        if (!stmt_equal(a->body[i].get(), base_a, b->body[i].get(), base_b)) return false;
    }
    return true;
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) { return expr_equal(&a, a.span.start, &b, b.span.start); }

bool structurally_equal(const Stmt& a, const Stmt& b) { return stmt_equal(&a, a.span.start, &b, b.span.start); }

void for_each_stmt(const Stmt& root, const std::function<void(const Stmt&)>& visit) {
    visit(root);
    if (root.init) for_each_stmt(*root.init, visit);
    for (const auto& s : root.body) {
        if (s) for_each_stmt(*s, visit);
    }
}

void for_each_expr(const Expr& root, const std::function<void(const Expr&)>& visit) {
    visit(root);
    for (const auto& c : root.children) {
        if (c) for_each_expr(*c, visit);
    }
}

void for_each_expr(const Stmt& root, const std::function<void(const Expr&)>& visit) {
    for_each_stmt(root, [&](const Stmt& s) {
        if (s.expr) for_each_expr(*s.expr, visit);
        if (s.post) for_each_expr(*s.post, visit);
    });
}

const Expr& unparenthesize(const Expr& e) noexcept {
    const Expr* cur = &e;
    while (cur->kind == ExprKind::Tuple && cur->children.size() == 1 && cur->children[0]) cur = cur->children[0].get();
    return *cur;
}

}  // namespace scvd::ast
