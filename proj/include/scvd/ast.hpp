#pragma once

#include "scvd/lexer.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scvd::ast {

struct TypeName;
using TypeNamePtr = std::shared_ptr<const TypeName>;

struct TypeName {
    enum class Kind { Elementary, UserDefined, Mapping, Array, Function };

    Kind kind = Kind::Elementary;
    // Elementary: normalized name (uint -> uint256). UserDefined: dotted path.
    std::string name;
    bool payable = false;
    TypeNamePtr key;    // Mapping
    TypeNamePtr value;  // Mapping
    TypeNamePtr base;   // Array
    std::string length; // Array, empty when dynamic
    Span span;

    /// Canonical spelling without whitespace, e.g. `mapping(address=>uint256)`.
    std::string canonical() const;
    bool is_address() const noexcept { return kind == Kind::Elementary && name == "address"; }
};

enum class ExprKind {
    Identifier,
    Literal,
    MemberAccess,
    IndexAccess,
    IndexRange,
    Call,
    CallOptions,
    Assignment,
    Binary,
    Unary,
    Conditional,
    Tuple,
    ArrayLiteral,
    New,
};

enum class LiteralKind { None, Number, String, Bool, HexString };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

// Child layout per kind:
//   MemberAccess  [object]                 text = member name
//   IndexAccess   [base, index?]
//   IndexRange    [base, start?, end?]
//   Call          [callee, args...]        names = argument names for `f({a: x})`
//   CallOptions   [callee, values...]      names = option names (`value`, `gas`)
//   Assignment    [lhs, rhs]               text = operator
//   Binary        [lhs, rhs]               text = operator
//   Unary         [operand]                text = operator, prefix flag
//   Conditional   [cond, then, else]
//   Tuple         [components...]          null entries are holes: `(, x)`
//   New           []                       type = created type
struct Expr {
    ExprKind kind = ExprKind::Identifier;
    Span span;
    std::string text;
    LiteralKind literal = LiteralKind::None;
    std::string unit;  // number sub-denomination (`ether`, `days`, ...)
    bool prefix = false;
    std::vector<ExprPtr> children;
    std::vector<std::string> names;
    TypeNamePtr type;

    const Expr* child(std::size_t i) const noexcept { return i < children.size() ? children[i].get() : nullptr; }
    /// Number of call arguments (Call only).
    std::size_t arg_count() const noexcept { return children.empty() ? 0 : children.size() - 1; }
};

struct Parameter {
    TypeNamePtr type;
    std::string location;  // memory | storage | calldata | ""
    std::string name;
    bool indexed = false;
    Span span;
};

enum class StmtKind {
    Block,
    Unchecked,
    Expression,
    VariableDecl,
    If,
    For,
    While,
    DoWhile,
    Return,
    Emit,
    Revert,
    Break,
    Continue,
    Assembly,
    Try,
    Placeholder,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct TryClause {
    std::string error_name;  // "" for success and bare catch, "Error" / "Panic" otherwise
    std::vector<Parameter> params;
};

// Field usage per kind:
//   Block/Unchecked  body = statements
//   Expression       expr
//   VariableDecl     decls (nullopt = tuple hole), expr = initializer or null
//   If               expr = condition, body = [then, else?]
//   For              init?, expr = condition?, post?, body = [loop body]
//   While/DoWhile    expr = condition, body = [loop body]
//   Return           expr?
//   Emit/Revert      expr = the call
//   Assembly         text = raw `{...}` source, opaque
//   Try              expr = call, body = [success block, catch blocks...], clauses parallel to body
struct Stmt {
    StmtKind kind = StmtKind::Block;
    Span span;
    std::vector<std::optional<Parameter>> decls;
    ExprPtr expr;
    ExprPtr post;
    StmtPtr init;
    std::vector<StmtPtr> body;
    std::vector<TryClause> clauses;
    std::string text;
};

enum class Visibility { Unspecified, Public, External, Internal, Private };
enum class Mutability { NonPayable, Pure, View, Payable };
enum class FunctionKind { Function, Constructor, Fallback, Receive };
enum class ContractKind { Contract, Interface, Library, AbstractContract };

std::string_view to_string(Visibility v) noexcept;
std::string_view to_string(Mutability m) noexcept;
std::string_view to_string(FunctionKind k) noexcept;
std::string_view to_string(ContractKind k) noexcept;
std::string_view to_string(ExprKind k) noexcept;
std::string_view to_string(StmtKind k) noexcept;

struct ModifierInvocation {
    std::string name;
    std::vector<std::string> arguments;  // verbatim argument texts
    bool has_parens = false;
    Span span;
};

struct FunctionDefinition {
    std::string name;  // empty for constructor / fallback / receive
    FunctionKind kind = FunctionKind::Function;
    std::vector<Parameter> parameters;
    std::vector<Parameter> returns;
    Visibility visibility = Visibility::Unspecified;
    Mutability mutability = Mutability::NonPayable;
    bool is_virtual = false;
    bool is_override = false;
    std::vector<ModifierInvocation> modifiers;
    StmtPtr body;  // Block, or null for declarations
    Span span;

    /// Comma-separated canonical parameter types, e.g. `uint256,address`.
    std::string parameter_types() const;
    /// Name used in listings: the declared name, or the special kind word.
    std::string display_name() const;
    std::string signature() const { return display_name() + "(" + parameter_types() + ")"; }
    bool is_public_entry() const noexcept {
        return visibility == Visibility::Public || visibility == Visibility::External;
    }
    bool is_read_only() const noexcept { return mutability == Mutability::View || mutability == Mutability::Pure; }
    bool has_modifier(std::string_view name) const noexcept;
};

struct ModifierDefinition {
    std::string name;
    std::vector<Parameter> parameters;
    bool is_virtual = false;
    StmtPtr body;
    Span span;
};

struct EventDefinition {
    std::string name;
    std::vector<Parameter> parameters;
    bool anonymous = false;
    Span span;
};

struct ErrorDefinition {
    std::string name;
    std::vector<Parameter> parameters;
    Span span;
};

struct StructDefinition {
    std::string name;
    std::vector<Parameter> fields;
    Span span;
};

struct EnumDefinition {
    std::string name;
    std::vector<std::string> values;
    Span span;
};

struct StateVariable {
    TypeNamePtr type;
    std::string name;
    Visibility visibility = Visibility::Unspecified;
    bool constant = false;
    bool immutable = false;
    ExprPtr initializer;
    Span span;
};

struct UsingFor {
    std::string library;
    TypeNamePtr type;  // null for `*`
    Span span;
};

struct InheritanceSpecifier {
    std::string name;
    std::vector<std::string> arguments;
    Span span;
};

struct ContractDefinition {
    std::string name;
    ContractKind kind = ContractKind::Contract;
    std::vector<InheritanceSpecifier> bases;
    std::vector<StateVariable> state_variables;
    std::vector<FunctionDefinition> functions;
    std::vector<ModifierDefinition> modifiers;
    std::vector<EventDefinition> events;
    std::vector<ErrorDefinition> errors;
    std::vector<StructDefinition> structs;
    std::vector<EnumDefinition> enums;
    std::vector<UsingFor> using_for;
    Span span;

    const FunctionDefinition* constructor() const noexcept;
};

struct Directive {
    std::string text;
    Span span;
};

struct ImportDirective {
    std::string path;  // the quoted path, unquoted
    std::string text;  // the full statement
    Span span;
};

struct SourceUnit {
    std::string path;
    std::shared_ptr<const std::string> source;
    std::vector<Directive> pragmas;
    std::vector<ImportDirective> imports;
    std::vector<ContractDefinition> contracts;
    std::vector<std::string> diagnostics;
    Span span;

    std::string_view text() const noexcept { return source ? std::string_view(*source) : std::string_view{}; }
    std::string slice(const Span& span) const;
    const ContractDefinition* find_contract(std::string_view name) const noexcept;
};

/// Structural comparison: kinds, texts and shapes must agree, and every span
/// must sit at the same offset relative to its root.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);

/// Pre-order traversal helpers. Expression visitors see every expression in
/// the statement tree, including those nested in sub-statements.
void for_each_stmt(const Stmt& root, const std::function<void(const Stmt&)>& visit);
void for_each_expr(const Stmt& root, const std::function<void(const Expr&)>& visit);
void for_each_expr(const Expr& root, const std::function<void(const Expr&)>& visit);

/// Strips single-element parenthesized tuples.
const Expr& unparenthesize(const Expr& e) noexcept;

}  // namespace scvd::ast
