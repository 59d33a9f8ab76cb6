#include "scvd/parser.hpp"

#include "scvd/errors.hpp"

#include <algorithm>
#include <iterator>

namespace scvd {

using namespace ast;

namespace {

bool is_sized_name(std::string_view name, std::string_view prefix, int lo, int hi, int step) {
    if (name.substr(0, prefix.size()) != prefix) return false;
    auto rest = name.substr(prefix.size());
    if (rest.empty() || rest.size() > 3) return false;
    int n = 0;
    for (char c : rest) {
        if (c < '0' || c > '9') return false;
        n = n * 10 + (c - '0');
    }
    return n >= lo && n <= hi && n % step == 0 && rest[0] != '0';
}

constexpr std::string_view kUnits[] = {
    "wei", "gwei", "ether", "szabo", "finney", "seconds", "minutes", "hours", "days", "weeks", "years",
};

constexpr std::string_view kAssignOps[] = {
    "=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>=",
};

bool is_unit(std::string_view word) { return std::find(std::begin(kUnits), std::end(kUnits), word) != std::end(kUnits); }

bool is_assign_op(std::string_view op) {
    return std::find(std::begin(kAssignOps), std::end(kAssignOps), op) != std::end(kAssignOps);
}

int binary_precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
    if (op == "|") return 5;
    if (op == "^") return 6;
    if (op == "&") return 7;
    if (op == "<<" || op == ">>" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    if (op == "**") return 11;
    return 0;
}

}  // namespace

bool is_elementary(std::string_view name) {
    if (name == "address" || name == "bool" || name == "string" || name == "bytes" || name == "byte" ||
        name == "uint" || name == "int" || name == "fixed" || name == "ufixed")
        return true;
    return is_sized_name(name, "uint", 8, 256, 8) || is_sized_name(name, "int", 8, 256, 8) ||
           is_sized_name(name, "bytes", 1, 32, 1);
}

std::string normalize_elementary(std::string_view name) {
    if (name == "uint") return "uint256";
    if (name == "int") return "int256";
    if (name == "byte") return "bytes1";
    return std::string(name);
}

namespace {

class Parser {
public:
    Parser(std::string_view src, std::string path, std::uint32_t file_id)
        : src_(src), path_(std::move(path)), file_id_(file_id) {
        for (auto& t : tokenize(src, file_id)) {
            if (t.kind != TokenKind::Comment) toks_.push_back(std::move(t));
        }
        Token eof;
        eof.kind = TokenKind::EndOfFile;
        const auto [line, col] = line_column(src, src.size());
        (void)col;
        eof.span = Span{file_id, src.size(), src.size(), line, line};
        toks_.push_back(std::move(eof));
    }

    SourceUnit parse_unit(std::shared_ptr<const std::string> source, bool recover) {
        SourceUnit unit;
        unit.path = path_;
        unit.source = std::move(source);
        const auto [last_line, col] = line_column(src_, src_.size());
        (void)col;
        unit.span = Span{file_id_, 0, src_.size(), 1, last_line};

        while (!at_end()) {
            const Token& t = cur();
            if (t.is_keyword("pragma")) {
                unit.pragmas.push_back(parse_pragma());
            } else if (t.is_keyword("import")) {
                unit.imports.push_back(parse_import());
            } else if (at_contract_start()) {
                const std::size_t save = pos_;
                try {
                    unit.contracts.push_back(parse_contract());
                } catch (const ParseError& e) {
                    if (!recover) throw;
                    unit.diagnostics.push_back(std::string(e.what()) + " (contract skipped)");
                    pos_ = save + 1;
                    skip_to_next_contract();
                }
            } else {
                skip_top_level(unit);
            }
        }
        return unit;
    }

    ExprPtr parse_standalone_expression() {
        auto e = parse_expression();
        if (!at_end()) fail({"end of input"});
        return e;
    }

    StmtPtr parse_standalone_statement() {
        auto s = parse_statement();
        if (!at_end()) fail({"end of input"});
        return s;
    }

private:
    // --- token cursor -----------------------------------------------------

    const Token& cur() const noexcept { return toks_[pos_]; }
    const Token& peek(std::size_t n = 1) const noexcept { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at_end() const noexcept { return cur().kind == TokenKind::EndOfFile; }

    const Token& advance() {
        const Token& t = toks_[pos_];
        if (!at_end()) ++pos_;
        return t;
    }

    bool accept_punct(std::string_view p) {
        if (!cur().is_punct(p)) return false;
        advance();
        return true;
    }
    bool accept_op(std::string_view p) {
        if (!cur().is_op(p)) return false;
        advance();
        return true;
    }
    bool accept_keyword(std::string_view k) {
        if (!cur().is_keyword(k)) return false;
        advance();
        return true;
    }

    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail({"'" + std::string(p) + "'"});
    }
    void expect_op(std::string_view p) {
        if (!accept_op(p)) fail({"'" + std::string(p) + "'"});
    }
    void expect_keyword(std::string_view k) {
        if (!accept_keyword(k)) fail({"'" + std::string(k) + "'"});
    }

    std::string expect_identifier() {
        if (cur().kind != TokenKind::Identifier) fail({"identifier"});
        return advance().text;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const auto [line, column] = line_column(src_, cur().span.start);
        throw ParseError(path_, line, column, std::move(expected), at_end() ? "end of input" : cur().text);
    }

    Span span_from(std::size_t first) const noexcept {
        const Span& a = toks_[first].span;
        const Span& b = toks_[pos_ > first ? pos_ - 1 : first].span;
        return Span{file_id_, a.start, b.end, a.start_line, b.end_line};
    }

    std::string text_of(const Span& s) const { return std::string(src_.substr(s.start, s.end - s.start)); }

    // --- top level --------------------------------------------------------

    bool at_contract_start() const noexcept {
        return cur().is_keyword("contract") || cur().is_keyword("interface") || cur().is_keyword("library") ||
               (cur().is_keyword("abstract") && peek().is_keyword("contract"));
    }

    void skip_to_next_contract() {
        while (!at_end() && !at_contract_start()) advance();
    }

    void skip_top_level(SourceUnit& unit) {
        const std::size_t first = pos_;
        const auto [line, col] = line_column(src_, cur().span.start);
        (void)col;
        int depth = 0;
        while (!at_end()) {
            const Token& t = advance();
            if (t.is_punct("{")) {
                ++depth;
            } else if (t.is_punct("}")) {
                if (--depth <= 0) break;
            } else if (t.is_punct(";") && depth == 0) {
                break;
            }
        }
        unit.diagnostics.push_back(path_ + ":" + std::to_string(line) + ": skipped unsupported top-level construct '" +
                                   toks_[first].text + "'");
    }

    Directive parse_pragma() {
        const std::size_t first = pos_;
        advance();
        while (!at_end() && !cur().is_punct(";")) advance();
        expect_punct(";");
        Directive d;
        d.span = span_from(first);
        d.text = text_of(d.span);
        return d;
    }

    ImportDirective parse_import() {
        const std::size_t first = pos_;
        advance();
        ImportDirective imp;
        while (!at_end() && !cur().is_punct(";")) {
            if (cur().kind == TokenKind::String && imp.path.empty()) {
                const auto& s = cur().text;
                imp.path = s.size() >= 2 ? s.substr(1, s.size() - 2) : s;
            }
            advance();
        }
        expect_punct(";");
        if (imp.path.empty()) fail({"import path"});
        imp.span = span_from(first);
        imp.text = text_of(imp.span);
        return imp;
    }

    std::string parse_path() {
        std::string name = expect_identifier();
        while (cur().is_punct(".") && peek().kind == TokenKind::Identifier) {
            advance();
            name += "." + advance().text;
        }
        return name;
    }

    std::vector<std::string> parse_argument_texts() {
        std::vector<std::string> out;
        expect_punct("(");
        if (accept_punct(")")) return out;
        while (true) {
            auto e = parse_expression();
            out.push_back(text_of(e->span));
            if (!accept_punct(",")) break;
        }
        expect_punct(")");
        return out;
    }

    ContractDefinition parse_contract() {
        const std::size_t first = pos_;
        ContractDefinition c;
        if (accept_keyword("abstract")) {
            expect_keyword("contract");
            c.kind = ContractKind::AbstractContract;
        } else if (accept_keyword("contract")) {
            c.kind = ContractKind::Contract;
        } else if (accept_keyword("interface")) {
            c.kind = ContractKind::Interface;
        } else {
            expect_keyword("library");
            c.kind = ContractKind::Library;
        }
        c.name = expect_identifier();
        if (accept_keyword("is")) {
            do {
                const std::size_t b0 = pos_;
                InheritanceSpecifier base;
                base.name = parse_path();
                if (cur().is_punct("(")) base.arguments = parse_argument_texts();
                base.span = span_from(b0);
                c.bases.push_back(std::move(base));
            } while (accept_punct(","));
        }
        expect_punct("{");
        while (!cur().is_punct("}")) {
            if (at_end()) fail({"'}'"});
            parse_member(c);
        }
        expect_punct("}");
        c.span = span_from(first);
        return c;
    }

    void parse_member(ContractDefinition& c) {
        const Token& t = cur();
        if (t.is_keyword("function") || t.is_keyword("constructor") || t.is_keyword("fallback") ||
            t.is_keyword("receive")) {
            c.functions.push_back(parse_function());
        } else if (t.is_keyword("modifier")) {
            c.modifiers.push_back(parse_modifier());
        } else if (t.is_keyword("event")) {
            c.events.push_back(parse_event());
        } else if (t.kind == TokenKind::Identifier && t.text == "error" && peek().kind == TokenKind::Identifier &&
                   peek(2).is_punct("(")) {
            c.errors.push_back(parse_error_definition());
        } else if (t.is_keyword("struct")) {
            c.structs.push_back(parse_struct());
        } else if (t.is_keyword("enum")) {
            c.enums.push_back(parse_enum());
        } else if (t.is_keyword("using")) {
            c.using_for.push_back(parse_using());
        } else if (t.is_keyword("type")) {
            // user-defined value type: `type Price is uint128;`
            while (!at_end() && !cur().is_punct(";")) advance();
            expect_punct(";");
        } else {
            c.state_variables.push_back(parse_state_variable());
        }
    }

    FunctionDefinition parse_function() {
        const std::size_t first = pos_;
        FunctionDefinition f;
        if (accept_keyword("constructor")) {
            f.kind = FunctionKind::Constructor;
        } else if (accept_keyword("fallback")) {
            f.kind = FunctionKind::Fallback;
        } else if (accept_keyword("receive")) {
            f.kind = FunctionKind::Receive;
        } else {
            expect_keyword("function");
            if (cur().kind == TokenKind::Identifier) {
                f.name = advance().text;
            } else if (cur().is_punct("(")) {
                f.kind = FunctionKind::Fallback;  // pre-0.6 unnamed fallback
            } else {
                fail({"identifier", "'('"});
            }
        }
        f.parameters = parse_parameter_list();
        while (true) {
            const Token& t = cur();
            if (t.is_keyword("public")) {
                f.visibility = Visibility::Public;
            } else if (t.is_keyword("external")) {
                f.visibility = Visibility::External;
            } else if (t.is_keyword("internal")) {
                f.visibility = Visibility::Internal;
            } else if (t.is_keyword("private")) {
                f.visibility = Visibility::Private;
            } else if (t.is_keyword("pure")) {
                f.mutability = Mutability::Pure;
            } else if (t.is_keyword("view") || t.is_keyword("constant")) {
                f.mutability = Mutability::View;
            } else if (t.is_keyword("payable")) {
                f.mutability = Mutability::Payable;
            } else if (t.is_keyword("virtual")) {
                f.is_virtual = true;
            } else if (t.is_keyword("override")) {
                advance();
                f.is_override = true;
                if (cur().is_punct("(")) skip_balanced("(", ")");
                continue;
            } else if (t.is_keyword("returns")) {
                advance();
                f.returns = parse_parameter_list();
                continue;
            } else if (t.kind == TokenKind::Identifier) {
                const std::size_t m0 = pos_;
                ModifierInvocation m;
                m.name = parse_path();
                if (cur().is_punct("(")) {
                    m.has_parens = true;
                    m.arguments = parse_argument_texts();
                }
                m.span = span_from(m0);
                f.modifiers.push_back(std::move(m));
                continue;
            } else {
                break;
            }
            advance();
        }
        if (!accept_punct(";")) {
            if (!cur().is_punct("{")) fail({"'{'", "';'"});
            f.body = parse_block();
        }
        f.span = span_from(first);
        return f;
    }

    ModifierDefinition parse_modifier() {
        const std::size_t first = pos_;
        expect_keyword("modifier");
        ModifierDefinition m;
        m.name = expect_identifier();
        if (cur().is_punct("(")) m.parameters = parse_parameter_list();
        while (true) {
            if (accept_keyword("virtual")) {
                m.is_virtual = true;
            } else if (accept_keyword("override")) {
                if (cur().is_punct("(")) skip_balanced("(", ")");
            } else {
                break;
            }
        }
        if (!accept_punct(";")) m.body = parse_block();
        m.span = span_from(first);
        return m;
    }

    EventDefinition parse_event() {
        const std::size_t first = pos_;
        expect_keyword("event");
        EventDefinition e;
        e.name = expect_identifier();
        e.parameters = parse_parameter_list();
        if (accept_keyword("anonymous")) e.anonymous = true;
        expect_punct(";");
        e.span = span_from(first);
        return e;
    }

    ErrorDefinition parse_error_definition() {
        const std::size_t first = pos_;
        advance();
        ErrorDefinition e;
        e.name = expect_identifier();
        e.parameters = parse_parameter_list();
        expect_punct(";");
        e.span = span_from(first);
        return e;
    }

    StructDefinition parse_struct() {
        const std::size_t first = pos_;
        expect_keyword("struct");
        StructDefinition s;
        s.name = expect_identifier();
        expect_punct("{");
        while (!accept_punct("}")) {
            if (at_end()) fail({"'}'"});
            const std::size_t f0 = pos_;
            Parameter p;
            p.type = parse_type_name();
            p.name = expect_identifier();
            expect_punct(";");
            p.span = span_from(f0);
            s.fields.push_back(std::move(p));
        }
        s.span = span_from(first);
        return s;
    }

    EnumDefinition parse_enum() {
        const std::size_t first = pos_;
        expect_keyword("enum");
        EnumDefinition e;
        e.name = expect_identifier();
        expect_punct("{");
        if (!cur().is_punct("}")) {
            do {
                if (cur().is_punct("}")) break;
                e.values.push_back(expect_identifier());
            } while (accept_punct(","));
        }
        expect_punct("}");
        e.span = span_from(first);
        return e;
    }

    UsingFor parse_using() {
        const std::size_t first = pos_;
        expect_keyword("using");
        UsingFor u;
        if (cur().is_punct("{")) {
            const std::size_t b0 = pos_;
            skip_balanced("{", "}");
            u.library = text_of(span_from(b0));
        } else {
            u.library = parse_path();
        }
        if (!cur().is_keyword("for")) fail({"'for'"});
        advance();
        if (!accept_op("*")) u.type = parse_type_name();
        if (cur().kind == TokenKind::Identifier && cur().text == "global") advance();
        expect_punct(";");
        u.span = span_from(first);
        return u;
    }

    StateVariable parse_state_variable() {
        const std::size_t first = pos_;
        StateVariable v;
        v.type = parse_type_name();
        while (true) {
            const Token& t = cur();
            if (t.is_keyword("public")) {
                v.visibility = Visibility::Public;
            } else if (t.is_keyword("private")) {
                v.visibility = Visibility::Private;
            } else if (t.is_keyword("internal")) {
                v.visibility = Visibility::Internal;
            } else if (t.is_keyword("external")) {
                v.visibility = Visibility::External;
            } else if (t.is_keyword("constant")) {
                v.constant = true;
            } else if (t.is_keyword("immutable")) {
                v.immutable = true;
            } else if (t.is_keyword("override")) {
                advance();
                if (cur().is_punct("(")) skip_balanced("(", ")");
                continue;
            } else if (t.kind == TokenKind::Identifier && t.text == "transient" &&
                       peek().kind == TokenKind::Identifier) {
                // storage location qualifier, nothing to record
            } else {
                break;
            }
            advance();
        }
        v.name = expect_identifier();
        if (accept_op("=")) v.initializer = parse_expression();
        expect_punct(";");
        v.span = span_from(first);
        return v;
    }

    void skip_balanced(std::string_view open, std::string_view close) {
        expect_punct(open);
        int depth = 1;
        while (depth > 0) {
            if (at_end()) fail({"'" + std::string(close) + "'"});
            const Token& t = advance();
            if (t.is_punct(open)) ++depth;
            if (t.is_punct(close)) --depth;
        }
    }

    std::vector<Parameter> parse_parameter_list() {
        std::vector<Parameter> out;
        expect_punct("(");
        if (accept_punct(")")) return out;
        while (true) {
            const std::size_t p0 = pos_;
            Parameter p;
            p.type = parse_type_name();
            while (true) {
                if (cur().is_keyword("memory") || cur().is_keyword("storage") || cur().is_keyword("calldata")) {
                    p.location = advance().text;
                } else if (accept_keyword("indexed")) {
                    p.indexed = true;
                } else {
                    break;
                }
            }
            if (cur().kind == TokenKind::Identifier) p.name = advance().text;
            p.span = span_from(p0);
            out.push_back(std::move(p));
            if (!accept_punct(",")) break;
        }
        expect_punct(")");
        return out;
    }

    TypeNamePtr parse_type_name() {
        const std::size_t first = pos_;
        auto t = std::make_shared<TypeName>();
        if (accept_keyword("mapping")) {
            t->kind = TypeName::Kind::Mapping;
            expect_punct("(");
            t->key = parse_type_name();
            if (cur().kind == TokenKind::Identifier) advance();  // named mapping key
            expect_op("=>");
            t->value = parse_type_name();
            if (cur().kind == TokenKind::Identifier) advance();
            expect_punct(")");
        } else if (accept_keyword("function")) {
            t->kind = TypeName::Kind::Function;
            t->name = "function";
            parse_parameter_list();
            while (cur().is_keyword("internal") || cur().is_keyword("external") || cur().is_keyword("pure") ||
                   cur().is_keyword("view") || cur().is_keyword("payable")) {
                advance();
            }
            if (accept_keyword("returns")) parse_parameter_list();
        } else if (cur().kind == TokenKind::Identifier) {
            const std::string name = parse_path();
            if (is_elementary(name)) {
                t->kind = TypeName::Kind::Elementary;
                t->name = normalize_elementary(name);
                if (t->name == "address" && accept_keyword("payable")) t->payable = true;
            } else {
                t->kind = TypeName::Kind::UserDefined;
                t->name = name;
            }
        } else {
            fail({"type name"});
        }
        t->span = span_from(first);
        TypeNamePtr result = std::move(t);
        while (cur().is_punct("[")) {
            advance();
            auto arr = std::make_shared<TypeName>();
            arr->kind = TypeName::Kind::Array;
            arr->base = result;
            if (!cur().is_punct("]")) {
                auto len = parse_expression();
                arr->length = text_of(len->span);
            }
            expect_punct("]");
            arr->span = span_from(first);
            result = std::move(arr);
        }
        return result;
    }

    // --- statements -------------------------------------------------------

    StmtPtr make_stmt(StmtKind kind) {
        auto s = std::make_unique<Stmt>();
        s->kind = kind;
        return s;
    }

    StmtPtr parse_block() {
        const std::size_t first = pos_;
        expect_punct("{");
        auto block = make_stmt(StmtKind::Block);
        while (!cur().is_punct("}")) {
            if (at_end()) fail({"'}'"});
            block->body.push_back(parse_statement());
        }
        expect_punct("}");
        block->span = span_from(first);
        return block;
    }

    StmtPtr parse_statement() {
        const std::size_t first = pos_;
        const Token& t = cur();

        if (t.is_punct("{")) return parse_block();

        if (t.is_keyword("unchecked")) {
            advance();
            auto inner = parse_block();
            auto s = make_stmt(StmtKind::Unchecked);
            s->body = std::move(inner->body);
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("if")) {
            advance();
            auto s = make_stmt(StmtKind::If);
            expect_punct("(");
            s->expr = parse_expression();
            expect_punct(")");
            s->body.push_back(parse_statement());
            if (accept_keyword("else")) s->body.push_back(parse_statement());
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("for")) {
            advance();
            auto s = make_stmt(StmtKind::For);
            expect_punct("(");
            if (!accept_punct(";")) s->init = parse_simple_statement();
            if (!accept_punct(";")) {
                s->expr = parse_expression();
                expect_punct(";");
            }
            if (!cur().is_punct(")")) s->post = parse_expression();
            expect_punct(")");
            s->body.push_back(parse_statement());
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("while")) {
            advance();
            auto s = make_stmt(StmtKind::While);
            expect_punct("(");
            s->expr = parse_expression();
            expect_punct(")");
            s->body.push_back(parse_statement());
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("do")) {
            advance();
            auto s = make_stmt(StmtKind::DoWhile);
            s->body.push_back(parse_statement());
            expect_keyword("while");
            expect_punct("(");
            s->expr = parse_expression();
            expect_punct(")");
            expect_punct(";");
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("return")) {
            advance();
            auto s = make_stmt(StmtKind::Return);
            if (!cur().is_punct(";")) s->expr = parse_expression();
            expect_punct(";");
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("emit")) {
            advance();
            auto s = make_stmt(StmtKind::Emit);
            s->expr = parse_expression();
            expect_punct(";");
            s->span = span_from(first);
            return s;
        }
        if (t.kind == TokenKind::Identifier && t.text == "revert" && peek().kind == TokenKind::Identifier) {
            advance();
            auto s = make_stmt(StmtKind::Revert);
            s->expr = parse_expression();
            expect_punct(";");
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("break") || t.is_keyword("continue")) {
            auto s = make_stmt(t.is_keyword("break") ? StmtKind::Break : StmtKind::Continue);
            advance();
            expect_punct(";");
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("assembly")) {
            advance();
            if (cur().kind == TokenKind::String) advance();
            if (cur().is_punct("(")) skip_balanced("(", ")");
            const std::size_t b0 = pos_;
            skip_balanced("{", "}");
            auto s = make_stmt(StmtKind::Assembly);
            s->text = text_of(span_from(b0));
            s->span = span_from(first);
            return s;
        }
        if (t.is_keyword("try")) return parse_try();
        if (t.kind == TokenKind::Identifier && t.text == "_" && peek().is_punct(";")) {
            advance();
            advance();
            auto s = make_stmt(StmtKind::Placeholder);
            s->span = span_from(first);
            return s;
        }
        return parse_simple_statement();
    }

    StmtPtr parse_try() {
        const std::size_t first = pos_;
        expect_keyword("try");
        auto s = make_stmt(StmtKind::Try);
        s->expr = parse_expression();
        TryClause success;
        if (accept_keyword("returns")) success.params = parse_parameter_list();
        s->body.push_back(parse_block());
        s->clauses.push_back(std::move(success));
        if (!cur().is_keyword("catch")) fail({"'catch'"});
        while (accept_keyword("catch")) {
            TryClause clause;
            if (cur().kind == TokenKind::Identifier) clause.error_name = advance().text;
            if (cur().is_punct("(")) clause.params = parse_parameter_list();
            s->body.push_back(parse_block());
            s->clauses.push_back(std::move(clause));
        }
        s->span = span_from(first);
        return s;
    }

    // Variable declaration or expression statement, terminated by ';'.
    StmtPtr parse_simple_statement() {
        const std::size_t first = pos_;
        if (auto decl = try_variable_declaration()) return decl;
        auto s = make_stmt(StmtKind::Expression);
        s->expr = parse_expression();
        expect_punct(";");
        s->span = span_from(first);
        return s;
    }

    Parameter parse_local_declaration() {
        const std::size_t first = pos_;
        Parameter p;
        p.type = parse_type_name();
        if (cur().is_keyword("memory") || cur().is_keyword("storage") || cur().is_keyword("calldata"))
            p.location = advance().text;
        p.name = expect_identifier();
        p.span = span_from(first);
        return p;
    }

    // Speculative: restores the cursor and returns null when the tokens do
    // not form a declaration.
    StmtPtr try_variable_declaration() {
        const std::size_t first = pos_;
        auto s = make_stmt(StmtKind::VariableDecl);
        try {
            if (accept_punct("(")) {
                bool any = false;
                while (true) {
                    if (cur().is_punct(",") || cur().is_punct(")")) {
                        s->decls.emplace_back(std::nullopt);
                    } else {
                        s->decls.emplace_back(parse_local_declaration());
                        any = true;
                    }
                    if (accept_punct(",")) continue;
                    expect_punct(")");
                    break;
                }
                if (!any || !cur().is_op("=")) {
                    pos_ = first;
                    return nullptr;
                }
            } else {
                Parameter p;
                p.type = parse_type_name();
                if (cur().is_keyword("memory") || cur().is_keyword("storage") || cur().is_keyword("calldata"))
                    p.location = advance().text;
                if (cur().kind != TokenKind::Identifier) {
                    pos_ = first;
                    return nullptr;
                }
                p.name = advance().text;
                if (!cur().is_op("=") && !cur().is_punct(";")) {
                    pos_ = first;
                    return nullptr;
                }
                p.span = span_from(first);
                s->decls.emplace_back(std::move(p));
            }
        } catch (const ParseError&) {
            pos_ = first;
            return nullptr;
        }
        if (accept_op("=")) s->expr = parse_expression();
        expect_punct(";");
        s->span = span_from(first);
        return s;
    }

    // --- expressions ------------------------------------------------------

    ExprPtr make_expr(ExprKind kind, std::size_t first) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->span = span_from(first);
        return e;
    }

    ExprPtr parse_expression() { return parse_assignment(); }

    ExprPtr parse_assignment() {
        const std::size_t first = pos_;
        auto lhs = parse_conditional();
        if (cur().kind == TokenKind::Operator && is_assign_op(cur().text)) {
            std::string op = advance().text;
            auto rhs = parse_assignment();
            auto e = make_expr(ExprKind::Assignment, first);
            e->text = std::move(op);
            e->children.push_back(std::move(lhs));
            e->children.push_back(std::move(rhs));
            return e;
        }
        return lhs;
    }

    ExprPtr parse_conditional() {
        const std::size_t first = pos_;
        auto cond = parse_binary(1);
        if (!accept_op("?")) return cond;
        auto then_expr = parse_assignment();
        expect_op(":");
        auto else_expr = parse_assignment();
        auto e = make_expr(ExprKind::Conditional, first);
        e->children.push_back(std::move(cond));
        e->children.push_back(std::move(then_expr));
        e->children.push_back(std::move(else_expr));
        return e;
    }

    ExprPtr parse_binary(int min_prec) {
        const std::size_t first = pos_;
        auto lhs = parse_unary();
        while (cur().kind == TokenKind::Operator) {
            const int prec = binary_precedence(cur().text);
            if (prec == 0 || prec < min_prec) break;
            std::string op = advance().text;
            auto rhs = parse_binary(op == "**" ? prec : prec + 1);
            auto e = make_expr(ExprKind::Binary, first);
            e->text = std::move(op);
            e->children.push_back(std::move(lhs));
            e->children.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        const std::size_t first = pos_;
        const Token& t = cur();
        const bool prefix_op = t.kind == TokenKind::Operator &&
                               (t.text == "!" || t.text == "~" || t.text == "-" || t.text == "++" || t.text == "--");
        if (prefix_op || (t.kind == TokenKind::Identifier && t.text == "delete") || t.is_keyword("delete")) {
            std::string op = advance().text;
            auto operand = parse_unary();
            auto e = make_expr(ExprKind::Unary, first);
            e->text = std::move(op);
            e->prefix = true;
            e->children.push_back(std::move(operand));
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        const std::size_t first = pos_;
        auto e = parse_primary();
        while (true) {
            if (accept_punct(".")) {
                if (cur().kind != TokenKind::Identifier && cur().kind != TokenKind::Keyword) fail({"member name"});
                auto m = make_expr(ExprKind::MemberAccess, first);
                m->text = advance().text;
                m->span = span_from(first);
                m->children.push_back(std::move(e));
                e = std::move(m);
            } else if (accept_punct("[")) {
                ExprPtr start;
                if (!cur().is_punct("]") && !cur().is_op(":")) start = parse_expression();
                if (accept_op(":")) {
                    ExprPtr end;
                    if (!cur().is_punct("]")) end = parse_expression();
                    expect_punct("]");
                    auto r = make_expr(ExprKind::IndexRange, first);
                    r->children.push_back(std::move(e));
                    r->children.push_back(std::move(start));
                    r->children.push_back(std::move(end));
                    e = std::move(r);
                } else {
                    expect_punct("]");
                    auto ix = make_expr(ExprKind::IndexAccess, first);
                    ix->children.push_back(std::move(e));
                    ix->children.push_back(std::move(start));
                    e = std::move(ix);
                }
            } else if (cur().is_punct("(")) {
                advance();
                std::vector<ExprPtr> args;
                std::vector<std::string> names;
                if (accept_punct("{")) {
                    while (!accept_punct("}")) {
                        names.push_back(expect_identifier());
                        expect_op(":");
                        args.push_back(parse_expression());
                        if (!accept_punct(",")) {
                            expect_punct("}");
                            break;
                        }
                    }
                } else if (!cur().is_punct(")")) {
                    while (true) {
                        args.push_back(parse_expression());
                        if (!accept_punct(",")) break;
                    }
                }
                expect_punct(")");
                auto call = make_expr(ExprKind::Call, first);
                call->children.push_back(std::move(e));
                for (auto& a : args) call->children.push_back(std::move(a));
                call->names = std::move(names);
                e = std::move(call);
            } else if (cur().is_punct("{") && peek().kind == TokenKind::Identifier && peek(2).is_op(":")) {
                advance();
                auto opts = std::make_unique<Expr>();
                opts->kind = ExprKind::CallOptions;
                opts->children.push_back(std::move(e));
                while (!accept_punct("}")) {
                    opts->names.push_back(expect_identifier());
                    expect_op(":");
                    opts->children.push_back(parse_expression());
                    if (!accept_punct(",")) {
                        expect_punct("}");
                        break;
                    }
                }
                opts->span = span_from(first);
                e = std::move(opts);
            } else if (cur().is_op("++") || cur().is_op("--")) {
                auto u = std::make_unique<Expr>();
                u->kind = ExprKind::Unary;
                u->text = advance().text;
                u->prefix = false;
                u->children.push_back(std::move(e));
                u->span = span_from(first);
                e = std::move(u);
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr parse_primary() {
        const std::size_t first = pos_;
        const Token& t = cur();
        if (t.kind == TokenKind::Identifier || t.is_keyword("payable") || t.is_keyword("type")) {
            advance();
            auto e = make_expr(ExprKind::Identifier, first);
            e->text = t.text;
            return e;
        }
        if (t.kind == TokenKind::Number) {
            advance();
            std::string unit;
            if (cur().kind == TokenKind::Identifier && is_unit(cur().text)) unit = advance().text;
            auto e = make_expr(ExprKind::Literal, first);
            e->literal = LiteralKind::Number;
            e->text = text_of(e->span);
            e->unit = std::move(unit);
            return e;
        }
        if (t.kind == TokenKind::String) {
            const bool hex = t.text.rfind("hex", 0) == 0;
            advance();
            while (cur().kind == TokenKind::String) advance();
            auto e = make_expr(ExprKind::Literal, first);
            e->literal = hex ? LiteralKind::HexString : LiteralKind::String;
            e->text = text_of(e->span);
            return e;
        }
        if (t.is_keyword("true") || t.is_keyword("false")) {
            advance();
            auto e = make_expr(ExprKind::Literal, first);
            e->literal = LiteralKind::Bool;
            e->text = t.text;
            return e;
        }
        if (t.is_punct("(")) {
            advance();
            std::vector<ExprPtr> parts;
            while (true) {
                if (cur().is_punct(",") || cur().is_punct(")")) {
                    parts.emplace_back(nullptr);
                } else {
                    parts.push_back(parse_expression());
                }
                if (accept_punct(",")) continue;
                expect_punct(")");
                break;
            }
            auto e = make_expr(ExprKind::Tuple, first);
            if (!(parts.size() == 1 && !parts[0])) e->children = std::move(parts);
            return e;
        }
        if (t.is_punct("[")) {
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::ArrayLiteral;
            if (!cur().is_punct("]")) {
                while (true) {
                    e->children.push_back(parse_expression());
                    if (!accept_punct(",")) break;
                }
            }
            expect_punct("]");
            e->span = span_from(first);
            return e;
        }
        if (t.is_keyword("new")) {
            advance();
            auto type = parse_type_name();
            auto e = make_expr(ExprKind::New, first);
            e->text = type->canonical();
            e->type = std::move(type);
            return e;
        }
        fail({"expression"});
    }

    std::string_view src_;
    std::string path_;
    std::uint32_t file_id_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string format_parse_error(const std::string& path, std::size_t line, std::size_t column,
                               const std::vector<std::string>& expected, const std::string& found) {
    std::string msg = path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += " or ";
        msg += expected[i];
    }
    msg += ", found '" + found + "'";
    return msg;
}

}  // namespace

ParseError::ParseError(std::string path, std::size_t line, std::size_t column, std::vector<std::string> expected,
                       std::string found)
    : Error(format_parse_error(path, line, column, expected, found)),
      path_(std::move(path)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

SourceUnit parse_source_unit(std::string source, std::string path, ParseOptions options) {
    auto shared = std::make_shared<const std::string>(std::move(source));
    Parser parser(*shared, std::move(path), options.file_id);
    return parser.parse_unit(shared, options.recover);
}

ExprPtr parse_expression(std::string_view source) { return Parser(source, "<expr>", 0).parse_standalone_expression(); }

StmtPtr parse_statement(std::string_view source) { return Parser(source, "<stmt>", 0).parse_standalone_statement(); }

std::string slice_source(std::string_view source, const Span& span) {
    if (span.start > span.end || span.end > source.size()) {
        throw OutOfRange("span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                         ") exceeds source of " + std::to_string(source.size()) + " bytes");
    }
    return std::string(source.substr(span.start, span.end - span.start));
}

}  // namespace scvd
