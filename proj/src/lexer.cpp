#include "scvd/lexer.hpp"

#include "scvd/errors.hpp"

#include <algorithm>
#include <iterator>

namespace scvd {

namespace {

constexpr std::string_view kKeywords[] = {
    "abstract", "anonymous", "as",        "assembly",  "break",     "catch",    "calldata",
    "constant",                   "constructor", "continue", "contract", "delete",    "do",       "else",
    "emit",                       "enum",      "event",     "external",  "fallback",  "false",    "for",
    "function",                   "if",        "immutable", "import",    "indexed",   "interface", "internal",
    "is",                         "library",   "mapping",   "memory",    "modifier",  "new",      "override",
    "payable",                    "pragma",    "private",   "public",    "pure",      "receive",  "return",
    "returns",                    "storage",   "struct",    "true",      "try",       "type",     "unchecked",
    "using",                      "view",      "virtual",   "while",
};

// Longest first so a linear scan finds the maximal munch.
constexpr std::string_view kOperators[] = {
    ">>>=", ">>=", "<<=", ">>>", "**", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "|=", "&=", "^=", "<<", ">>", "=>", "->", ":=", "+", "-", "*", "/", "%", "=", "<", ">", "!",
    "~", "&", "|", "^", "?", ":",
};

constexpr std::string_view kPunctuation = "()[]{};,.";

bool is_ident_start(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

bool is_hex_digit(char c) noexcept {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool is_ident_char(char c) noexcept { return is_ident_start(c) || is_digit(c); }

bool is_space(char c) noexcept { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class Lexer {
public:
    Lexer(std::string_view src, std::uint32_t file_id) : src_(src), file_id_(file_id) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_whitespace();
            if (pos_ >= src_.size()) break;
            out.push_back(next());
        }
        return out;
    }

private:
    void skip_whitespace() {
        while (pos_ < src_.size() && is_space(src_[pos_])) {
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    char peek(std::size_t ahead = 0) const noexcept {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    [[noreturn]] void fail(const std::string& message, std::size_t offset) const {
        auto [line, column] = line_column(src_, offset);
        throw LexError(message, line, column);
    }

    Token make(TokenKind kind, std::size_t start, std::size_t start_line) const {
        Token t;
        t.kind = kind;
        t.text = std::string(src_.substr(start, pos_ - start));
        t.span = Span{file_id_, start, pos_, start_line, line_};
        return t;
    }

    Token next() {
        const std::size_t start = pos_;
        const std::size_t start_line = line_;
        const char c = peek();

        if (c == '/' && peek(1) == '/') {
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            return make(TokenKind::Comment, start, start_line);
        }
        if (c == '/' && peek(1) == '*') {
            pos_ += 2;
            while (true) {
                if (pos_ + 1 >= src_.size()) fail("unterminated block comment", start);
                if (src_[pos_] == '*' && src_[pos_ + 1] == '/') {
                    pos_ += 2;
                    break;
                }
                if (src_[pos_] == '\n') ++line_;
                ++pos_;
            }
            return make(TokenKind::Comment, start, start_line);
        }
        if (c == '"' || c == '\'') {
            lex_string(start);
            return make(TokenKind::String, start, start_line);
        }
        if (is_ident_start(c)) {
            while (is_ident_char(peek())) ++pos_;
            const auto word = src_.substr(start, pos_ - start);
            // hex"..." and unicode"..." are single literal tokens.
            if ((word == "hex" || word == "unicode") && (peek() == '"' || peek() == '\'')) {
                lex_string(start);
                return make(TokenKind::String, start, start_line);
            }
            return make(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, start, start_line);
        }
        if (is_digit(c)) {
            lex_number();
            return make(TokenKind::Number, start, start_line);
        }
        if (kPunctuation.find(c) != std::string_view::npos) {
            ++pos_;
            return make(TokenKind::Punctuation, start, start_line);
        }
        for (auto op : kOperators) {
            if (src_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                return make(TokenKind::Operator, start, start_line);
            }
        }
        fail(std::string("unexpected character '") + (static_cast<unsigned char>(c) < 0x80 ? std::string(1, c)
                                                                                          : std::string("\\x80+")) +
                 "'",
             start);
    }

    void lex_string(std::size_t start) {
        const char quote = peek();
        ++pos_;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') fail("unterminated string literal", start);
            const char c = src_[pos_];
            if (c == '\\') {
                pos_ += 2;
                continue;
            }
            ++pos_;
            if (c == quote) break;
        }
    }

    void lex_number() {
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            pos_ += 2;
            while (is_hex_digit(peek()) || peek() == '_') ++pos_;
            return;
        }
        while (is_digit(peek()) || peek() == '_') ++pos_;
        if (peek() == '.' && is_digit(peek(1))) {
            ++pos_;
            while (is_digit(peek()) || peek() == '_') ++pos_;
        }
        if ((peek() == 'e' || peek() == 'E') && (is_digit(peek(1)) || (peek(1) == '-' && is_digit(peek(2))))) {
            pos_ += peek(1) == '-' ? 2 : 1;
            while (is_digit(peek()) || peek() == '_') ++pos_;
        }
    }

    std::string_view src_;
    std::uint32_t file_id_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind kind) noexcept {
    switch (kind) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::Number: return "number-literal";
        case TokenKind::String: return "string-literal";
        case TokenKind::Punctuation: return "punctuation";
        case TokenKind::Operator: return "operator";
        case TokenKind::Comment: return "comment";
        case TokenKind::EndOfFile: return "end-of-file";
    }
    return "unknown";
}

bool is_keyword(std::string_view word) noexcept {
    return std::find(std::begin(kKeywords), std::end(kKeywords), word) != std::end(kKeywords);
}

std::vector<Token> tokenize(std::string_view source, std::uint32_t file_id) {
    return Lexer(source, file_id).run();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view source, std::size_t offset) noexcept {
    offset = std::min(offset, source.size());
    std::size_t line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < offset; ++i) {
        if (source[i] == '\n') {
            ++line;
            line_start = i + 1;
        }
    }
    return {line, offset - line_start + 1};
}

}  // namespace scvd
