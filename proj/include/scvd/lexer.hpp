#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scvd {

/// Byte range inside one source file. `end` is exclusive; lines are 1-based.
struct Span {
    std::uint32_t file_id = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t start_line = 1;
    std::size_t end_line = 1;

    std::size_t size() const noexcept { return end - start; }
    bool contains(const Span& other) const noexcept { return start <= other.start && other.end <= end; }
    friend bool operator==(const Span&, const Span&) = default;
};

enum class TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    Punctuation,
    Operator,
    Comment,
    EndOfFile,
};

std::string_view to_string(TokenKind kind) noexcept;

struct Token {
    TokenKind kind = TokenKind::EndOfFile;
    std::string text;
    Span span;

    bool is(TokenKind k, std::string_view t) const noexcept { return kind == k && text == t; }
    bool is_punct(std::string_view t) const noexcept { return kind == TokenKind::Punctuation && text == t; }
    bool is_op(std::string_view t) const noexcept { return kind == TokenKind::Operator && text == t; }
    bool is_keyword(std::string_view t) const noexcept { return kind == TokenKind::Keyword && text == t; }
};

bool is_keyword(std::string_view word) noexcept;

/// Splits `source` into tokens, comments included. Whitespace is the only
/// thing skipped, so token texts plus the gaps rebuild the input exactly.
/// Throws LexError on unterminated strings or block comments and on bytes
/// that cannot start a token.
std::vector<Token> tokenize(std::string_view source, std::uint32_t file_id = 0);

/// Line/column (both 1-based) of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view source, std::size_t offset) noexcept;

}  // namespace scvd
