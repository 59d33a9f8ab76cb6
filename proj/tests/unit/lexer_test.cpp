#include "scvd/errors.hpp"
#include "scvd/lexer.hpp"

#include <doctest.h>

#include <random>

using namespace scvd;

namespace {

std::vector<Token> significant(const std::vector<Token>& toks) {
    std::vector<Token> out;
    for (const auto& t : toks) {
        if (t.kind != TokenKind::Comment) out.push_back(t);
    }
    return out;
}

// Only whitespace may sit between consecutive tokens.
bool reconstructs(std::string_view src, const std::vector<Token>& toks) {
    std::size_t pos = 0;
    for (const auto& t : toks) {
        if (t.span.start < pos) return false;
        for (std::size_t i = pos; i < t.span.start; ++i) {
            if (!std::isspace(static_cast<unsigned char>(src[i]))) return false;
        }
        if (src.substr(t.span.start, t.span.size()) != t.text) return false;
        pos = t.span.end;
    }
    for (std::size_t i = pos; i < src.size(); ++i) {
        if (!std::isspace(static_cast<unsigned char>(src[i]))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("tokenize a minimal contract") {
    auto toks = significant(tokenize("contract A {}"));
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].is_keyword("contract"));
    CHECK(toks[1].kind == TokenKind::Identifier);
    CHECK(toks[1].text == "A");
    CHECK(toks[2].is_punct("{"));
    CHECK(toks[3].is_punct("}"));
}

TEST_CASE("empty input yields no tokens") { CHECK(tokenize("").empty()); }

TEST_CASE("unterminated string reports line 1") {
    try {
        tokenize("\"abc");
        FAIL("expected LexError");
    } catch (const LexError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() == 1);
    }
}

TEST_CASE("unterminated block comment reports its start") {
    try {
        tokenize("uint x;\n  /* never closed");
        FAIL("expected LexError");
    } catch (const LexError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("comments are emitted as tokens with line spans") {
    auto toks = tokenize("// one\n/* two\nthree */ x");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].kind == TokenKind::Comment);
    CHECK(toks[0].text == "// one");
    CHECK(toks[1].kind == TokenKind::Comment);
    CHECK(toks[1].span.start_line == 2);
    CHECK(toks[1].span.end_line == 3);
    CHECK(toks[2].span.start_line == 3);
}

TEST_CASE("numbers, hex strings and multi-char operators") {
    auto toks = tokenize("x >>>= 0xFF_FF; y = 1_000e18 ** 2; s = hex\"00ff\"; z = 1.5e-3; a => b;");
    std::vector<std::string> texts;
    for (const auto& t : toks) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"x",  ">>>=", "0xFF_FF", ";", "y",     "=", "1_000e18", "**", "2",
                                            ";",  "s",    "=",       "hex\"00ff\"", ";", "z", "=", "1.5e-3", ";",
                                            "a",  "=>",   "b",       ";"});
    CHECK(toks[2].kind == TokenKind::Number);
    CHECK(toks[12].kind == TokenKind::String);
}

TEST_CASE("escaped quotes stay inside the string") {
    auto toks = tokenize(R"(s = "a\"b"; t = 'it\'s';)");
    CHECK(toks[2].text == R"("a\"b")");
    CHECK(toks[6].text == R"('it\'s')");
}

TEST_CASE("property: random token soup reconstructs byte-for-byte") {
    const std::vector<std::string> lexemes = {
        "contract", "function", "x",   "_y1",  "$z",  "42",   "0xdead", "1_000", "\"str\"", "'c'",
        "(",        ")",        "{",   "}",    ";",   ",",    ".",      "+=",    ">>>",     "=>",
        "!",        "&&",       "**",  "/*c*/", "// line\n", "hex\"ab\"", "unicode\"é\"", "1e5", "?", ":",
    };
    const std::vector<std::string> gaps = {"", " ", "\n", "\t", "  \n  "};
    std::mt19937 rng(1234);
    for (int round = 0; round < 300; ++round) {
        std::string src;
        const int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            src += lexemes[rng() % lexemes.size()];
            // always separate so adjacent lexemes cannot fuse into one token
            src += gaps[1 + rng() % (gaps.size() - 1)];
        }
        auto toks = tokenize(src);
        CHECK(reconstructs(src, toks));
        const auto sig = significant(toks);
        for (std::size_t i = 1; i < sig.size(); ++i) CHECK(sig[i - 1].span.end <= sig[i].span.start);
    }
}

TEST_CASE("line_column is 1-based") {
    CHECK(line_column("ab\ncd", 0) == std::pair<std::size_t, std::size_t>{1, 1});
    CHECK(line_column("ab\ncd", 4) == std::pair<std::size_t, std::size_t>{2, 2});
}
