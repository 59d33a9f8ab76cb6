#pragma once

// Checks shared by the unit and acceptance suites: lossless lexing and
// span round-trips over parsed files.

#include "scvd/ast.hpp"
#include "scvd/lexer.hpp"
#include "scvd/parser.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace scvd::testing {

/// Returns an empty string when the token stream plus whitespace gaps
/// rebuilds `src`, otherwise a description of the first mismatch.
inline std::string check_lossless(std::string_view src) {
    const auto toks = tokenize(src);
    std::size_t pos = 0;
    for (const auto& t : toks) {
        if (t.span.start < pos) return "overlapping token at " + std::to_string(t.span.start);
        for (std::size_t i = pos; i < t.span.start; ++i) {
            if (!std::isspace(static_cast<unsigned char>(src[i]))) return "non-space gap at " + std::to_string(i);
        }
        if (src.substr(t.span.start, t.span.size()) != t.text) return "text mismatch at " + std::to_string(pos);
        pos = t.span.end;
    }
    for (std::size_t i = pos; i < src.size(); ++i) {
        if (!std::isspace(static_cast<unsigned char>(src[i]))) return "trailing bytes at " + std::to_string(i);
    }
    return {};
}

struct RoundTripStats {
    std::size_t statements = 0;
    std::size_t expressions = 0;
    std::vector<std::string> failures;
};

inline void round_trip_stmt(const ast::SourceUnit& unit, const ast::Stmt& root, RoundTripStats& stats) {
    ast::for_each_stmt(root, [&](const ast::Stmt& s) {
        ++stats.statements;
        const auto text = unit.slice(s.span);
        try {
            auto again = parse_statement(text);
            if (!ast::structurally_equal(s, *again)) stats.failures.push_back("statement differs: " + text);
        } catch (const std::exception& e) {
            stats.failures.push_back("statement reparse failed: " + text + " (" + e.what() + ")");
        }
    });
    ast::for_each_expr(root, [&](const ast::Expr& e) {
        ++stats.expressions;
        const auto text = unit.slice(e.span);
        try {
            auto again = parse_expression(text);
            if (!ast::structurally_equal(e, *again)) stats.failures.push_back("expression differs: " + text);
        } catch (const std::exception& ex) {
            stats.failures.push_back("expression reparse failed: " + text + " (" + ex.what() + ")");
        }
    });
}

/// Every statement and expression in every function and modifier body, plus
/// state-variable initializers, must reparse from its own slice.
inline RoundTripStats round_trip(const ast::SourceUnit& unit) {
    RoundTripStats stats;
    for (const auto& c : unit.contracts) {
        for (const auto& f : c.functions) {
            if (f.body) round_trip_stmt(unit, *f.body, stats);
        }
        for (const auto& m : c.modifiers) {
            if (m.body) round_trip_stmt(unit, *m.body, stats);
        }
        for (const auto& v : c.state_variables) {
            if (!v.initializer) continue;
            ast::for_each_expr(*v.initializer, [&](const ast::Expr& e) {
                ++stats.expressions;
                const auto text = unit.slice(e.span);
                try {
                    auto again = parse_expression(text);
                    if (!ast::structurally_equal(e, *again)) stats.failures.push_back("expression differs: " + text);
                } catch (const std::exception& ex) {
                    stats.failures.push_back("expression reparse failed: " + text + " (" + ex.what() + ")");
                }
            });
        }
    }
    return stats;
}

/// Parent spans contain child spans throughout the tree.
inline bool spans_nested(const ast::Expr& e) {
    for (const auto& c : e.children) {
        if (c && (!e.span.contains(c->span) || !spans_nested(*c))) return false;
    }
    return true;
}

inline bool spans_nested(const ast::Stmt& s) {
    bool ok = true;
    auto check_expr = [&](const ast::ExprPtr& e) {
        if (e && (!s.span.contains(e->span) || !spans_nested(*e))) ok = false;
    };
    check_expr(s.expr);
    check_expr(s.post);
    if (s.init && (!s.span.contains(s.init->span) || !spans_nested(*s.init))) ok = false;
    for (const auto& b : s.body) {
        if (!s.span.contains(b->span) || !spans_nested(*b)) ok = false;
    }
    return ok;
}

inline bool spans_nested(const ast::SourceUnit& unit) {
    for (const auto& c : unit.contracts) {
        if (!unit.span.contains(c.span)) return false;
        for (const auto& f : c.functions) {
            if (!c.span.contains(f.span)) return false;
            if (f.body && (!f.span.contains(f.body->span) || !spans_nested(*f.body))) return false;
        }
        for (const auto& m : c.modifiers) {
            if (!c.span.contains(m.span)) return false;
            if (m.body && (!m.span.contains(m.body->span) || !spans_nested(*m.body))) return false;
        }
        for (const auto& v : c.state_variables) {
            if (!c.span.contains(v.span)) return false;
            if (v.initializer && (!v.span.contains(v.initializer->span) || !spans_nested(*v.initializer))) return false;
        }
    }
    return true;
}

}  // namespace scvd::testing
