#pragma once

#include "scvd/ast.hpp"

#include <string>
#include <string_view>

namespace scvd {

struct ParseOptions {
    std::uint32_t file_id = 0;
    /// Skip a contract whose body cannot be parsed (recording a diagnostic)
    /// instead of throwing. Project loading turns this on.
    bool recover = false;
};

/// Parses a whole file. Unsupported top-level constructs (free functions,
/// file-level structs, constants, ...) are skipped with a diagnostic.
ast::SourceUnit parse_source_unit(std::string source, std::string path, ParseOptions options = {});

/// Parses `source` as exactly one expression / statement. Used to check that
/// sliced snippets reparse to the same tree.
ast::ExprPtr parse_expression(std::string_view source);
ast::StmtPtr parse_statement(std::string_view source);

/// Elementary type keyword (`uint`, `bytes32`, `address`, ...).
bool is_elementary(std::string_view name);
/// `uint` -> `uint256`, `int` -> `int256`, `byte` -> `bytes1`.
std::string normalize_elementary(std::string_view name);

/// Verbatim bytes covered by `span`. Throws OutOfRange if the span does not
/// fit inside `source`.
std::string slice_source(std::string_view source, const Span& span);

}  // namespace scvd
