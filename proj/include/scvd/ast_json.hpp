#pragma once

#include "scvd/ast.hpp"

#include <nlohmann/json.hpp>

namespace scvd {

/// AST as JSON: every node is an object with `kind`, `span` and, when it has
/// any, `children`; node-specific attributes sit alongside.
nlohmann::ordered_json to_json(const ast::SourceUnit& unit);
nlohmann::ordered_json to_json(const ast::Stmt& stmt);
nlohmann::ordered_json to_json(const ast::Expr& expr);

}  // namespace scvd
