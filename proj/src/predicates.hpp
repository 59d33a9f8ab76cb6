#pragma once

// Syntactic predicates shared by candidate selection and the rule engine.

#include "scvd/ast.hpp"
#include "scvd/project.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace scvd::detail {

std::string lower(std::string_view s);
// case-insensitive; `needle` must already be lower case
bool contains(std::string_view haystack, std::string_view needle);

bool any_expr(const ast::Stmt& body, const std::function<bool(const ast::Expr&)>& pred);
bool is_member_of(const ast::Expr& e, std::string_view base, std::string_view member);
const ast::Expr* callee_of(const ast::Expr& call);

bool is_decimal_with_many_digits(const ast::Expr& e);
bool divides_then_multiplies(const ast::Expr& e);
bool is_value_type(const ast::TypeNamePtr& t, const ProjectModel& model);
std::vector<const ast::StateVariable*> constant_candidates(const ProjectModel& model,
                                                           const std::string& contract_qualified);
/// First call statement that drops a return value the caller should check.
const CallEdge* first_unused_return(const ProjectModel& model, std::size_t node);

}  // namespace scvd::detail
