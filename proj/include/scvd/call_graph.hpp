#pragma once

#include "scvd/ast.hpp"

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace scvd {

class ProjectModel;

struct FunctionRef {
    std::string file;
    std::string contract;
    std::string name;       // display name: constructor / fallback / receive for the special kinds
    std::string signature;  // canonical parameter types, e.g. `uint256,address`
    Span span;
    bool is_modifier = false;

    /// `Contract.name(types)`
    std::string display() const { return contract + "." + name + "(" + signature + ")"; }

    friend bool operator==(const FunctionRef& a, const FunctionRef& b) noexcept {
        return a.file == b.file && a.contract == b.contract && a.name == b.name && a.signature == b.signature &&
               a.is_modifier == b.is_modifier;
    }
};

enum class CallKind { Internal, External, EventEmit, SuperCall, Unresolved };

std::string_view to_string(CallKind k) noexcept;

struct CallEdge {
    std::size_t caller = 0;             // node index
    std::optional<std::size_t> callee;  // node index when the target is in the project
    CallKind kind = CallKind::Unresolved;
    std::string callee_name;  // callee expression text without arguments, e.g. `token.transfer`
    std::string member;       // last name segment, e.g. `transfer`
    std::string receiver;     // receiver expression text for member calls
    std::string call_text;    // verbatim call expression
    Span span;
    std::size_t arg_count = 0;
    bool builtin = false;            // require, keccak256, type conversions, ... (always Unresolved)
    bool low_level = false;          // call / delegatecall / staticcall / send / transfer / sendValue
    bool receiver_is_address = false;
    const ast::Expr* expr = nullptr;

    /// `.transfer` / `.send` on an address: forwards only the 2300 gas stipend.
    bool is_stipend_transfer() const noexcept {
        return kind == CallKind::External && (member == "transfer" || member == "send") &&
               (receiver_is_address || arg_count == 1);
    }
};

struct CallGraph {
    std::vector<FunctionRef> nodes;
    std::vector<CallEdge> edges;
    std::vector<std::vector<std::size_t>> outgoing;  // edge ids per node, in source order

    std::vector<const CallEdge*> edges_from(std::size_t node) const;
    /// Edges classified External; never contains EventEmit or SuperCall.
    std::vector<const CallEdge*> external_calls_from(std::size_t node) const;
};

/// One edge per call expression in every function and modifier body.
CallGraph build_call_graph(const ProjectModel& model);

}  // namespace scvd
