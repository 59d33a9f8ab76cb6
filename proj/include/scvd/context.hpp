#pragma once

#include "scvd/call_graph.hpp"
#include "scvd/category.hpp"
#include "scvd/project.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace scvd {

struct CallstackEntry {
    std::string signature;  // `Contract.name(types)`, or the call text for unresolved callees
    std::string source;     // verbatim definition, empty for unresolved callees

    friend bool operator==(const CallstackEntry&, const CallstackEntry&) = default;
};

/// The twelve context fields handed to the model. Every snippet is a
/// verbatim slice of a retained source file.
struct ContextBundle {
    std::vector<std::string> imports;
    std::vector<std::string> internal_states;
    std::string target_function;
    std::vector<CallstackEntry> callstack;
    std::vector<std::string> modifiers;
    std::vector<std::string> modifiers_codes;
    std::string constructor;
    std::string initializer;
    std::vector<std::string> internal_calls;
    std::vector<std::string> external_calls;
    std::vector<std::string> external_objects;
    std::vector<std::string> events;

    friend bool operator==(const ContextBundle&, const ContextBundle&) = default;
};

inline constexpr std::array<std::string_view, 12> kBundleKeys = {
    "imports",     "internal_states", "target_function", "callstack",      "modifiers",        "modifiers_codes",
    "constructor", "initializer",     "internal_calls",  "external_calls", "external_objects", "events",
};

inline constexpr int kDefaultCallstackDepth = 2;

/// Breadth-first over Internal and SuperCall edges from `target`, up to
/// `depth` hops. The target itself is excluded and every function appears
/// once. Non-builtin Unresolved callees are included as entries with an
/// empty `file` whose `signature` holds the call text; they are not expanded.
std::vector<FunctionRef> collect_callstack(const CallGraph& graph, const FunctionRef& target, int depth);

/// Throws NotFound when `target` is not in the model.
ContextBundle extract_context(const ProjectModel& model, const FunctionRef& target, VulnCategory category,
                              int depth = kDefaultCallstackDepth);

/// Two-space indented JSON object with the keys in fixed order, newline
/// terminated.
std::string bundle_to_json(const ContextBundle& bundle);
/// Inverse of bundle_to_json. Throws ConfigError on a missing key or a
/// value of the wrong shape.
ContextBundle bundle_from_json(std::string_view text);

}  // namespace scvd
