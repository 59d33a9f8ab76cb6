#pragma once

#include "scvd/project.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

namespace scvd {

/// Settings read from a `scvd.toml` file. Unset keys stay empty so the
/// caller's defaults and command-line flags apply.
///
///     exclude = ["**/legacy/**"]      # or under [filter]
///     [backend]  endpoint, model, timeout, max_retries, temperature
///     [prompt]   budget, allow_zero_shot
///     [context]  depth
struct ToolConfig {
    FilterConfig filter;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<double> timeout_seconds;
    std::optional<int> max_retries;
    std::optional<double> temperature;
    std::optional<std::size_t> budget;
    std::optional<bool> allow_zero_shot;
    std::optional<int> depth;
};

/// Throws IoError when the file cannot be read and ConfigError on a syntax
/// error or a value of the wrong type. Unknown keys are ignored.
ToolConfig load_tool_config(const std::filesystem::path& file, FilterConfig base = FilterConfig::defaults());

}  // namespace scvd
