#include "scvd/config.hpp"
#include "scvd/errors.hpp"

#include <toml.hpp>

#include <fstream>
#include <sstream>

namespace scvd {

namespace fs = std::filesystem;

namespace {

// Reason attached to a glob coming from a config file: keep the default
// reason when the glob is one of the defaults.
std::string reason_for(const std::string& glob) {
    for (const auto& rule : FilterConfig::defaults().exclude) {
        if (rule.glob == glob) return rule.reason;
    }
    return "user-glob";
}

toml::table parse(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open config " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return toml::parse(ss.str(), file.string());
    } catch (const toml::parse_error& e) {
        const auto& at = e.source().begin;
        throw ConfigError(file.string() + ":" + std::to_string(at.line) + ":" + std::to_string(at.column) + ": " +
                          std::string(e.description()));
    }
}

template <class T>
std::optional<T> get(const toml::table& root, std::string_view table, std::string_view key, const fs::path& file) {
    const auto node = root[table][key];
    if (!node) return std::nullopt;
    if (auto v = node.value<T>()) return v;
    throw ConfigError(file.string() + ": [" + std::string(table) + "] " + std::string(key) + " has the wrong type");
}

std::optional<std::vector<ExcludeRule>> exclude_rules(const toml::node_view<const toml::node> node,
                                                      const fs::path& file) {
    if (!node) return std::nullopt;
    const auto* arr = node.as_array();
    if (!arr) throw ConfigError(file.string() + ": exclude must be an array");
    std::vector<ExcludeRule> rules;
    for (const auto& item : *arr) {
        const auto glob = item.value<std::string>();
        if (!glob) throw ConfigError(file.string() + ": exclude entries must be strings");
        rules.push_back({*glob, reason_for(*glob)});
    }
    return rules;
}

}  // namespace

ToolConfig load_tool_config(const fs::path& file, FilterConfig base) {
    const auto root = parse(file);
    const toml::node_view<const toml::node> view{root};

    ToolConfig c;
    c.filter = std::move(base);
    auto rules = exclude_rules(view["filter"]["exclude"], file);
    if (!rules) rules = exclude_rules(view["exclude"], file);
    if (rules) c.filter.exclude = std::move(*rules);

    c.endpoint = get<std::string>(root, "backend", "endpoint", file);
    c.model = get<std::string>(root, "backend", "model", file);
    c.timeout_seconds = get<double>(root, "backend", "timeout", file);
    c.max_retries = get<int>(root, "backend", "max_retries", file);
    c.temperature = get<double>(root, "backend", "temperature", file);
    if (const auto b = get<std::int64_t>(root, "prompt", "budget", file)) {
        if (*b < 0) throw ConfigError(file.string() + ": [prompt] budget must be >= 0");
        c.budget = static_cast<std::size_t>(*b);
    }
    c.allow_zero_shot = get<bool>(root, "prompt", "allow_zero_shot", file);
    c.depth = get<int>(root, "context", "depth", file);
    return c;
}

FilterConfig load_filter_config(const fs::path& file, FilterConfig base) {
    return load_tool_config(file, std::move(base)).filter;
}

}  // namespace scvd
