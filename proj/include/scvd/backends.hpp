#pragma once

#include "scvd/call_graph.hpp"
#include "scvd/category.hpp"
#include "scvd/project.hpp"
#include "scvd/prompt.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace scvd {

struct Verdict {
    bool is_vulnerable = false;
    std::optional<std::string> code_snippet;
    std::optional<int> line;  // 1-based, relative to the start of the target function
    std::string backend;      // "rules" or "llm"
    std::optional<std::string> raw;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// `{"is_vulnerable": ..., "code_snippet": ..., "line": ...}`; absent
/// optionals are omitted. With `with_meta`, backend and raw are included.
std::string verdict_to_json(const Verdict& v, bool with_meta = false);

/// First JSON object in `raw` that carries an `is_vulnerable` key. Code
/// fences and surrounding prose are ignored; `"true"`/`"false"` strings are
/// accepted. Throws UnparseableResponse otherwise. `raw` is kept on the
/// result.
Verdict parse_verdict(std::string_view raw);

enum class BackendKind { Llm, Rules };

struct BackendConfig {
    BackendKind kind = BackendKind::Rules;
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-4";
    std::string api_key;
    double timeout_seconds = 60;
    int max_retries = 3;
    double temperature = 0;

    /// Fills endpoint, model and api_key from SCVD_API_BASE, SCVD_MODEL and
    /// SCVD_API_KEY when set.
    static BackendConfig from_env(BackendKind kind);
    /// Throws ConfigError on a negative retry count or non-positive timeout.
    void validate() const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
void real_sleep(std::chrono::milliseconds d);

/// 1s * 2^retry plus up to half of that again as jitter.
std::chrono::milliseconds backoff_delay(int retry, std::mt19937_64& rng);

/// One chat-completion POST to `<endpoint>/chat/completions` with the prompt
/// as the only user message. Connection failures, timeouts, 429 and 5xx are
/// retried up to `max_retries` times. Throws AuthError when the key is
/// missing or rejected (401/403), BackendUnavailable when retries run out
/// or the server refuses the request, UnparseableResponse when the reply has
/// no message content.
std::string llm_request(const BackendConfig& config, const std::string& prompt, const Sleeper& sleep = real_sleep);

/// The reentrancy decision rules: a nonReentrant guard clears the target;
/// transfer/send, super calls and emits are not qualifying external calls;
/// a qualifying external call followed by a state write or an emit (directly
/// or inside an internal callee) is vulnerable, and the snippet is the first
/// such statement.
Verdict rule_detect_reentrancy(const ProjectModel& model, const FunctionRef& target);

bool rules_support(VulnCategory category) noexcept;

/// Deterministic verdicts for the syntactically crisp categories. Throws
/// UnsupportedCategory for the rest and NotFound for an unknown target.
Verdict rule_detect(VulnCategory category, const ProjectModel& model, const FunctionRef& target);

/// Dispatches on `config.kind`. The llm backend sends `prompt.text` as is
/// and parses the reply; the rules backend ignores the prompt.
Verdict detect(const BackendConfig& config, VulnCategory category, const AssembledPrompt& prompt,
               const ProjectModel& model, const FunctionRef& target, const Sleeper& sleep = real_sleep);

}  // namespace scvd
