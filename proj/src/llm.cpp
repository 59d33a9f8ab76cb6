#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "scvd/backends.hpp"
#include "scvd/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

namespace scvd {

std::string verdict_to_json(const Verdict& v, bool with_meta) {
    nlohmann::ordered_json j;
    j["is_vulnerable"] = v.is_vulnerable;
    if (v.code_snippet) j["code_snippet"] = *v.code_snippet;
    if (v.line) j["line"] = *v.line;
    if (with_meta) {
        j["backend"] = v.backend;
        if (v.raw) j["raw"] = *v.raw;
    }
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

namespace {

// End of the balanced `{...}` starting at `open`, skipping string literals.
std::optional<std::size_t> object_end(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i;
    }
    return std::nullopt;
}

std::optional<bool> as_bool(const nlohmann::json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        auto s = v.get<std::string>();
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (s == "true") return true;
        if (s == "false") return false;
    }
    return std::nullopt;
}

}  // namespace

Verdict parse_verdict(std::string_view raw) {
    for (std::size_t open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
        const auto close = object_end(raw, open);
        if (!close) continue;
        const auto j = nlohmann::json::parse(raw.substr(open, *close - open + 1), nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("is_vulnerable")) continue;
        const auto flag = as_bool(j["is_vulnerable"]);
        if (!flag) continue;
        Verdict v;
        v.is_vulnerable = *flag;
        if (j.contains("code_snippet") && j["code_snippet"].is_string())
            v.code_snippet = j["code_snippet"].get<std::string>();
        if (j.contains("line") && j["line"].is_number_integer()) v.line = j["line"].get<int>();
        v.raw = std::string(raw);
        return v;
    }
    throw UnparseableResponse("no JSON object with an is_vulnerable key in the response");
}

BackendConfig BackendConfig::from_env(BackendKind kind) {
    BackendConfig c;
    c.kind = kind;
    if (const char* v = std::getenv("SCVD_API_BASE"); v && *v) c.endpoint = v;
    if (const char* v = std::getenv("SCVD_MODEL"); v && *v) c.model = v;
    if (const char* v = std::getenv("SCVD_API_KEY"); v && *v) c.api_key = v;
    return c;
}

void BackendConfig::validate() const {
    if (max_retries < 0) throw ConfigError("max retries must be >= 0");
    if (!(timeout_seconds > 0)) throw ConfigError("timeout must be > 0 seconds");
    if (kind == BackendKind::Llm && (endpoint.empty() || model.empty()))
        throw ConfigError("llm backend needs an endpoint and a model");
}

void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::chrono::milliseconds backoff_delay(int retry, std::mt19937_64& rng) {
    const auto base = static_cast<long long>(1000.0 * std::pow(2.0, retry));
    std::uniform_int_distribution<long long> jitter(0, base / 2);
    return std::chrono::milliseconds(base + jitter(rng));
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("endpoint must be an http(s) URL: " + url);
    std::string path = m[2].matched ? m[2].str() : "";
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {m[1].str(), path};
}

bool transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string llm_request(const BackendConfig& config, const std::string& prompt, const Sleeper& sleep) {
    config.validate();
    if (config.api_key.empty()) throw AuthError("no API key; set SCVD_API_KEY");
    const auto ep = split_endpoint(config.endpoint);

    nlohmann::json body;
    body["model"] = config.model;
    body["temperature"] = config.temperature;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
    const auto payload = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

    httplib::Client client(ep.origin);
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(config.timeout_seconds * 1000));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const httplib::Headers headers{{"Authorization", "Bearer " + config.api_key}};

    std::mt19937_64 rng(std::random_device{}());
    std::string last_problem;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) sleep(backoff_delay(attempt - 1, rng));
        auto res = client.Post(ep.path + "/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_problem = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthError("endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
        if (transient(res->status)) {
            last_problem = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendUnavailable("endpoint refused the request (HTTP " + std::to_string(res->status) +
                                     "): " + res->body.substr(0, 200));
        const auto j = nlohmann::json::parse(res->body, nullptr, false);
        try {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw UnparseableResponse("completion has no choices[0].message.content");
        }
    }
    throw BackendUnavailable("giving up after " + std::to_string(config.max_retries + 1) +
                             " attempts: " + last_problem);
}

Verdict detect(const BackendConfig& config, VulnCategory category, const AssembledPrompt& prompt,
               const ProjectModel& model, const FunctionRef& target, const Sleeper& sleep) {
    if (config.kind == BackendKind::Rules) return rule_detect(category, model, target);
    auto v = parse_verdict(llm_request(config, prompt.text, sleep));
    v.backend = "llm";
    return v;
}

}  // namespace scvd
