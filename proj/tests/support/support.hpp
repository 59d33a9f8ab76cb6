#pragma once

// Helpers shared by the unit and acceptance tests.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "scvd/backends.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace scvd::testing {

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& prefix = "scvd-test-") {
        path = std::filesystem::temp_directory_path() / (prefix + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    void write(const std::filesystem::path& rel, const std::string& text) const {
        std::filesystem::create_directories((path / rel).parent_path());
        std::ofstream(path / rel, std::ios::binary) << text;
    }
};

// Local chat-completions stand-in. `script` maps the 0-based request number
// to a status; anything past the end answers 200 with `reply`.
struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::vector<int> script;
    std::string reply = "{\"is_vulnerable\": false}";
    std::atomic<int> hits{0};
    std::string last_body;
    std::string last_auth;
    std::mutex mu;

    StubServer() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = hits++;
            {
                std::lock_guard lock(mu);
                last_body = req.body;
                last_auth = req.get_header_value("Authorization");
            }
            if (n < static_cast<int>(script.size()) && script[n] != 200) {
                res.status = script[n];
                res.set_content("{\"error\": \"scripted\"}", "application/json");
                return;
            }
            nlohmann::json j;
            j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", reply}}}}});
            res.set_content(j.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
    BackendConfig config() const {
        BackendConfig c;
        c.kind = BackendKind::Llm;
        c.endpoint = endpoint();
        c.model = "stub-model";
        c.api_key = "test-key";
        c.timeout_seconds = 5;
        c.max_retries = 3;
        return c;
    }
};

struct RecordingSleeper {
    std::vector<std::chrono::milliseconds> delays;
    Sleeper fn() {
        return [this](std::chrono::milliseconds d) { delays.push_back(d); };
    }
};

}  // namespace scvd::testing
