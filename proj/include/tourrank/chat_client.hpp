#pragma once
// Chat-completions transport: POST {model, messages, temperature}, read
// choices[0].message.content. Connection failures, timeouts and 408/429/5xx
// are retried with exponential backoff; auth rejections surface as a
// distinct error and are never retried.

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tourrank/concurrency.hpp"
#include "tourrank/judge.hpp"

namespace tourrank {

struct ChatEndpointConfig {
    std::string endpoint; // full URL, e.g. http://localhost:8080/v1/chat/completions
    std::string model;
    std::string api_key;  // empty = no Authorization header
    double temperature = 0.0;
    int timeout_ms = 30000;
    int max_retries = 3;       // re-attempts after the first try
    int backoff_ms = 250;      // doubles per re-attempt
    int max_in_flight = 8;
};

struct ChatReply {
    std::string content;
    int retries = 0; // re-attempts that were needed before success
};

class ChatClient {
public:
    explicit ChatClient(ChatEndpointConfig config)
        : config_(std::move(config)), in_flight_(config_.max_in_flight) {
        const auto scheme_end = config_.endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw std::invalid_argument("endpoint must be an http(s) URL: '" + config_.endpoint + "'");
        const auto path_start = config_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = config_.endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_ = config_.endpoint.substr(0, path_start);
            path_ = config_.endpoint.substr(path_start);
        }
        if (config_.model.empty()) throw std::invalid_argument("model name must not be empty");
        if (config_.timeout_ms < 1 || config_.max_retries < 0 || config_.backoff_ms < 0)
            throw std::invalid_argument("bad transport limits");
    }

    const ChatEndpointConfig& config() const { return config_; }

    ChatReply complete(const std::vector<ChatMessage>& messages) {
        const std::string body = request_body(messages);
        std::string last_failure;

        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                const auto pause = std::chrono::milliseconds(
                    static_cast<std::int64_t>(config_.backoff_ms) << (attempt - 1));
                std::this_thread::sleep_for(pause);
            }
            ConcurrencyLimit::Guard guard(in_flight_);

            httplib::Client http(base_);
            http.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
            http.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
            http.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));
            httplib::Headers headers;
            if (!config_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + config_.api_key);

            httplib::Result res = http.Post(path_, headers, body, "application/json");
            if (!res) {
                last_failure = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 401 || res->status == 403)
                throw AuthFailure("endpoint rejected credentials (HTTP " +
                                  std::to_string(res->status) + ")");
            if (res->status == 408 || res->status == 429 ||
                (res->status >= 500 && res->status <= 599)) {
                last_failure = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw JudgeUnavailable("endpoint returned HTTP " + std::to_string(res->status));

            ChatReply reply;
            reply.content = extract_content(res->body);
            reply.retries = attempt;
            return reply;
        }
        throw JudgeUnavailable("gave up after " + std::to_string(config_.max_retries + 1) +
                               " attempts (" + last_failure + ")");
    }

private:
    std::string request_body(const std::vector<ChatMessage>& messages) const {
        nlohmann::json body;
        body["model"] = config_.model;
        body["temperature"] = config_.temperature;
        nlohmann::json list = nlohmann::json::array();
        for (const ChatMessage& m : messages) list.push_back({{"role", m.role}, {"content", m.content}});
        body["messages"] = std::move(list);
        return body.dump();
    }

    static std::string extract_content(const std::string& body) {
        nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
        if (!parsed.is_discarded() && parsed.contains("choices") && parsed["choices"].is_array() &&
            !parsed["choices"].empty()) {
            const nlohmann::json& first = parsed["choices"][0];
            if (first.contains("message") && first["message"].contains("content") &&
                first["message"]["content"].is_string())
                return first["message"]["content"].get<std::string>();
        }
        throw JudgeUnavailable("endpoint reply lacks choices[0].message.content");
    }

    ChatEndpointConfig config_;
    std::string base_;
    std::string path_;
    ConcurrencyLimit in_flight_;
};

} // namespace tourrank
