#pragma once

#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "wga/backend/backend.hpp"
#include "wga/util/base64.hpp"

namespace wga::backend {

// Minimal JSON POST protocol: a messages array with optional base64
// image parts. Adapters for specific providers map this shape onto
// their own wire formats.
class HttpBackend : public Backend {
public:
    HttpBackend(std::string base_url, std::string api_key, ImageStore* store,
                RetryPolicy policy = {})
        : base_url_(std::move(base_url)), api_key_(std::move(api_key)), store_(store),
          policy_(policy) {}

    std::string chat_complete(const ChatRequest& request) override {
        nlohmann::ordered_json body;
        body["system"] = request.system;
        body["messages"] = nlohmann::ordered_json::array();
        for (const auto& t : request.turns) {
            nlohmann::ordered_json msg;
            msg["role"] = t.role;
            msg["text"] = t.text;
            if (!t.images.empty()) {
                msg["images"] = nlohmann::ordered_json::array();
                for (const auto& h : t.images) {
                    auto bytes = store_ ? store_->get(h) : std::nullopt;
                    if (!bytes)
                        throw BackendError(BackendErrorKind::Precondition,
                                           "unresolvable image handle: " + h);
                    msg["images"].push_back(util::base64_encode(*bytes));
                }
            }
            body["messages"].push_back(msg);
        }
        body["max_tokens"] = request.max_tokens;
        body["temperature"] = request.temperature;
        if (request.seed) body["seed"] = *request.seed;
        auto reply = post("/v1/chat", body.dump());
        auto j = nlohmann::json::parse(reply, nullptr, false);
        if (j.is_discarded() || !j.contains("text"))
            throw BackendError(BackendErrorKind::Decode, "chat reply missing text field");
        return j["text"].get<std::string>();
    }

    // Returns raw image bytes; callers hash and store them.
    std::string generate_image(const GenerateImageRequest& request) override {
        check_generate_preconditions(request);
        nlohmann::ordered_json body;
        body["caption"] = request.caption;
        body["reference_images"] = nlohmann::ordered_json::array();
        for (const auto& h : request.reference_images) {
            auto bytes = store_ ? store_->get(h) : std::nullopt;
            if (!bytes)
                throw BackendError(BackendErrorKind::Precondition,
                                   "unresolvable image handle: " + h);
            body["reference_images"].push_back(util::base64_encode(*bytes));
        }
        body["width"] = request.width;
        body["height"] = request.height;
        if (request.seed) body["seed"] = *request.seed;
        auto reply = post("/v1/generate", body.dump());
        auto j = nlohmann::json::parse(reply, nullptr, false);
        if (j.is_discarded() || !j.contains("image_b64"))
            throw BackendError(BackendErrorKind::Decode, "generate reply missing image_b64");
        try {
            return util::base64_decode(j["image_b64"].get<std::string>());
        } catch (const std::exception& e) {
            throw BackendError(BackendErrorKind::Decode,
                               std::string("invalid image payload: ") + e.what());
        }
    }

    int last_attempts() const { return last_attempts_; }

private:
    std::string post(const std::string& path, const std::string& body) {
        httplib::Client client(base_url_);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto backoff = policy_.base_backoff;
        for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
            last_attempts_ = attempt;
            auto res = client.Post(path, headers, body, "application/json");
            if (res && res->status >= 200 && res->status < 300) return res->body;
            bool retryable = !res || policy_.retryable_statuses.count(res->status) > 0;
            if (!retryable) {
                std::string excerpt = res->body.substr(0, 200);
                throw BackendError(BackendErrorKind::Rejected,
                                   "backend rejected request (status " +
                                       std::to_string(res->status) + "): " + excerpt,
                                   res->status);
            }
            if (attempt < policy_.max_attempts) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;  // monotone non-decreasing
            }
        }
        throw BackendError(BackendErrorKind::Unavailable,
                           "backend unavailable after " +
                               std::to_string(policy_.max_attempts) + " attempts");
    }

    std::string base_url_;
    std::string api_key_;
    ImageStore* store_;
    RetryPolicy policy_;
    int last_attempts_ = 0;
};

}  // namespace wga::backend
