#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wga/backend/image_store.hpp"

namespace wga::backend {

struct ChatTurn {
    std::string role;  // "user" / "assistant"
    std::string text;
    std::vector<std::string> images;  // content hashes resolvable via the store
};

struct ChatRequest {
    std::string system;
    std::vector<ChatTurn> turns;
    int max_tokens = 4096;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
};

struct GenerateImageRequest {
    std::string caption;
    std::vector<std::string> reference_images;  // <=2 content hashes
    int width = 1024;
    int height = 1024;
    std::optional<std::int64_t> seed;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{50};
    std::set<int> retryable_statuses{429, 500, 502, 503};
};

enum class BackendErrorKind { Unavailable, Rejected, Decode, Precondition };

struct BackendError : std::runtime_error {
    BackendErrorKind kind;
    int status = 0;
    BackendError(BackendErrorKind kind_, const std::string& what_, int status_ = 0)
        : std::runtime_error(what_), kind(kind_), status(status_) {}
};

struct ImageProvenance {
    std::optional<std::int64_t> seed;
    std::string caption_hash;
};

// Uniform access to the three external model roles: text sampler
// (think/query/recaption), multimodal judge, and image generator.
// Returns raw text only; tag and verdict interpretation lives elsewhere.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string chat_complete(const ChatRequest& request) = 0;
    virtual std::string generate_image(const GenerateImageRequest& request) = 0;
};

inline void check_generate_preconditions(const GenerateImageRequest& request) {
    if (request.caption.empty())
        throw BackendError(BackendErrorKind::Precondition, "caption must be non-empty");
    if (request.reference_images.size() > 2)
        throw BackendError(BackendErrorKind::Precondition,
                           "at most 2 reference images are allowed");
}

}  // namespace wga::backend
