#pragma once

#include <istream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wga/backend/backend.hpp"
#include "wga/util/base64.hpp"
#include "wga/util/hash.hpp"

namespace wga::backend {

// One scripted rule: the first rule whose match string occurs in the
// rendered request wins; max_uses lets a script express sequences
// (fail, fail, pass) by exhausting earlier rules.
struct MockRule {
    std::string match;
    std::string response;               // chat text, or base64 image bytes when is_image
    bool is_image = false;
    int max_uses = -1;                  // -1 = unlimited
    int uses = 0;
};

// Deterministic scripted backend. Also captures every request so tests
// can assert on exactly what was sent.
class MockBackend : public Backend {
public:
    MockBackend() = default;

    void load_script(std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            MockRule r;
            r.match = j.at("match").get<std::string>();
            if (j.contains("response")) r.response = j["response"].get<std::string>();
            if (j.contains("image_b64")) {
                r.response = util::base64_decode(j["image_b64"].get<std::string>());
                r.is_image = true;
            }
            if (j.contains("max_uses")) r.max_uses = j["max_uses"].get<int>();
            rules_.push_back(r);
        }
    }

    void load_script_text(const std::string& text) {
        std::istringstream in(text);
        load_script(in);
    }

    void add_rule(MockRule rule) { rules_.push_back(std::move(rule)); }

    std::string chat_complete(const ChatRequest& request) override {
        std::string rendered = render(request);
        std::lock_guard lock(mu_);
        chat_log_.push_back(request);
        for (auto& r : rules_) {
            if (r.is_image) continue;
            if (r.max_uses >= 0 && r.uses >= r.max_uses) continue;
            if (rendered.find(r.match) != std::string::npos) {
                ++r.uses;
                return r.response;
            }
        }
        throw BackendError(BackendErrorKind::Rejected,
                           "mock: no chat rule matches request");
    }

    std::string generate_image(const GenerateImageRequest& request) override {
        check_generate_preconditions(request);
        std::lock_guard lock(mu_);
        generate_log_.push_back(request);
        for (auto& r : rules_) {
            if (!r.is_image) continue;
            if (r.max_uses >= 0 && r.uses >= r.max_uses) continue;
            if (request.caption.find(r.match) != std::string::npos) {
                ++r.uses;
                return r.response;
            }
        }
        // No scripted image: synthesize stable bytes from the request.
        std::string material = request.caption;
        for (const auto& ref : request.reference_images) material += "|" + ref;
        if (request.seed) material += "#" + std::to_string(*request.seed);
        return "MOCKIMG:" + util::content_hash(material);
    }

    const std::vector<ChatRequest>& chat_log() const { return chat_log_; }
    const std::vector<GenerateImageRequest>& generate_log() const { return generate_log_; }

private:
    static std::string render(const ChatRequest& request) {
        std::string out = request.system;
        for (const auto& t : request.turns) out += "\n" + t.role + ": " + t.text;
        return out;
    }

    std::vector<MockRule> rules_;
    std::vector<ChatRequest> chat_log_;
    std::vector<GenerateImageRequest> generate_log_;
    std::mutex mu_;
};

}  // namespace wga::backend
