#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "wga/tag/blocks.hpp"

namespace wga::tag {

struct JudgeVerdict {
    int score = 0;  // 0..10
    std::string reason;
    bool is_text_heavy = false;
    bool has_watermark = false;

    bool operator==(const JudgeVerdict&) const = default;
};

struct EvalScores {
    int clarity = 0;
    int content_quality = 0;
    int aesthetics = 0;
    int text_relevance_ip = 0;
    std::string rationale;

    bool operator==(const EvalScores&) const = default;
};

// Returns the first balanced JSON object embedded in free text.
// Judge outputs routinely wrap the object in markdown fences or prose
// despite being told not to, so lenient extraction is the default;
// strict mode requires the text to be exactly one JSON object.
inline nlohmann::json extract_json_object(const std::string& text, bool strict = false) {
    if (strict) {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ProtocolError(ErrorKind::DecodeError, 0, "strict mode: text is not a JSON object");
        return j;
    }
    size_t start = text.find('{');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_str = false, esc = false;
        for (size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_str) {
                if (esc) esc = false;
                else if (c == '\\') esc = true;
                else if (c == '"') in_str = false;
            } else if (c == '"') {
                in_str = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    auto j = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!j.is_discarded() && j.is_object()) return j;
                    break;  // not valid JSON, try the next '{'
                }
            }
        }
        start = text.find('{', start + 1);
    }
    throw ProtocolError(ErrorKind::DecodeError, 0, "no decodable JSON object found");
}

inline int require_score_0_10(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        throw ProtocolError(ErrorKind::MissingKey, 0, std::string("missing key: ") + key);
    if (!j[key].is_number_integer())
        throw ProtocolError(ErrorKind::DecodeError, 0, std::string(key) + " is not an integer");
    int v = j[key].get<int>();
    if (v < 0 || v > 10)
        throw ProtocolError(ErrorKind::RangeError, 0,
                            std::string(key) + " outside 0..10: " + std::to_string(v));
    return v;
}

inline JudgeVerdict parse_judge_verdict(const std::string& text, bool strict = false) {
    nlohmann::json j = extract_json_object(text, strict);
    JudgeVerdict v;
    v.score = require_score_0_10(j, "score");
    if (j.contains("reason") && j["reason"].is_string()) v.reason = j["reason"].get<std::string>();
    if (j.contains("is_text_heavy") && j["is_text_heavy"].is_boolean())
        v.is_text_heavy = j["is_text_heavy"].get<bool>();
    if (j.contains("has_watermark") && j["has_watermark"].is_boolean())
        v.has_watermark = j["has_watermark"].get<bool>();
    return v;
}

// Requires exactly the four named score keys plus rationale; any extra
// key is ignored.
inline EvalScores parse_eval_scores(const std::string& text, bool strict = false) {
    nlohmann::json j = extract_json_object(text, strict);
    EvalScores s;
    s.clarity = require_score_0_10(j, "clarity");
    s.content_quality = require_score_0_10(j, "content_quality");
    s.aesthetics = require_score_0_10(j, "aesthetics");
    s.text_relevance_ip = require_score_0_10(j, "text_relevance_ip");
    if (!j.contains("rationale"))
        throw ProtocolError(ErrorKind::MissingKey, 0, "missing key: rationale");
    if (!j["rationale"].is_string() || j["rationale"].get<std::string>().empty())
        throw ProtocolError(ErrorKind::DecodeError, 0, "rationale must be a non-empty string");
    s.rationale = j["rationale"].get<std::string>();
    return s;
}

// <think> + <recaption> pair, both mandatory.
inline std::pair<std::string, std::string> parse_recaption_output(const std::string& text) {
    auto blocks = extract_tagged_blocks(text, {Tag::think, Tag::recaption});
    const auto& think = require_block(blocks, Tag::think);
    const auto& recap = require_block(blocks, Tag::recaption);
    return {think.content, recap.content};
}

// <response> block of a summarization reply; <think> is optional.
inline std::string parse_summary_response(const std::string& text) {
    auto blocks = extract_tagged_blocks(text, {Tag::response});
    return require_block(blocks, Tag::response).content;
}

}  // namespace wga::tag
