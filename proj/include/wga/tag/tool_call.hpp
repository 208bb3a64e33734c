#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "wga/tag/blocks.hpp"

namespace wga::tag {

enum class ToolName { text_search, search_image };

inline const char* to_string(ToolName n) {
    return n == ToolName::text_search ? "text_search" : "search_image";
}

// Declared tool-call object. Optional arguments left unset fall back to
// the declared defaults; equality compares effective values so that a
// bare call and its parsed round-trip compare equal.
struct ToolCall {
    ToolName name = ToolName::text_search;
    std::string q;
    std::optional<std::string> hl;
    std::optional<int> top_k;     // text_search only
    std::optional<int> num;       // search_image only
    std::optional<std::string> location;  // search_image only

    std::string hl_or_default() const { return hl.value_or("en"); }
    int top_k_or_default() const { return top_k.value_or(5); }
    int num_or_default() const { return num.value_or(8); }
    std::string location_or_default() const { return location.value_or("United States"); }

    friend bool operator==(const ToolCall& a, const ToolCall& b) {
        if (a.name != b.name || a.q != b.q) return false;
        if (a.hl_or_default() != b.hl_or_default()) return false;
        if (a.name == ToolName::text_search)
            return a.top_k_or_default() == b.top_k_or_default();
        return a.num_or_default() == b.num_or_default() &&
               a.location_or_default() == b.location_or_default();
    }
};

// Decodes the interior of a <tool_call> block. Defaults are applied so
// callers always observe fully specified arguments.
inline ToolCall parse_tool_call(const std::string& block_content) {
    std::string body = block_content;
    // Accept a fully delimited message as well as a bare block interior.
    if (body.find("<tool_call>") != std::string::npos) {
        auto blocks = extract_tagged_blocks(body, {Tag::tool_call});
        body = require_block(blocks, Tag::tool_call).content;
    }
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ProtocolError(ErrorKind::DecodeError, 0, "tool call is not a JSON object");
    if (!j.contains("name") || !j["name"].is_string())
        throw ProtocolError(ErrorKind::DecodeError, 0, "tool call missing name");
    std::string name = j["name"].get<std::string>();

    ToolCall call;
    if (name == "text_search") call.name = ToolName::text_search;
    else if (name == "search_image") call.name = ToolName::search_image;
    else throw ProtocolError(ErrorKind::UnsupportedTool, 0, "unsupported tool: " + name);

    if (!j.contains("arguments") || !j["arguments"].is_object())
        throw ProtocolError(ErrorKind::MissingArgument, 0, "tool call missing arguments object");
    const auto& args = j["arguments"];
    if (!args.contains("q") || !args["q"].is_string() || args["q"].get<std::string>().empty())
        throw ProtocolError(ErrorKind::MissingArgument, 0, "missing required argument q");
    call.q = args["q"].get<std::string>();
    if (args.contains("hl")) call.hl = args["hl"].get<std::string>();
    if (call.name == ToolName::text_search) {
        call.top_k = args.contains("top_k") ? args["top_k"].get<int>() : 5;
        if (*call.top_k <= 0)
            throw ProtocolError(ErrorKind::RangeError, 0, "top_k must be positive");
    } else {
        call.num = args.contains("num") ? args["num"].get<int>() : 8;
        if (*call.num <= 0)
            throw ProtocolError(ErrorKind::RangeError, 0, "num must be positive");
        call.location =
            args.contains("location") ? args["location"].get<std::string>() : "United States";
    }
    if (!call.hl) call.hl = "en";
    return call;
}

// Emits <tool_call>{...}</tool_call> with keys in the order
// name, arguments. Only explicitly present arguments are rendered.
inline std::string render_tool_call(const ToolCall& call) {
    nlohmann::ordered_json args;
    args["q"] = call.q;
    if (call.hl) args["hl"] = *call.hl;
    if (call.name == ToolName::text_search) {
        if (call.top_k) args["top_k"] = *call.top_k;
    } else {
        if (call.num) args["num"] = *call.num;
        if (call.location) args["location"] = *call.location;
    }
    nlohmann::ordered_json j;
    j["name"] = to_string(call.name);
    j["arguments"] = args;
    return "<tool_call>" + j.dump() + "</tool_call>";
}

}  // namespace wga::tag
