#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wga/backend/backend.hpp"
#include "wga/tag/tool_call.hpp"
#include "wga/tag/verdicts.hpp"
#include "wga/util/atomic_file.hpp"
#include "wga/util/base64.hpp"

namespace wga::search {

struct TextHit {
    std::string title;
    std::string url;
    std::string snippet;
    std::optional<std::string> summary;

    bool operator==(const TextHit&) const = default;
};

struct ImageCandidate {
    int id = 0;  // ordinal in provider order; the ranking tie-break anchor
    std::string url;
    std::optional<std::string> bytes;
    std::optional<int> width;
    std::optional<int> height;

    bool operator==(const ImageCandidate&) const = default;
};

// Provider failures surface as a recorded error, not an exception: the
// agent logs them in the trace and continues.
template <typename T>
struct ToolOutcome {
    std::vector<T> results;
    std::optional<std::string> error;

    bool ok() const { return !error.has_value(); }
};

class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<TextHit> text_search(const std::string& q, const std::string& hl,
                                             int top_k) = 0;
    virtual std::vector<ImageCandidate> image_search(const std::string& q, const std::string& hl,
                                                     int num, const std::string& location) = 0;
};

inline std::string normalize_query(std::string_view q) {
    std::string out;
    bool prev_us = false;
    for (char c : q) {
        char lc = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        bool keep = (lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9') ||
                    static_cast<unsigned char>(lc) >= 0x80;
        if (keep) {
            out += lc;
            prev_us = false;
        } else if (!out.empty() && !prev_us) {
            out += '_';
            prev_us = true;
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

// Offline corpus: one JSON file per normalized query with "text" and
// "images" arrays in retrieval order.
class FixtureProvider : public SearchProvider {
public:
    explicit FixtureProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::vector<TextHit> text_search(const std::string& q, const std::string&, int top_k) override {
        auto j = load(q);
        std::vector<TextHit> hits;
        if (!j || !j->contains("text")) return hits;
        for (const auto& je : (*j)["text"]) {
            if (static_cast<int>(hits.size()) >= top_k) break;
            TextHit h;
            h.title = je.value("title", "");
            h.url = je.value("url", "");
            h.snippet = je.value("snippet", "");
            hits.push_back(h);
        }
        return hits;
    }

    std::vector<ImageCandidate> image_search(const std::string& q, const std::string&, int num,
                                             const std::string&) override {
        auto j = load(q);
        std::vector<ImageCandidate> out;
        if (!j || !j->contains("images")) return out;
        for (const auto& je : (*j)["images"]) {
            if (static_cast<int>(out.size()) >= num) break;
            ImageCandidate c;
            c.id = static_cast<int>(out.size());
            c.url = je.value("url", "");
            if (je.contains("bytes_b64")) c.bytes = util::base64_decode(je["bytes_b64"].get<std::string>());
            if (je.contains("width")) c.width = je["width"].get<int>();
            if (je.contains("height")) c.height = je["height"].get<int>();
            out.push_back(c);
        }
        return out;
    }

private:
    std::optional<nlohmann::json> load(const std::string& q) const {
        auto path = dir_ / (normalize_query(q) + ".json");
        if (!std::filesystem::exists(path)) return std::nullopt;
        return nlohmann::json::parse(util::read_file(path));
    }

    std::filesystem::path dir_;
};

// The two declared tools. Provider order is preserved; ranking happens
// downstream.

inline ToolOutcome<TextHit> text_search(SearchProvider& provider, const tag::ToolCall& call) {
    ToolOutcome<TextHit> out;
    if (call.name != tag::ToolName::text_search) {
        out.error = "tool-error: call is not text_search";
        return out;
    }
    try {
        out.results = provider.text_search(call.q, call.hl_or_default(), call.top_k_or_default());
    } catch (const std::exception& e) {
        out.error = std::string("tool-error: ") + e.what();
    }
    return out;
}

inline ToolOutcome<ImageCandidate> search_image(SearchProvider& provider,
                                                const tag::ToolCall& call) {
    ToolOutcome<ImageCandidate> out;
    if (call.name != tag::ToolName::search_image) {
        out.error = "tool-error: call is not search_image";
        return out;
    }
    try {
        out.results = provider.image_search(call.q, call.hl_or_default(), call.num_or_default(),
                                            call.location_or_default());
    } catch (const std::exception& e) {
        out.error = std::string("tool-error: ") + e.what();
    }
    return out;
}

// Truncates to the first `limit` Unicode scalar values, never splitting
// a multi-byte sequence.
inline std::string truncate_chars(std::string_view text, size_t limit) {
    size_t count = 0, i = 0;
    while (i < text.size() && count < limit) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        size_t len = 1;
        if ((c & 0x80) == 0) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        i += len;
        ++count;
    }
    return std::string(text.substr(0, std::min(i, text.size())));
}

inline std::string build_summary_prompt(const std::string& query, const std::string& title,
                                        const std::string& content) {
    std::string truncated = truncate_chars(content, 2000);
    return "Based on the following webpage content, provide a concise summary that is relevant "
           "to the query: \"" + query + "\"\n\n"
           "Webpage Title: " + title + "\n"
           "Content:\n" + truncated + "\n\n"
           "Please provide a focused summary (2-3 sentences maximum) that directly addresses the "
           "query. Focus on the most relevant information.\n\n"
           "You MUST format your response using the following structure:\n"
           "<think>\n[Your thinking process about what information is most relevant to the "
           "query]\n</think>\n\n"
           "<response>\n[Your concise summary here - 2-3 sentences maximum]\n</response>";
}

// Backend failure leaves the hit with its snippet only.
inline std::optional<std::string> summarize_page(backend::Backend& chat, const std::string& query,
                                                 const std::string& title,
                                                 const std::string& content) {
    backend::ChatRequest req;
    req.turns.push_back({"user", build_summary_prompt(query, title, content), {}});
    try {
        return tag::parse_summary_response(chat.chat_complete(req));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace wga::search
