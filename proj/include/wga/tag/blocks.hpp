#pragma once

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wga::tag {

// Flat tag vocabulary of the wire protocol. Tags never nest.
enum class Tag { think, tool_call, recaption, response, Image_Prompt, Tag_Name, Language };

inline const char* to_string(Tag t) {
    switch (t) {
        case Tag::think: return "think";
        case Tag::tool_call: return "tool_call";
        case Tag::recaption: return "recaption";
        case Tag::response: return "response";
        case Tag::Image_Prompt: return "Image_Prompt";
        case Tag::Tag_Name: return "Tag_Name";
        case Tag::Language: return "Language";
    }
    return "?";
}

inline constexpr std::array<Tag, 7> kAllTags = {
    Tag::think,      Tag::tool_call, Tag::recaption, Tag::response,
    Tag::Image_Prompt, Tag::Tag_Name,  Tag::Language};

enum class ErrorKind {
    UnterminatedTag,
    DuplicateTag,
    MissingBlock,
    DecodeError,
    UnsupportedTool,
    MissingArgument,
    RangeError,
    MissingKey,
};

struct ProtocolError : std::runtime_error {
    ErrorKind kind;
    size_t offset;  // byte offset into the source where applicable, else 0
    ProtocolError(ErrorKind kind_, size_t offset_, const std::string& what_)
        : std::runtime_error(what_), kind(kind_), offset(offset_) {}
};

struct TaggedBlock {
    Tag tag;
    std::string content;  // delimiters excluded
    size_t start;         // byte offset of content start in source
    size_t end;           // byte offset one past content end

    bool operator==(const TaggedBlock&) const = default;
};

// Scans for <tag>...</tag> pairs from the fixed vocabulary, in document
// order. Matching is case-sensitive and exact. An opened tag from the
// expected set without its close tag is an error; unexpected tags that
// fail to close are skipped. A tag appearing twice is a structural error
// (no tag in this protocol repeats).
inline std::vector<TaggedBlock> extract_tagged_blocks(std::string_view text,
                                                      const std::set<Tag>& expected) {
    std::vector<TaggedBlock> out;
    std::set<Tag> seen;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t lt = text.find('<', pos);
        if (lt == std::string_view::npos) break;
        std::optional<Tag> matched;
        size_t name_len = 0;
        for (Tag t : kAllTags) {
            std::string open = std::string("<") + to_string(t) + ">";
            if (text.substr(lt, open.size()) == open) {
                matched = t;
                name_len = open.size();
                break;
            }
        }
        if (!matched) {
            pos = lt + 1;
            continue;
        }
        std::string close = std::string("</") + to_string(*matched) + ">";
        size_t content_start = lt + name_len;
        size_t close_at = text.find(close, content_start);
        if (close_at == std::string_view::npos) {
            if (expected.count(*matched))
                throw ProtocolError(ErrorKind::UnterminatedTag, lt,
                                    std::string("unterminated <") + to_string(*matched) + ">");
            pos = content_start;
            continue;
        }
        if (expected.count(*matched)) {
            if (seen.count(*matched))
                throw ProtocolError(ErrorKind::DuplicateTag, lt,
                                    std::string("duplicate <") + to_string(*matched) + ">");
            seen.insert(*matched);
            out.push_back({*matched, std::string(text.substr(content_start, close_at - content_start)),
                           content_start, close_at});
        }
        pos = close_at + close.size();
    }
    return out;
}

inline const TaggedBlock& require_block(const std::vector<TaggedBlock>& blocks, Tag tag) {
    for (const auto& b : blocks)
        if (b.tag == tag) return b;
    throw ProtocolError(ErrorKind::MissingBlock, 0,
                        std::string("missing mandatory <") + to_string(tag) + "> block");
}

}  // namespace wga::tag
