#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wga::core {

enum class Language { zh, en };

inline const char* to_string(Language l) { return l == Language::zh ? "zh" : "en"; }

inline std::optional<Language> language_from_string(const std::string& s) {
    if (s == "zh") return Language::zh;
    if (s == "en") return Language::en;
    return std::nullopt;
}

struct UserPrompt {
    std::string id;
    std::string text;
    Language language = Language::en;
    std::optional<std::string> category;  // taxonomy subcategory tag

    bool operator==(const UserPrompt&) const = default;
};

// Output of the Think stage: whether research is needed and which
// visually critical attributes are missing.
struct GapAssessment {
    bool needs_research = false;
    std::vector<std::string> missing_units;
    std::string raw_reasoning;

    bool operator==(const GapAssessment&) const = default;
};

struct EvidenceItem {
    std::string title;
    std::string url;
    std::string summary;

    bool operator==(const EvidenceItem&) const = default;
};

struct TextualTrace {
    std::string query;
    std::vector<EvidenceItem> evidence;

    bool operator==(const TextualTrace&) const = default;
};

struct CandidateScore {
    int id = 0;               // ordinal within the retrieval result set
    std::string url;
    double aggregate = 0.0;
    bool rejected = false;
    std::string reject_reason;

    bool operator==(const CandidateScore&) const = default;
};

struct VisualTrace {
    std::string query;
    std::vector<CandidateScore> candidates;
    std::vector<int> selected;  // <=2 candidate ids, top-2 by aggregate

    bool operator==(const VisualTrace&) const = default;
};

struct Recaption {
    std::string think;
    std::string body;
    std::set<std::string> references_used;  // subset of {"image_1","image_2"}
    Language language = Language::en;

    bool operator==(const Recaption&) const = default;
};

struct SftRecord {
    UserPrompt prompt;
    TextualTrace textual;
    VisualTrace visual;
    Recaption recaption;
    std::optional<std::string> image_ref;  // content hash of the verified image
    bool verified = false;
    int trials_used = 1;

    bool operator==(const SftRecord&) const = default;
};

}  // namespace wga::core
