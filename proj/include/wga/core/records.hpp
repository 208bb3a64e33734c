#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wga/core/types.hpp"

namespace wga::core {

using ordered_json = nlohmann::ordered_json;

struct Violation {
    std::string field;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

struct ParseError : std::runtime_error {
    size_t line;  // 1-based
    ParseError(size_t line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

// ---- serialization (fixed key order, line-delimited JSON) ----

inline ordered_json to_json(const UserPrompt& p) {
    ordered_json j;
    j["id"] = p.id;
    j["text"] = p.text;
    j["language"] = to_string(p.language);
    if (p.category) j["category"] = *p.category;
    else j["category"] = nullptr;
    return j;
}

inline ordered_json to_json(const TextualTrace& t) {
    ordered_json j;
    j["query"] = t.query;
    j["evidence"] = ordered_json::array();
    for (const auto& e : t.evidence) {
        ordered_json je;
        je["title"] = e.title;
        je["url"] = e.url;
        je["summary"] = e.summary;
        j["evidence"].push_back(je);
    }
    return j;
}

inline ordered_json to_json(const VisualTrace& v) {
    ordered_json j;
    j["query"] = v.query;
    j["candidates"] = ordered_json::array();
    for (const auto& c : v.candidates) {
        ordered_json jc;
        jc["id"] = c.id;
        jc["url"] = c.url;
        jc["aggregate"] = c.aggregate;
        jc["rejected"] = c.rejected;
        jc["reject_reason"] = c.reject_reason;
        j["candidates"].push_back(jc);
    }
    j["selected"] = v.selected;
    return j;
}

inline ordered_json to_json(const Recaption& r) {
    ordered_json j;
    j["think"] = r.think;
    j["body"] = r.body;
    j["references_used"] = std::vector<std::string>(r.references_used.begin(), r.references_used.end());
    j["language"] = to_string(r.language);
    return j;
}

inline ordered_json to_json(const SftRecord& r) {
    ordered_json j;
    j["prompt"] = to_json(r.prompt);
    j["textual"] = to_json(r.textual);
    j["visual"] = to_json(r.visual);
    j["recaption"] = to_json(r.recaption);
    if (r.image_ref) j["image_ref"] = *r.image_ref;
    else j["image_ref"] = nullptr;
    j["verified"] = r.verified;
    j["trials_used"] = r.trials_used;
    return j;
}

inline Language language_from_json(const ordered_json& j, const char* ctx) {
    auto l = language_from_string(j.get<std::string>());
    if (!l) throw std::invalid_argument(std::string(ctx) + ": unknown language");
    return *l;
}

inline UserPrompt prompt_from_json(const ordered_json& j) {
    UserPrompt p;
    p.id = j.at("id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    p.language = language_from_json(j.at("language"), "prompt.language");
    if (j.contains("category") && !j.at("category").is_null())
        p.category = j.at("category").get<std::string>();
    return p;
}

inline TextualTrace textual_from_json(const ordered_json& j) {
    TextualTrace t;
    t.query = j.at("query").get<std::string>();
    for (const auto& je : j.at("evidence")) {
        t.evidence.push_back({je.at("title").get<std::string>(), je.at("url").get<std::string>(),
                              je.at("summary").get<std::string>()});
    }
    return t;
}

inline VisualTrace visual_from_json(const ordered_json& j) {
    VisualTrace v;
    v.query = j.at("query").get<std::string>();
    for (const auto& jc : j.at("candidates")) {
        CandidateScore c;
        c.id = jc.at("id").get<int>();
        c.url = jc.at("url").get<std::string>();
        c.aggregate = jc.at("aggregate").get<double>();
        c.rejected = jc.at("rejected").get<bool>();
        c.reject_reason = jc.at("reject_reason").get<std::string>();
        v.candidates.push_back(c);
    }
    v.selected = j.at("selected").get<std::vector<int>>();
    return v;
}

inline Recaption recaption_from_json(const ordered_json& j) {
    Recaption r;
    r.think = j.at("think").get<std::string>();
    r.body = j.at("body").get<std::string>();
    for (const auto& ref : j.at("references_used")) r.references_used.insert(ref.get<std::string>());
    r.language = language_from_json(j.at("language"), "recaption.language");
    return r;
}

inline SftRecord record_from_json(const ordered_json& j) {
    SftRecord r;
    r.prompt = prompt_from_json(j.at("prompt"));
    r.textual = textual_from_json(j.at("textual"));
    r.visual = visual_from_json(j.at("visual"));
    r.recaption = recaption_from_json(j.at("recaption"));
    if (!j.at("image_ref").is_null()) r.image_ref = j.at("image_ref").get<std::string>();
    r.verified = j.at("verified").get<bool>();
    r.trials_used = j.at("trials_used").get<int>();
    return r;
}

// ---- validation ----

constexpr int kMaxVerifyTrials = 5;

inline std::vector<Violation> validate_record(const SftRecord& r) {
    std::vector<Violation> out;
    if (r.prompt.text.empty()) out.push_back({"prompt.text", "must be non-empty"});
    if (!r.textual.evidence.empty() && r.textual.query.empty())
        out.push_back({"textual.query", "must be non-empty when evidence is present"});

    if (r.visual.selected.size() > 2)
        out.push_back({"visual.selected", "at most 2 candidates may be selected"});
    for (int id : r.visual.selected) {
        bool found = std::any_of(r.visual.candidates.begin(), r.visual.candidates.end(),
                                 [&](const CandidateScore& c) { return c.id == id; });
        if (!found)
            out.push_back({"visual.selected", "selected id " + std::to_string(id) +
                                                  " not present in candidates"});
    }
    // Selected must be the surviving candidates ranked by (-aggregate, id).
    {
        std::vector<CandidateScore> surv;
        for (const auto& c : r.visual.candidates)
            if (!c.rejected) surv.push_back(c);
        std::stable_sort(surv.begin(), surv.end(), [](const auto& a, const auto& b) {
            if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
            return a.id < b.id;
        });
        std::vector<int> expect;
        for (size_t i = 0; i < surv.size() && i < 2; ++i) expect.push_back(surv[i].id);
        if (!r.visual.candidates.empty() && r.visual.selected != expect)
            out.push_back({"visual.selected", "selection does not match top-2 ranking rule"});
    }

    if (r.recaption.body.empty()) out.push_back({"recaption.body", "must be non-empty"});
    for (const auto& ref : r.recaption.references_used)
        if (ref != "image_1" && ref != "image_2")
            out.push_back({"recaption.references_used", "unknown reference token: " + ref});
    if (r.recaption.language != r.prompt.language)
        out.push_back({"recaption.language", "must equal prompt language"});

    if (r.verified && !r.image_ref)
        out.push_back({"image_ref", "verified record must carry an image reference"});
    if (r.trials_used < 1)
        out.push_back({"trials_used", "must be at least 1"});
    if (r.trials_used > kMaxVerifyTrials)
        out.push_back({"trials_used", "exceeds the 5-trial cap"});
    return out;
}

// ---- JSONL streaming ----

inline size_t write_records(const std::vector<SftRecord>& records, std::ostream& sink) {
    for (const auto& r : records) sink << to_json(r).dump() << '\n';
    return records.size();
}

inline std::vector<SftRecord> read_records(std::istream& source) {
    std::vector<SftRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(lineno, "malformed JSON object");
        try {
            out.push_back(record_from_json(j));
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return out;
}

}  // namespace wga::core
