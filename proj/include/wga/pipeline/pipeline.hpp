#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wga/backend/backend.hpp"
#include "wga/core/records.hpp"
#include "wga/core/types.hpp"
#include "wga/pipeline/prompts.hpp"
#include "wga/rank/ranker.hpp"
#include "wga/search/search.hpp"
#include "wga/tag/blocks.hpp"
#include "wga/tag/tool_call.hpp"
#include "wga/tag/verdicts.hpp"
#include "wga/util/hash.hpp"

namespace wga::pipeline {

struct PipelineError : std::runtime_error {
    std::string stage;
    std::string raw_text;
    PipelineError(std::string stage_, const std::string& what_, std::string raw = "")
        : std::runtime_error(stage_ + ": " + what_), stage(std::move(stage_)),
          raw_text(std::move(raw)) {}
};

struct PipelineConfig {
    backend::Backend* chat = nullptr;
    backend::Backend* judge = nullptr;
    backend::Backend* imagegen = nullptr;
    search::SearchProvider* text_provider = nullptr;
    search::SearchProvider* image_provider = nullptr;
    backend::ImageStore* store = nullptr;

    rank::RankerConfig ranker;
    int max_verify_trials = 5;
    bool skip_research_when_gap_empty = true;
    double verify_pass_bar = 6.0;  // minimum text_relevance_ip for acceptance
    std::optional<std::int64_t> seed = 0;
    int image_width = 1024;
    int image_height = 1024;

    void validate() const {
        if (!chat || !judge || !imagegen || !store)
            throw std::invalid_argument("pipeline config: missing backend or store");
        if (max_verify_trials < 1)
            throw std::invalid_argument("pipeline config: max_verify_trials must be >= 1");
    }
};

struct StageLogEntry {
    std::string stage;
    int step = 0;  // logical tick; monotone within one trajectory
    std::string digest;

    bool operator==(const StageLogEntry&) const = default;
};

struct Trajectory {
    core::UserPrompt prompt;
    core::GapAssessment gap;
    core::TextualTrace textual;
    core::VisualTrace visual;
    core::Recaption recaption;
    std::optional<std::string> image_ref;
    std::vector<std::string> selected_handles;  // content hashes of the selected references
    std::vector<StageLogEntry> stage_log;
    bool low_evidence = false;
    bool failed = false;
    std::string failed_stage;
    std::string failure_reason;
};

inline void log_stage(Trajectory& t, const std::string& stage, const std::string& material) {
    t.stage_log.push_back({stage, static_cast<int>(t.stage_log.size()), util::content_hash(material)});
}

// ---- Think ----

inline core::GapAssessment detect_gap(const PipelineConfig& config,
                                      const core::UserPrompt& prompt) {
    backend::ChatRequest req;
    req.seed = config.seed;
    req.turns.push_back(
        {"user", prompts::replace_all(prompts::kThinkTemplate, "image_prompt", prompt.text), {}});
    std::string raw = config.chat->chat_complete(req);

    core::GapAssessment gap;
    try {
        auto blocks = tag::extract_tagged_blocks(raw, {tag::Tag::think, tag::Tag::response});
        for (const auto& b : blocks)
            if (b.tag == tag::Tag::think) gap.raw_reasoning = b.content;
        const auto& resp = tag::require_block(blocks, tag::Tag::response);
        auto arr = nlohmann::json::parse(resp.content);
        if (!arr.is_array()) throw std::invalid_argument("response is not a JSON array");
        for (const auto& u : arr) gap.missing_units.push_back(u.get<std::string>());
    } catch (const std::exception& e) {
        throw PipelineError("Think", e.what(), raw);
    }
    gap.needs_research = !gap.missing_units.empty();
    return gap;
}

inline std::string join_units(const std::vector<std::string>& units) {
    std::string out;
    for (size_t i = 0; i < units.size(); ++i) {
        if (i) out += ", ";
        out += units[i];
    }
    return out;
}

inline std::string render_textual_evidence(const core::TextualTrace& trace) {
    std::string out;
    for (const auto& e : trace.evidence)
        out += "- " + e.title + " (" + e.url + "): " + e.summary + "\n";
    return out;
}

// ---- Research: textual then visual ----

inline core::TextualTrace acquire_text_evidence(const PipelineConfig& config,
                                                const core::UserPrompt& prompt,
                                                const core::GapAssessment& gap) {
    if (!gap.needs_research)
        throw PipelineError("Research-Text", "precondition violated: gap is empty");

    backend::ChatRequest req;
    req.seed = config.seed;
    std::string tmpl = prompts::replace_all(prompts::kTextQueryTemplate, "image_prompt", prompt.text);
    tmpl = prompts::replace_all(tmpl, "missing_units", join_units(gap.missing_units));
    req.system = prompts::replace_all(
        prompts::replace_all(prompts::kResearchSystem, "image_prompt", prompt.text), "ip_name",
        prompt.text);
    req.turns.push_back({"user", tmpl, {}});
    std::string raw = config.chat->chat_complete(req);

    core::TextualTrace trace;
    tag::ToolCall call;
    try {
        call = tag::parse_tool_call(raw);
        if (call.name != tag::ToolName::text_search)
            throw std::invalid_argument("expected a text_search call");
    } catch (const std::exception& e) {
        throw PipelineError("Research-Text", e.what(), raw);
    }
    trace.query = call.q;

    auto outcome = search::text_search(*config.text_provider, call);
    // Tool errors are recorded, not fatal: the trace stays empty.
    if (outcome.ok()) {
        for (const auto& hit : outcome.results) {
            auto summary = search::summarize_page(*config.chat, call.q, hit.title, hit.snippet);
            trace.evidence.push_back({hit.title, hit.url, summary.value_or(hit.snippet)});
        }
    }
    return trace;
}

struct VisualResearchResult {
    core::VisualTrace trace;
    std::vector<std::string> selected_handles;
    bool low_evidence = false;
};

inline VisualResearchResult acquire_visual_evidence(const PipelineConfig& config,
                                                    const core::UserPrompt& prompt,
                                                    const core::GapAssessment& gap,
                                                    const core::TextualTrace& textual) {
    backend::ChatRequest req;
    req.seed = config.seed;
    std::string tmpl =
        prompts::replace_all(prompts::kVisualQueryTemplate, "image_prompt", prompt.text);
    tmpl = prompts::replace_all(tmpl, "missing_units", join_units(gap.missing_units));
    tmpl = prompts::replace_all(tmpl, "textual_evidence", render_textual_evidence(textual));
    req.turns.push_back({"user", tmpl, {}});
    std::string raw = config.chat->chat_complete(req);

    tag::ToolCall call;
    try {
        call = tag::parse_tool_call(raw);
        if (call.name != tag::ToolName::search_image)
            throw std::invalid_argument("expected a search_image call");
    } catch (const std::exception& e) {
        throw PipelineError("Research-Visual", e.what(), raw);
    }

    VisualResearchResult out;
    out.trace.query = call.q;
    auto outcome = search::search_image(*config.image_provider, call);
    if (!outcome.ok()) {
        out.low_evidence = true;
        return out;
    }

    std::vector<rank::ScoredCandidate> scored;
    for (const auto& cand : outcome.results) {
        backend::ChatRequest jreq;
        jreq.seed = config.seed;
        jreq.system = prompts::kJudgeSystem;
        backend::ChatTurn turn{"user",
                               prompts::replace_all(prompts::kJudgeQuestion, "ip_name", prompt.text),
                               {}};
        if (cand.bytes) turn.images.push_back(config.store->put(*cand.bytes));
        jreq.turns.push_back(turn);

        rank::ScoredCandidate sc;
        sc.candidate = cand;
        try {
            auto verdict = tag::parse_judge_verdict(config.judge->chat_complete(jreq));
            sc.single_score = verdict;
            auto res = rank::score_single(verdict, config.ranker.threshold);
            sc.aggregate = res.aggregate;
            sc.rejected = res.rejected;
            sc.reject_reason = res.reason;
        } catch (const backend::BackendError& e) {
            // Infrastructure failure: the whole stage fails; earlier stages
            // of the trajectory are preserved by the caller.
            throw PipelineError("Research-Visual", e.what());
        } catch (const std::exception& e) {
            sc.rejected = true;
            sc.reject_reason = std::string("judge-error: ") + e.what();
        }
        scored.push_back(std::move(sc));
    }

    auto selected = rank::select_top2(scored);
    for (const auto& sc : scored) {
        out.trace.candidates.push_back({sc.candidate.id, sc.candidate.url, sc.aggregate,
                                        sc.rejected, sc.reject_reason.value_or("")});
    }
    out.trace.selected = selected;
    if (selected.empty()) out.low_evidence = true;
    for (int id : selected) {
        for (const auto& sc : scored) {
            if (sc.candidate.id == id && sc.candidate.bytes)
                out.selected_handles.push_back(config.store->put(*sc.candidate.bytes));
        }
    }
    return out;
}

// ---- Recaption ----

inline bool contains_cjk(std::string_view s) {
    for (size_t i = 0; i + 2 < s.size() + 1; ++i) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if ((c & 0xF0) == 0xE0 && i + 2 < s.size()) {
            unsigned cp = ((c & 0x0F) << 12) |
                          ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                          (static_cast<unsigned char>(s[i + 2]) & 0x3F);
            if (cp >= 0x4E00 && cp <= 0x9FFF) return true;
        }
    }
    return false;
}

inline std::vector<std::string> find_vague_references(const std::string& body) {
    static const char* kPhrases[] = {"the first image", "the second image", "reference picture",
                                     "the reference image"};
    std::string lower;
    lower.reserve(body.size());
    for (char c : body) lower += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    std::vector<std::string> found;
    for (const char* p : kPhrases)
        if (lower.find(p) != std::string::npos) found.push_back(p);
    return found;
}

inline core::Recaption compose_recaption(const PipelineConfig& config,
                                         const core::UserPrompt& prompt,
                                         const core::GapAssessment& gap,
                                         const core::TextualTrace& textual,
                                         const std::vector<std::string>& selected_handles) {
    (void)gap;
    backend::ChatRequest req;
    req.seed = config.seed;
    std::string tmpl =
        prompts::replace_all(prompts::kRecaptionPrompt, "image_prompt", prompt.text);
    tmpl = prompts::replace_all(tmpl, "textual_evidence", render_textual_evidence(textual));
    backend::ChatTurn turn{"user", tmpl, {}};
    for (size_t i = 0; i < selected_handles.size() && i < 2; ++i)
        turn.images.push_back(selected_handles[i]);
    req.turns.push_back(turn);
    std::string raw = config.chat->chat_complete(req);

    core::Recaption recap;
    try {
        auto [think, body] = tag::parse_recaption_output(raw);
        recap.think = think;
        recap.body = body;
    } catch (const std::exception& e) {
        throw PipelineError("Recaption", e.what(), raw);
    }
    recap.language = prompt.language;
    if (recap.body.find("image_1") != std::string::npos) recap.references_used.insert("image_1");
    if (recap.body.find("image_2") != std::string::npos) recap.references_used.insert("image_2");

    auto vague = find_vague_references(recap.body);
    if (!vague.empty()) {
        std::string msg = "vague image references:";
        for (const auto& p : vague) msg += " \"" + p + "\"";
        throw PipelineError("Recaption", msg, raw);
    }
    if (prompt.language == core::Language::en && contains_cjk(recap.body))
        throw PipelineError("Recaption", "language-consistency: Chinese text in English recaption",
                            raw);
    if (prompt.language == core::Language::zh && !contains_cjk(recap.body))
        throw PipelineError("Recaption", "language-consistency: no Chinese text in zh recaption",
                            raw);
    return recap;
}

// ---- Generate ----

// The request carries only the recaption body and the selected reference
// handles; the prompt, gap and textual trace never reach the generator.
inline std::string synthesize_image(const PipelineConfig& config, const core::Recaption& recaption,
                                    const std::vector<std::string>& selected_handles) {
    if (recaption.body.empty())
        throw PipelineError("Generate", "precondition violated: empty recaption body");
    backend::GenerateImageRequest req;
    req.caption = recaption.body;
    for (size_t i = 0; i < selected_handles.size() && i < 2; ++i)
        req.reference_images.push_back(selected_handles[i]);
    req.width = config.image_width;
    req.height = config.image_height;
    req.seed = config.seed;
    std::string bytes;
    try {
        bytes = config.imagegen->generate_image(req);
    } catch (const std::exception& e) {
        throw PipelineError("Generate", e.what());
    }
    return config.store->put(bytes);
}

// ---- full run ----

inline Trajectory run_trajectory(const core::UserPrompt& prompt, const PipelineConfig& config) {
    config.validate();
    Trajectory t;
    t.prompt = prompt;
    try {
        t.gap = detect_gap(config, prompt);
        log_stage(t, "Think", t.gap.raw_reasoning + "|" + join_units(t.gap.missing_units));

        bool research = t.gap.needs_research || !config.skip_research_when_gap_empty;
        if (research && t.gap.needs_research) {
            t.textual = acquire_text_evidence(config, prompt, t.gap);
            log_stage(t, "Research-Text", t.textual.query + "|" + render_textual_evidence(t.textual));

            auto vis = acquire_visual_evidence(config, prompt, t.gap, t.textual);
            t.visual = vis.trace;
            t.selected_handles = vis.selected_handles;
            t.low_evidence = vis.low_evidence;
            std::string vmat = t.visual.query;
            for (int id : t.visual.selected) vmat += "#" + std::to_string(id);
            log_stage(t, "Research-Visual", vmat);
        }

        t.recaption = compose_recaption(config, prompt, t.gap, t.textual, t.selected_handles);
        log_stage(t, "Recaption", t.recaption.body);

        t.image_ref = synthesize_image(config, t.recaption, t.selected_handles);
        log_stage(t, "Generate", *t.image_ref);
    } catch (const PipelineError& e) {
        t.failed = true;
        t.failed_stage = e.stage;
        t.failure_reason = e.what();
    }
    return t;
}

// ---- reject-sampling verification ----

struct Discarded {
    int trials = 0;
    std::string reason;
};

using VerifyOutcome = std::variant<core::SftRecord, Discarded>;

inline tag::EvalScores judge_generated(const PipelineConfig& config,
                                       const core::UserPrompt& prompt,
                                       const std::string& generated_handle,
                                       const std::string& gt1_handle,
                                       const std::string& gt2_handle) {
    backend::ChatRequest req;
    req.seed = config.seed;
    backend::ChatTurn turn{
        "user", prompts::replace_all(prompts::kEvaluationPrompt, "image_prompt", prompt.text), {}};
    turn.images = {gt1_handle, gt2_handle, generated_handle};
    req.turns.push_back(turn);
    return tag::parse_eval_scores(config.judge->chat_complete(req));
}

// Generation-verified reject sampling: judge the synthesized image
// against ground truth; on failure re-run only recaption and generation
// (the research evidence is kept). The whole trajectory is dropped once
// the trial budget is exhausted.
inline VerifyOutcome verify_and_resample(Trajectory trajectory, const PipelineConfig& config,
                                         const std::string& gt1_handle,
                                         const std::string& gt2_handle) {
    if (gt1_handle.empty() || gt2_handle.empty())
        throw PipelineError("Verify", "precondition violated: missing ground-truth reference");
    if (trajectory.failed)
        throw PipelineError("Verify", "precondition violated: failed trajectory");

    for (int trial = 1; trial <= config.max_verify_trials; ++trial) {
        if (trial > 1) {
            trajectory.recaption = compose_recaption(config, trajectory.prompt, trajectory.gap,
                                                     trajectory.textual,
                                                     trajectory.selected_handles);
            trajectory.image_ref =
                synthesize_image(config, trajectory.recaption, trajectory.selected_handles);
        } else if (!trajectory.image_ref) {
            trajectory.image_ref =
                synthesize_image(config, trajectory.recaption, trajectory.selected_handles);
        }
        auto scores =
            judge_generated(config, trajectory.prompt, *trajectory.image_ref, gt1_handle, gt2_handle);
        if (scores.text_relevance_ip >= static_cast<int>(config.verify_pass_bar)) {
            core::SftRecord rec;
            rec.prompt = trajectory.prompt;
            rec.textual = trajectory.textual;
            rec.visual = trajectory.visual;
            rec.recaption = trajectory.recaption;
            rec.image_ref = trajectory.image_ref;
            rec.verified = true;
            rec.trials_used = trial;
            return rec;
        }
    }
    return Discarded{config.max_verify_trials, "identity verification failed in all trials"};
}

// ---- trajectory log serialization ----

inline nlohmann::ordered_json trajectory_to_json(const Trajectory& t) {
    nlohmann::ordered_json j;
    j["prompt"] = core::to_json(t.prompt);
    nlohmann::ordered_json jg;
    jg["needs_research"] = t.gap.needs_research;
    jg["missing_units"] = t.gap.missing_units;
    jg["raw_reasoning"] = t.gap.raw_reasoning;
    j["gap"] = jg;
    j["textual"] = core::to_json(t.textual);
    j["visual"] = core::to_json(t.visual);
    j["recaption"] = core::to_json(t.recaption);
    if (t.image_ref) j["image_ref"] = *t.image_ref;
    else j["image_ref"] = nullptr;
    j["stage_log"] = nlohmann::ordered_json::array();
    for (const auto& s : t.stage_log) {
        nlohmann::ordered_json js;
        js["stage"] = s.stage;
        js["step"] = s.step;
        js["digest"] = s.digest;
        j["stage_log"].push_back(js);
    }
    j["low_evidence"] = t.low_evidence;
    j["failed"] = t.failed;
    j["failed_stage"] = t.failed_stage;
    j["failure_reason"] = t.failure_reason;
    return j;
}

}  // namespace wga::pipeline
