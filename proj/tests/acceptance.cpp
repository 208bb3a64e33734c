// Acceptance gate: one check per shipped guarantee, one PASS/FAIL line
// each, nonzero exit when anything fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "wga/backend/mock_backend.hpp"
#include "wga/core/records.hpp"
#include "wga/eval/scoring.hpp"
#include "wga/pipeline/pipeline.hpp"
#include "wga/rank/ranker.hpp"
#include "wga/tag/tool_call.hpp"
#include "wga/tag/verdicts.hpp"
#include "wga/train/flow.hpp"
#include "wga/train/mask.hpp"
#include "wga/train/packing.hpp"
#include "wga/util/atomic_file.hpp"

namespace fs = std::filesystem;
using namespace wga;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " [" << criterion << "] " << name;
    if (!ok && !detail.empty()) std::cout << " — " << detail;
    std::cout << "\n";
    if (!ok) ++g_failures;
}

#define REQUIRE_OR_RETURN(cond, msg)      \
    do {                                  \
        if (!(cond)) {                    \
            detail = (msg);               \
            return false;                 \
        }                                 \
    } while (0)

// ---- shared pipeline harness over scripted mocks ----

struct MemoryProvider : search::SearchProvider {
    std::vector<search::TextHit> hits;
    std::vector<search::ImageCandidate> candidates;

    std::vector<search::TextHit> text_search(const std::string&, const std::string&,
                                             int top_k) override {
        return {hits.begin(), hits.begin() + std::min<size_t>(hits.size(), top_k)};
    }
    std::vector<search::ImageCandidate> image_search(const std::string&, const std::string&,
                                                     int num, const std::string&) override {
        return {candidates.begin(),
                candidates.begin() + std::min<size_t>(candidates.size(), num)};
    }
};

struct Harness {
    backend::MockBackend chat, judge, imagegen;
    MemoryProvider provider;
    backend::ImageStore store;

    Harness(const std::string& gap_unit, const std::string& summary_text,
            const std::string& recaption_body) {
        provider.hits = {{"title", "https://example.org/a", "snippet", std::nullopt}};
        for (int i = 0; i < 3; ++i) {
            search::ImageCandidate c;
            c.id = i;
            c.url = "https://img/" + std::to_string(i);
            c.bytes = "CANDIDATE-" + std::to_string(i);
            provider.candidates.push_back(c);
        }
        chat.add_rule({"Decide whether faithful generation requires",
                       "<think>lookup</think>\n<response>[\"" + gap_unit + "\"]</response>"});
        chat.add_rule({"Formulate one text_search tool call",
                       "<tool_call>{\"name\": \"text_search\", \"arguments\": {\"q\": "
                       "\"subject\"}}</tool_call>"});
        chat.add_rule({"Based on the following webpage content",
                       "<think>facts</think>\n<response>" + summary_text + "</response>"});
        chat.add_rule({"Formulate one search_image tool call",
                       "<tool_call>{\"name\": \"search_image\", \"arguments\": {\"q\": \"subject "
                       "art\"}}</tool_call>"});
        chat.add_rule({"You are a professional visual language reasoning assistant",
                       "<think>fuse</think>\n<recaption>" + recaption_body + "</recaption>"});
        judge.add_rule({"Please evaluate the provided image", R"({"score": 7, "reason": "ok"})",
                        false, 1, 0});
        judge.add_rule({"Please evaluate the provided image", R"({"score": 9, "reason": "ok"})",
                        false, 1, 0});
        judge.add_rule({"Please evaluate the provided image", R"({"score": 8, "reason": "ok"})",
                        false, 1, 0});
    }

    pipeline::PipelineConfig config() {
        pipeline::PipelineConfig pc;
        pc.chat = &chat;
        pc.judge = &judge;
        pc.imagegen = &imagegen;
        pc.text_provider = &provider;
        pc.image_provider = &provider;
        pc.store = &store;
        return pc;
    }
};

const char* kBody =
    "A subject on a plain stage. Pose from image_1, palette from image_2. "
    "Preserved from image_1: pose. Preserved from image_2: palette.";

// ---- criteria ----

bool criterion1(std::string& detail) {
    std::string wire =
        R"(<tool_call>{"name": "text_search", "arguments": {"q": "search query", "hl": "zh", "top_k": 5}}</tool_call>)";
    auto call = tag::parse_tool_call(wire);
    REQUIRE_OR_RETURN(call.name == tag::ToolName::text_search, "tool name mismatch");
    REQUIRE_OR_RETURN(call.q == "search query", "q mismatch");
    REQUIRE_OR_RETURN(call.hl_or_default() == "zh", "hl mismatch");
    REQUIRE_OR_RETURN(call.top_k_or_default() == 5, "top_k mismatch");
    auto again = tag::parse_tool_call(tag::render_tool_call(call));
    REQUIRE_OR_RETURN(again == call, "round-trip inequality");

    auto s = tag::parse_eval_scores(
        "{\"clarity\": 7, \"content_quality\": 8, \"aesthetics\": 7,\n"
        " \"text_relevance_ip\": 8,\n"
        " \"rationale\": \"Evidence 1; Evidence 2\"}");
    REQUIRE_OR_RETURN(s.clarity == 7 && s.content_quality == 8 && s.aesthetics == 7 &&
                          s.text_relevance_ip == 8 && s.rationale == "Evidence 1; Evidence 2",
                      "eval scores mismatch");
    return true;
}

bool criterion2(std::string& detail) {
    eval::FactIpWeights w;
    REQUIRE_OR_RETURN(eval::factip_item_score({10, 10, 10, 10, "r"}, w) == 100.0,
                      "all-10 is not exactly 100");
    REQUIRE_OR_RETURN(std::abs(eval::factip_item_score({9, 8, 7, 8, "r"}, w) - 79.5) <= 1e-9,
                      "(9,8,7,8) not 79.5");
    eval::FactIpWeights bad{0.05, 0.10, 0.10, 0.74};
    try {
        bad.validate();
        detail = "0.99 weight sum accepted";
        return false;
    } catch (const std::invalid_argument&) {
    }
    return true;
}

bool criterion3(std::string& detail) {
    auto taxonomy = eval::default_taxonomy();
    REQUIRE_OR_RETURN(taxonomy.category_total(eval::Category::Character) == 1500,
                      "Character total != 1500");
    REQUIRE_OR_RETURN(taxonomy.category_total(eval::Category::Object) == 615,
                      "Object total != 615");
    REQUIRE_OR_RETURN(taxonomy.category_total(eval::Category::Scene) == 347,
                      "Scene total != 347");
    REQUIRE_OR_RETURN(taxonomy.total() == 2462, "grand total != 2462");

    std::vector<std::string> subcats;
    for (const auto& [k, _] : taxonomy.entries) subcats.push_back(k);
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> score(0.0, 100.0);
    std::uniform_int_distribution<size_t> pick(0, subcats.size() - 1);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::pair<std::string, double>> items;
        for (int i = 0; i < 24; ++i) items.emplace_back(subcats[pick(rng)], score(rng));
        auto agg = eval::factip_aggregate(items, taxonomy);
        // Brute-force oracle: recompute every mean from scratch.
        std::map<eval::Category, std::pair<double, int>> cat;
        double onum = 0.0;
        int oden = 0;
        for (const auto& [sub, mean] : agg.subcategory_means) {
            double s = 0.0;
            int c = 0;
            for (const auto& [isub, v] : items)
                if (isub == sub) {
                    s += v;
                    ++c;
                }
            if (std::abs(mean - s / c) > 1e-9) {
                detail = "subcategory mean drift";
                return false;
            }
            const auto& [category, count] = taxonomy.entries.at(sub);
            cat[category].first += mean * count;
            cat[category].second += count;
            onum += mean * count;
            oden += count;
        }
        for (const auto& [c, acc] : cat) {
            if (std::abs(agg.category_means.at(eval::to_string(c)) - acc.first / acc.second) >
                1e-9) {
                detail = "category weighted mean drift";
                return false;
            }
        }
        if (std::abs(agg.overall - onum / oden) > 1e-9) {
            detail = "overall weighted mean drift";
            return false;
        }
    }
    return true;
}

bool criterion4(std::string& detail) {
    auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    REQUIRE_OR_RETURN(round2(eval::kitten_aggregate({{4.17, 2.83}}).all) == 3.50,
                      "(4.17,2.83) All != 3.50");
    REQUIRE_OR_RETURN(round2(eval::kitten_aggregate({{3.44, 2.64}}).all) == 3.04,
                      "(3.44,2.64) All != 3.04");
    return true;
}

bool criterion5(std::string& detail) {
    for (int bits = 0; bits < 16; ++bits) {
        eval::ConceptBinary c{(bits >> 3) & 1, (bits >> 2) & 1, (bits >> 1) & 1, bits & 1};
        double expect = (c.shape + c.color + c.texture + c.feature) / 4.0;
        REQUIRE_OR_RETURN(eval::concept_factuality({c}) == expect, "concept_factuality drift");
        REQUIRE_OR_RETURN(eval::composition_factuality(c.shape, c.color, c.texture, c.feature) ==
                              expect,
                          "composition_factuality drift");
    }
    return true;
}

bool criterion6(std::string& detail) {
    {
        rank::ScoredCandidate a, b, c;
        a.candidate.id = 0;
        a.aggregate = 8.0;
        b.candidate.id = 1;
        b.aggregate = 9.0;
        c.candidate.id = 2;
        c.aggregate = 8.0;
        REQUIRE_OR_RETURN(rank::select_top2({a, b, c}) == std::vector<int>({1, 0}),
                          "tie example mismatch");
    }
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> n(0, 10);
    std::uniform_int_distribution<int> score(0, 10);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<rank::ScoredCandidate> cands;
        int k = n(rng);
        for (int i = 0; i < k; ++i) {
            rank::ScoredCandidate c;
            c.candidate.id = i;
            c.aggregate = score(rng);
            c.rejected = coin(rng) == 0;
            cands.push_back(c);
        }
        std::vector<std::pair<double, int>> keys;
        for (const auto& c : cands)
            if (!c.rejected) keys.emplace_back(-c.aggregate, c.candidate.id);
        std::sort(keys.begin(), keys.end());
        std::vector<int> oracle;
        for (size_t i = 0; i < keys.size() && i < 2; ++i) oracle.push_back(keys[i].second);
        if (rank::select_top2(cands) != oracle) {
            detail = "oracle mismatch at trial " + std::to_string(trial);
            return false;
        }
    }
    return true;
}

bool criterion7(std::string& detail) {
    const std::string fail_json =
        R"({"clarity": 7, "content_quality": 5, "aesthetics": 6,
            "text_relevance_ip": 2, "rationale": "identity lost; palette off"})";
    const std::string pass_json =
        R"({"clarity": 8, "content_quality": 8, "aesthetics": 8,
            "text_relevance_ip": 8, "rationale": "identity held; clean"})";

    for (auto [fails, expect_discard, expect_trials] :
         {std::tuple{0, false, 1}, std::tuple{2, false, 3}, std::tuple{5, true, 5}}) {
        Harness h("official design", "Plain summary.", kBody);
        if (fails > 0)
            h.judge.add_rule({"You are an image evaluation assistant", fail_json, false, fails, 0});
        h.judge.add_rule({"You are an image evaluation assistant", pass_json});
        auto cfg = h.config();
        auto t = pipeline::run_trajectory({"p", "Subject", core::Language::en, std::nullopt}, cfg);
        if (t.failed) {
            detail = "trajectory failed: " + t.failure_reason;
            return false;
        }
        auto outcome =
            pipeline::verify_and_resample(t, cfg, h.store.put("GT1"), h.store.put("GT2"));
        size_t attempts = h.imagegen.generate_log().size();
        REQUIRE_OR_RETURN(attempts <= 5, "more than 5 generation attempts");
        if (expect_discard) {
            REQUIRE_OR_RETURN(std::holds_alternative<pipeline::Discarded>(outcome),
                              "expected a discard after 5 failures");
        } else {
            auto* rec = std::get_if<core::SftRecord>(&outcome);
            REQUIRE_OR_RETURN(rec != nullptr, "expected a verified record");
            REQUIRE_OR_RETURN(rec->trials_used == expect_trials,
                              "trials_used != " + std::to_string(expect_trials));
        }
    }
    return true;
}

bool criterion8(std::string& detail) {
    {
        train::PackedSequence pack;
        pack.segments = {{train::SegmentKind::DialogText, 2, "s0", false, {}},
                         {train::SegmentKind::RefImage, 2, "s0", false, {}},
                         {train::SegmentKind::RecaptionText, 2, "s0", true, {}},
                         {train::SegmentKind::GenLatent, 2, "s0", false, {}}};
        pack.total_tokens = 8;
        auto mask = train::build_hybrid_mask(pack);
        std::set<int> row;
        for (int j = 0; j < 8; ++j)
            if (mask.at(6, j)) row.insert(j);
        REQUIRE_OR_RETURN(row == std::set<int>({2, 3, 4, 5, 6, 7}),
                          "worked-example GenLatent row mismatch");
    }
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> nsamples(1, 3);
    std::uniform_int_distribution<int> len(1, 5);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        train::PackedSequence pack;
        int ns = nsamples(rng);
        for (int s = 0; s < ns; ++s) {
            std::string id = "s" + std::to_string(s);
            pack.segments.push_back({train::SegmentKind::DialogText, len(rng), id, false, {}});
            if (coin(rng))
                pack.segments.push_back({train::SegmentKind::RefImage, len(rng), id, false, {}});
            pack.segments.push_back({train::SegmentKind::RecaptionText, len(rng), id, true, {}});
            if (coin(rng))
                pack.segments.push_back({train::SegmentKind::GenLatent, len(rng), id, false, {}});
        }
        for (const auto& s : pack.segments) pack.total_tokens += s.token_count;
        auto mask = train::build_hybrid_mask(pack);
        std::vector<train::SegmentKind> kinds;
        std::vector<std::string> samples;
        for (const auto& s : pack.segments)
            for (int i = 0; i < s.token_count; ++i) {
                kinds.push_back(s.kind);
                samples.push_back(s.sample_id);
            }
        for (int i = 0; i < mask.n; ++i)
            for (int j = 0; j < mask.n; ++j) {
                if (samples[i] != samples[j] && mask.at(i, j)) {
                    detail = "cross-sample attention bit";
                    return false;
                }
                if (kinds[i] == train::SegmentKind::GenLatent &&
                    kinds[j] == train::SegmentKind::DialogText && mask.at(i, j)) {
                    detail = "generation token attends to dialog";
                    return false;
                }
            }
    }
    return true;
}

bool criterion9(std::string& detail) {
    auto packs = train::pack_sequences(
        {{"a", 30000}, {"b", 15000}, {"c", 10000}, {"d", 40000}}, 41520);
    REQUIRE_OR_RETURN(packs.size() == 3, "pack count mismatch");
    REQUIRE_OR_RETURN(packs[0].items.size() == 1 && packs[0].items[0].sample_id == "d",
                      "pack 1 mismatch");
    REQUIRE_OR_RETURN(packs[1].items.size() == 2 && packs[1].items[0].sample_id == "a" &&
                          packs[1].items[1].sample_id == "c",
                      "pack 2 mismatch");
    REQUIRE_OR_RETURN(packs[2].items.size() == 1 && packs[2].items[0].sample_id == "b",
                      "pack 3 mismatch");

    std::mt19937 rng(55);
    std::uniform_int_distribution<int> n(1, 12);
    std::uniform_int_distribution<int> cost(1, train::kMaxPackedTokensHardLimit);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<train::PackItem> items;
        int k = n(rng);
        std::multiset<std::string> in_ids;
        for (int i = 0; i < k; ++i) {
            items.push_back({"s" + std::to_string(i), cost(rng)});
            in_ids.insert(items.back().sample_id);
        }
        auto out = train::pack_sequences(items, train::kMaxPackedTokensHardLimit);
        std::multiset<std::string> out_ids;
        for (const auto& p : out) {
            if (p.total_tokens > train::kMaxPackedTokensHardLimit) {
                detail = "pack over the hard limit";
                return false;
            }
            for (const auto& it : p.items) out_ids.insert(it.sample_id);
        }
        if (out_ids != in_ids) {
            detail = "item multiset not preserved";
            return false;
        }
    }
    return true;
}

bool criterion10(std::string& detail) {
    std::vector<double> clean = {0.25, -1.5, 3.0}, noise = {1.0, 0.5, -2.0};
    REQUIRE_OR_RETURN(train::flow_interpolate_and_target(clean, noise, 0.0).z_t == clean,
                      "z_0 != clean");
    REQUIRE_OR_RETURN(train::flow_interpolate_and_target(clean, noise, 1.0).z_t == noise,
                      "z_1 != noise");

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    std::uniform_real_distribution<double> tdist(0.0, 0.9);
    std::uniform_real_distribution<double> hdist(1e-3, 0.1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> c(6), e(6);
        for (auto& v : c) v = val(rng);
        for (auto& v : e) v = val(rng);
        double t = tdist(rng), h = hdist(rng);
        auto a = train::flow_interpolate_and_target(c, e, t);
        auto b = train::flow_interpolate_and_target(c, e, t + h);
        for (size_t i = 0; i < c.size(); ++i)
            if (std::abs((b.z_t[i] - a.z_t[i]) / h - a.u_star[i]) > 1e-9) {
                detail = "finite-difference velocity drift";
                return false;
            }
    }
    double nll = train::weighted_nll(std::vector<double>{1.0, 0.5}, std::vector<double>{1.0, 3.0});
    REQUIRE_OR_RETURN(std::abs(nll - 3.0 * std::log(2.0) / 4.0) <= 1e-12,
                      "weighted NLL example drift");
    return true;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(WGA_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool criterion11(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    auto dir = fs::temp_directory_path() / "wga_acceptance_run";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string data = WGA_TEST_DATA_DIR;

    {
        std::ofstream p(dir / "prompts.jsonl");
        p << R"({"id": "p1", "text": "Pixel the Fox mascot", "language": "en"})" << "\n";
    }
    std::string run_base = "agent-run --input " + (dir / "prompts.jsonl").string() +
                           " --mock-dir " + data + "/mock_run --output ";
    REQUIRE_OR_RETURN(run_cli(run_base + (dir / "log1.jsonl").string()) == 0, "agent-run failed");
    REQUIRE_OR_RETURN(run_cli(run_base + (dir / "log2.jsonl").string()) == 0, "agent-run failed");
    REQUIRE_OR_RETURN(util::read_file(dir / "log1.jsonl") == util::read_file(dir / "log2.jsonl"),
                      "trajectory logs differ between runs");
    REQUIRE_OR_RETURN(!util::read_file(dir / "log1.jsonl").empty(), "empty trajectory log");

    {
        std::ofstream p(dir / "build.jsonl");
        for (const char* text : {"Nova Lynx mascot portrait", "Orbit Owl mascot portrait",
                                 "Quill Panda mascot portrait"}) {
            nlohmann::ordered_json j;
            j["id"] = text;
            j["text"] = text;
            j["language"] = "en";
            j["gt1_path"] = data + "/gt/gt1.bin";
            j["gt2_path"] = data + "/gt/gt2.bin";
            p << j.dump() << "\n";
        }
    }
    std::string build_base = "data-build --input " + (dir / "build.jsonl").string() +
                             " --mock-dir " + data + "/mock_build --output ";
    REQUIRE_OR_RETURN(run_cli(build_base + (dir / "rec1.jsonl").string()) == 0,
                      "data-build failed");
    REQUIRE_OR_RETURN(run_cli(build_base + (dir / "rec2.jsonl").string()) == 0,
                      "data-build failed");
    REQUIRE_OR_RETURN(util::read_file(dir / "rec1.jsonl") == util::read_file(dir / "rec2.jsonl"),
                      "SFT records differ between runs");
    REQUIRE_OR_RETURN(
        util::read_file((dir / "rec1.jsonl").string() + ".discards.jsonl") ==
            util::read_file((dir / "rec2.jsonl").string() + ".discards.jsonl"),
        "discard logs differ between runs");

    auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    fs::remove_all(dir);
    REQUIRE_OR_RETURN(elapsed < 60, "mock pipeline exceeded 60 seconds");
    return true;
}

bool criterion12(std::string& detail) {
    std::mt19937 rng(123);
    std::uniform_int_distribution<int> tag(100000, 999999);
    for (int trial = 0; trial < 100; ++trial) {
        std::string p = "PROMPTMARK" + std::to_string(tag(rng));
        std::string g = "GAPMARK" + std::to_string(tag(rng));
        std::string e = "EVIDMARK" + std::to_string(tag(rng));
        std::string b = "BODYMARK" + std::to_string(tag(rng)) +
                        " scene with image_1 and image_2. Preserved from image_1: pose. "
                        "Preserved from image_2: palette.";
        Harness h(g, "Summary " + e + ".", b);
        auto cfg = h.config();
        auto t = pipeline::run_trajectory({"p", p + " figure", core::Language::en, std::nullopt},
                                          cfg);
        if (t.failed) {
            detail = "trajectory failed: " + t.failure_reason;
            return false;
        }
        if (h.imagegen.generate_log().size() != 1) {
            detail = "unexpected generation count";
            return false;
        }
        const auto& req = h.imagegen.generate_log()[0];
        REQUIRE_OR_RETURN(req.caption == t.recaption.body, "caption differs from recaption body");
        REQUIRE_OR_RETURN(req.reference_images == t.selected_handles,
                          "references differ from selected handles");
        REQUIRE_OR_RETURN(req.reference_images.size() <= 2, "too many references");
        REQUIRE_OR_RETURN(req.caption.find(p) == std::string::npos,
                          "prompt text leaked into the generation request");
        REQUIRE_OR_RETURN(req.caption.find(g) == std::string::npos,
                          "gap content leaked into the generation request");
        REQUIRE_OR_RETURN(req.caption.find(e) == std::string::npos,
                          "textual evidence leaked into the generation request");
    }
    return true;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        bool (*fn)(std::string&);
    };
    const Entry entries[] = {
        {1, "wire-format fidelity", criterion1},
        {2, "weighted item-score formula", criterion2},
        {3, "taxonomy totals and aggregation oracle", criterion3},
        {4, "published All-column reproduction", criterion4},
        {5, "binary factuality formulas (exhaustive)", criterion5},
        {6, "top-2 selection vs full-sort oracle", criterion6},
        {7, "reject-sampling trial contract", criterion7},
        {8, "hybrid-mask invariants", criterion8},
        {9, "first-fit-decreasing packing", criterion9},
        {10, "rectified-flow and weighted-NLL math", criterion10},
        {11, "end-to-end determinism under mocks", criterion11},
        {12, "generation-conditioning independence", criterion12},
    };
    for (const auto& e : entries) {
        std::string detail;
        bool ok = false;
        try {
            ok = e.fn(detail);
        } catch (const std::exception& ex) {
            detail = std::string("exception: ") + ex.what();
        }
        report(e.id, e.name, ok, detail);
    }
    if (g_failures) std::cout << g_failures << " criterion(s) failed\n";
    else std::cout << "all 12 criteria passed\n";
    return g_failures == 0 ? 0 : 1;
}
