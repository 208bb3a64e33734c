#pragma once

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "wga/backend/http_backend.hpp"
#include "wga/backend/mock_backend.hpp"
#include "wga/eval/scoring.hpp"
#include "wga/pipeline/pipeline.hpp"
#include "wga/search/http_provider.hpp"
#include "wga/search/search.hpp"
#include "wga/train/packing.hpp"

namespace wga::config {

struct BackendConfig {
    std::string mode = "mock";  // mock | http
    std::string url;
    std::string mock_script;  // path to a line-delimited {match, response} script
};

struct ProviderConfig {
    std::string mode = "fixture";  // fixture | live
    std::string fixture_dir;
    std::string url;
};

struct Config {
    BackendConfig chat, judge, imagegen;
    ProviderConfig text_provider, image_provider;
    rank::RankerConfig ranker;

    int max_verify_trials = 5;
    bool skip_research_when_gap_empty = true;
    double verify_pass_bar = 6.0;
    std::int64_t seed = 0;
    int parallelism = 1;

    int max_tokens_per_sample = train::kMaxTokensPerSample;
    int expected_tokens_per_batch = train::kExpectedTokensPerBatch;
    int max_packed_tokens_hard_limit = train::kMaxPackedTokensHardLimit;
    double ce_weight = train::kCeWeight;
    double mse_weight = train::kMseWeight;
    double special_token_ce_weight = train::kSpecialTokenCeWeight;

    eval::FactIpWeights factip_weights;
    eval::WiseWeights wise_weights;

    std::string image_dir;  // content-addressed sidecar directory
    bool strict_json = false;
};

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

inline BackendConfig backend_from_json(const nlohmann::json& j) {
    BackendConfig b;
    b.mode = j.value("mode", "mock");
    b.url = j.value("url", "");
    b.mock_script = j.value("mock_script", "");
    return b;
}

inline ProviderConfig provider_from_json(const nlohmann::json& j) {
    ProviderConfig p;
    p.mode = j.value("mode", "fixture");
    p.fixture_dir = j.value("fixture_dir", "");
    p.url = j.value("url", "");
    return p;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in);

    Config c;
    if (j.contains("backends")) {
        const auto& jb = j["backends"];
        if (jb.contains("chat")) c.chat = backend_from_json(jb["chat"]);
        if (jb.contains("judge")) c.judge = backend_from_json(jb["judge"]);
        if (jb.contains("imagegen")) c.imagegen = backend_from_json(jb["imagegen"]);
    }
    if (j.contains("providers")) {
        const auto& jp = j["providers"];
        if (jp.contains("text")) c.text_provider = provider_from_json(jp["text"]);
        if (jp.contains("image")) c.image_provider = provider_from_json(jp["image"]);
    }
    if (j.contains("ranker")) {
        const auto& jr = j["ranker"];
        std::string mode = jr.value("mode", "single");
        c.ranker.mode = mode == "dimensional" ? rank::ScoringMode::dimensional
                                              : rank::ScoringMode::single;
        if (jr.contains("lambda")) {
            auto lam = jr["lambda"].get<std::vector<double>>();
            if (lam.size() != 4) throw std::runtime_error("ranker.lambda must have 4 entries");
            std::copy(lam.begin(), lam.end(), c.ranker.weights.lambda.begin());
            c.ranker.weights.validate();
        }
        c.ranker.threshold = jr.value("threshold", 6.0);
    }
    if (j.contains("pipeline")) {
        const auto& jp = j["pipeline"];
        c.max_verify_trials = jp.value("max_verify_trials", 5);
        c.skip_research_when_gap_empty = jp.value("skip_research_when_gap_empty", true);
        c.verify_pass_bar = jp.value("verify_pass_bar", 6.0);
        c.seed = jp.value("seed", static_cast<std::int64_t>(0));
        c.parallelism = jp.value("parallelism", 1);
        c.image_dir = jp.value("image_dir", "");
    }
    if (j.contains("train")) {
        const auto& jt = j["train"];
        c.max_tokens_per_sample = jt.value("max_tokens_per_sample", train::kMaxTokensPerSample);
        c.expected_tokens_per_batch =
            jt.value("expected_tokens_per_batch", train::kExpectedTokensPerBatch);
        c.max_packed_tokens_hard_limit =
            jt.value("max_packed_tokens_hard_limit", train::kMaxPackedTokensHardLimit);
        c.ce_weight = jt.value("ce_weight", train::kCeWeight);
        c.mse_weight = jt.value("mse_weight", train::kMseWeight);
        c.special_token_ce_weight =
            jt.value("special_token_ce_weight", train::kSpecialTokenCeWeight);
    }
    if (j.contains("eval")) {
        const auto& je = j["eval"];
        if (je.contains("factip_weights")) {
            auto w = je["factip_weights"].get<std::vector<double>>();
            if (w.size() != 4) throw std::runtime_error("eval.factip_weights must have 4 entries");
            c.factip_weights = {w[0], w[1], w[2], w[3]};
            c.factip_weights.validate();
        }
        if (je.contains("wise_weights")) {
            auto w = je["wise_weights"].get<std::vector<double>>();
            if (w.size() != 3) throw std::runtime_error("eval.wise_weights must have 3 entries");
            c.wise_weights = {w[0], w[1], w[2]};
            c.wise_weights.validate();
        }
    }
    return c;
}

// Owns the constructed backends, providers and store, wired per config.
struct Runtime {
    backend::ImageStore store;
    std::unique_ptr<backend::Backend> chat, judge, imagegen;
    std::unique_ptr<search::SearchProvider> text_provider, image_provider;

    pipeline::PipelineConfig pipeline_config(const Config& c) const {
        pipeline::PipelineConfig pc;
        pc.chat = chat.get();
        pc.judge = judge.get();
        pc.imagegen = imagegen.get();
        pc.text_provider = text_provider.get();
        pc.image_provider = image_provider.get();
        pc.store = const_cast<backend::ImageStore*>(&store);
        pc.ranker = c.ranker;
        pc.max_verify_trials = c.max_verify_trials;
        pc.skip_research_when_gap_empty = c.skip_research_when_gap_empty;
        pc.verify_pass_bar = c.verify_pass_bar;
        pc.seed = c.seed;
        return pc;
    }
};

inline std::unique_ptr<backend::Backend> make_backend(const BackendConfig& bc, const char* role,
                                                      backend::ImageStore* store,
                                                      const std::string& mock_dir) {
    if (bc.mode == "http") {
        std::string url = !bc.url.empty()
                              ? bc.url
                              : env_or((std::string("WGA_BACKEND_URL_") + role).c_str(),
                                       env_or("WGA_BACKEND_URL", ""));
        std::string key = env_or((std::string("WGA_BACKEND_KEY_") + role).c_str(),
                                 env_or("WGA_BACKEND_KEY", ""));
        if (url.empty()) throw std::runtime_error(std::string("no URL for backend role ") + role);
        return std::make_unique<backend::HttpBackend>(url, key, store);
    }
    std::string script = bc.mock_script;
    if (!mock_dir.empty()) {
        std::string lower_role = role;
        for (auto& ch : lower_role) ch = static_cast<char>(std::tolower(ch));
        script = mock_dir + "/" + lower_role + ".jsonl";
    }
    auto mock = std::make_unique<backend::MockBackend>();
    if (!script.empty()) {
        std::ifstream in(script);
        if (!in) throw std::runtime_error("cannot open mock script: " + script);
        mock->load_script(in);
    }
    return mock;
}

inline std::unique_ptr<search::SearchProvider> make_provider(const ProviderConfig& pc,
                                                             const std::string& mock_dir) {
    if (pc.mode == "live") {
        std::string url = !pc.url.empty() ? pc.url : env_or("WGA_SEARCH_URL", "");
        if (url.empty()) throw std::runtime_error("no URL for live search provider");
        return std::make_unique<search::HttpSearchProvider>(url, env_or("WGA_SEARCH_KEY", ""));
    }
    std::string dir = !mock_dir.empty() ? mock_dir + "/fixtures" : pc.fixture_dir;
    if (dir.empty()) throw std::runtime_error("fixture provider requires a directory");
    return std::make_unique<search::FixtureProvider>(dir);
}

inline Runtime build_runtime(const Config& c, const std::string& mock_dir = "") {
    Runtime rt;
    if (!c.image_dir.empty()) rt.store = backend::ImageStore(c.image_dir);
    rt.chat = make_backend(c.chat, "CHAT", &rt.store, mock_dir);
    rt.judge = make_backend(c.judge, "JUDGE", &rt.store, mock_dir);
    rt.imagegen = make_backend(c.imagegen, "IMAGEGEN", &rt.store, mock_dir);
    rt.text_provider = make_provider(c.text_provider, mock_dir);
    rt.image_provider = make_provider(c.image_provider, mock_dir);
    return rt;
}

}  // namespace wga::config
