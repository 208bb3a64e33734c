// Operator entry point: run trajectories, build datasets, pack and mask
// training sequences, and score benchmark outputs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wga/config.hpp"
#include "wga/core/records.hpp"
#include "wga/eval/report.hpp"
#include "wga/pipeline/pipeline.hpp"
#include "wga/train/mask.hpp"
#include "wga/train/packing.hpp"
#include "wga/util/atomic_file.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitPartial = 4;

struct CommonOpts {
    std::string config_path;
    std::string input_path;
    std::string output_path;
    std::int64_t seed = 0;
    bool seed_set = false;
    int parallelism = 1;
    std::string mock_dir;
    bool strict_json = false;
};

void emit_error(const std::string& command, const std::string& message) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["error"] = message;
    std::cerr << j.dump() << "\n";
}

wga::config::Config load_config_or_default(const CommonOpts& opts) {
    wga::config::Config c;
    if (!opts.config_path.empty()) c = wga::config::load_config(opts.config_path);
    if (opts.seed_set) c.seed = opts.seed;
    if (opts.parallelism > 0) c.parallelism = opts.parallelism;
    c.strict_json = opts.strict_json;
    return c;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input: " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(nlohmann::json::parse(line));
    }
    return out;
}

wga::core::UserPrompt prompt_from_input(const nlohmann::json& j) {
    wga::core::UserPrompt p;
    p.id = j.value("id", "");
    p.text = j.at("text").get<std::string>();
    auto lang = wga::core::language_from_string(j.value("language", "en"));
    if (!lang) throw std::runtime_error("prompt " + p.id + ": unknown language");
    p.language = *lang;
    if (j.contains("category") && !j["category"].is_null())
        p.category = j["category"].get<std::string>();
    return p;
}

int run_agent(const CommonOpts& opts) {
    auto cfg = load_config_or_default(opts);
    auto rt = wga::config::build_runtime(cfg, opts.mock_dir);
    auto pc = rt.pipeline_config(cfg);

    auto inputs = read_jsonl(opts.input_path);
    std::string log;
    int failures = 0;
    nlohmann::ordered_json failure_manifest = nlohmann::ordered_json::array();
    for (const auto& j : inputs) {
        auto prompt = prompt_from_input(j);
        auto traj = wga::pipeline::run_trajectory(prompt, pc);
        log += wga::pipeline::trajectory_to_json(traj).dump() + "\n";
        if (traj.failed) {
            ++failures;
            nlohmann::ordered_json f;
            f["id"] = prompt.id;
            f["stage"] = traj.failed_stage;
            f["reason"] = traj.failure_reason;
            failure_manifest.push_back(f);
        }
    }
    wga::util::atomic_write_file(opts.output_path, log);
    if (failures > 0) {
        emit_error("agent-run", std::to_string(failures) + " of " +
                                    std::to_string(inputs.size()) + " trajectories failed");
        std::cerr << failure_manifest.dump() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

int run_data_build(const CommonOpts& opts) {
    auto cfg = load_config_or_default(opts);
    auto rt = wga::config::build_runtime(cfg, opts.mock_dir);
    auto pc = rt.pipeline_config(cfg);

    auto inputs = read_jsonl(opts.input_path);
    std::vector<wga::core::SftRecord> records;
    std::string discards;
    int failures = 0;
    for (const auto& j : inputs) {
        auto prompt = prompt_from_input(j);
        std::string gt1 = rt.store.put(wga::util::read_file(j.at("gt1_path").get<std::string>()));
        std::string gt2 = rt.store.put(wga::util::read_file(j.at("gt2_path").get<std::string>()));
        auto traj = wga::pipeline::run_trajectory(prompt, pc);
        if (traj.failed) {
            ++failures;
            nlohmann::ordered_json d;
            d["id"] = prompt.id;
            d["outcome"] = "failed";
            d["stage"] = traj.failed_stage;
            d["reason"] = traj.failure_reason;
            discards += d.dump() + "\n";
            continue;
        }
        auto outcome = wga::pipeline::verify_and_resample(traj, pc, gt1, gt2);
        if (auto* rec = std::get_if<wga::core::SftRecord>(&outcome)) {
            records.push_back(*rec);
        } else {
            auto& disc = std::get<wga::pipeline::Discarded>(outcome);
            nlohmann::ordered_json d;
            d["id"] = prompt.id;
            d["outcome"] = "discarded";
            d["trials"] = disc.trials;
            d["reason"] = disc.reason;
            discards += d.dump() + "\n";
        }
    }
    std::ostringstream sink;
    wga::core::write_records(records, sink);
    wga::util::atomic_write_file(opts.output_path, sink.str());
    wga::util::atomic_write_file(opts.output_path + ".discards.jsonl", discards);
    if (failures > 0) {
        emit_error("data-build", std::to_string(failures) + " prompts failed before verification");
        return kExitPartial;
    }
    return kExitOk;
}

int run_data_pack(const CommonOpts& opts) {
    auto cfg = load_config_or_default(opts);
    auto inputs = read_jsonl(opts.input_path);
    std::vector<wga::train::PackItem> items;
    for (const auto& j : inputs)
        items.push_back({j.at("sample_id").get<std::string>(), j.at("token_cost").get<int>()});
    auto packs = wga::train::pack_sequences(items, cfg.max_packed_tokens_hard_limit);
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& p : packs) {
        nlohmann::ordered_json jp;
        jp["total_tokens"] = p.total_tokens;
        jp["items"] = nlohmann::ordered_json::array();
        for (const auto& it : p.items) {
            nlohmann::ordered_json ji;
            ji["sample_id"] = it.sample_id;
            ji["token_cost"] = it.token_cost;
            jp["items"].push_back(ji);
        }
        out.push_back(jp);
    }
    wga::util::atomic_write_file(opts.output_path, out.dump(2) + "\n");
    return kExitOk;
}

wga::train::PackedSequence pack_from_json(const nlohmann::json& j) {
    wga::train::PackedSequence pack;
    for (const auto& js : j.at("segments")) {
        wga::train::Segment s;
        std::string kind = js.at("kind").get<std::string>();
        if (kind == "DialogText") s.kind = wga::train::SegmentKind::DialogText;
        else if (kind == "RefImage") s.kind = wga::train::SegmentKind::RefImage;
        else if (kind == "RecaptionText") s.kind = wga::train::SegmentKind::RecaptionText;
        else if (kind == "GenLatent") s.kind = wga::train::SegmentKind::GenLatent;
        else throw std::runtime_error("unknown segment kind: " + kind);
        s.token_count = js.at("token_count").get<int>();
        s.sample_id = js.value("sample_id", "s0");
        s.supervised = js.value("supervised", false);
        if (js.contains("special"))
            for (int p : js["special"]) s.special_token_positions.insert(p);
        pack.segments.push_back(s);
        pack.total_tokens += s.token_count;
    }
    return pack;
}

int run_mask_dump(const CommonOpts& opts) {
    auto pack = pack_from_json(nlohmann::json::parse(wga::util::read_file(opts.input_path)));
    auto mask = wga::train::build_hybrid_mask(pack);
    wga::util::atomic_write_file(opts.output_path, wga::train::dump_mask_rle(mask));
    return kExitOk;
}

int run_eval_score(const CommonOpts& opts) {
    auto cfg = load_config_or_default(opts);
    auto rt = wga::config::build_runtime(cfg, opts.mock_dir);
    auto pc = rt.pipeline_config(cfg);

    std::ifstream in(opts.input_path);
    if (!in) throw std::runtime_error("cannot open input: " + opts.input_path);
    auto items = wga::eval::read_manifest(in);

    std::vector<wga::eval::ItemResult> results;
    int failures = 0;
    for (const auto& item : items) {
        wga::backend::ChatRequest req;
        req.seed = cfg.seed;
        wga::backend::ChatTurn turn{
            "user",
            wga::prompts::replace_all(wga::prompts::kEvaluationPrompt, "image_prompt",
                                      item.prompt),
            {}};
        for (const auto& path : {item.gt1, item.gt2, item.generated}) {
            if (!path.empty() && std::filesystem::exists(path))
                turn.images.push_back(rt.store.put(wga::util::read_file(path)));
        }
        req.turns.push_back(turn);
        try {
            auto scores =
                wga::tag::parse_eval_scores(pc.judge->chat_complete(req), cfg.strict_json);
            results.push_back({item.item_id, item.subcategory, scores,
                               wga::eval::factip_item_score(scores, cfg.factip_weights)});
        } catch (const std::exception& e) {
            ++failures;
            emit_error("eval-score", "item " + item.item_id + ": " + e.what());
        }
    }
    wga::eval::emit_report(results, wga::eval::default_taxonomy(), opts.output_path);
    return failures > 0 ? kExitPartial : kExitOk;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quote = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quote) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                in_quote = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quote = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

int run_eval_aggregate(const CommonOpts& opts) {
    std::ifstream in(opts.input_path);
    if (!in) throw std::runtime_error("cannot open input: " + opts.input_path);
    std::string header;
    std::getline(in, header);
    std::vector<std::pair<std::string, double>> per_item;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 7) throw std::runtime_error("malformed items.csv row");
        per_item.emplace_back(f[1], std::stod(f[6]));
    }
    auto agg = wga::eval::factip_aggregate(per_item, wga::eval::default_taxonomy());
    std::filesystem::path out_dir(opts.output_path);
    wga::util::atomic_write_file(out_dir / "categories.json",
                                 wga::eval::render_categories_json(agg).dump(2) + "\n");
    wga::util::atomic_write_file(out_dir / "table.txt", wga::eval::render_table(agg));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"world-grounded image-synthesis pipeline driver"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string command;
    for (const char* name : {"agent-run", "data-build", "data-pack", "mask-dump", "eval-score",
                             "eval-aggregate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_path);
        sub->add_option("--input", opts.input_path)->required();
        sub->add_option("--output", opts.output_path)->required();
        sub->add_option("--seed", opts.seed)->each([&](const std::string&) { opts.seed_set = true; });
        sub->add_option("--parallelism", opts.parallelism)->check(CLI::PositiveNumber);
        sub->add_option("--mock-dir", opts.mock_dir);
        sub->add_flag("--strict-json", opts.strict_json);
        sub->callback([&command, name]() { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (command == "agent-run") return run_agent(opts);
        if (command == "data-build") return run_data_build(opts);
        if (command == "data-pack") return run_data_pack(opts);
        if (command == "mask-dump") return run_mask_dump(opts);
        if (command == "eval-score") return run_eval_score(opts);
        if (command == "eval-aggregate") return run_eval_aggregate(opts);
    } catch (const wga::backend::BackendError& e) {
        emit_error(command, e.what());
        return e.kind == wga::backend::BackendErrorKind::Unavailable ? kExitBackend : kExitPartial;
    } catch (const nlohmann::json::exception& e) {
        emit_error(command, std::string("config/input parse failure: ") + e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::string what = e.what();
        emit_error(command, what);
        if (what.find("config") != std::string::npos) return kExitConfig;
        return kExitPartial;
    }
    return kExitUsage;
}
