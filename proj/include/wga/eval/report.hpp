#pragma once

#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wga/eval/scoring.hpp"
#include "wga/util/atomic_file.hpp"

namespace wga::eval {

struct BenchmarkItem {
    std::string item_id;
    std::string subcategory;
    std::string prompt;
    std::string gt1;        // image handles or paths
    std::string gt2;
    std::string generated;
};

inline std::vector<BenchmarkItem> read_manifest(std::istream& in) {
    std::vector<BenchmarkItem> items;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        items.push_back({j.at("item_id").get<std::string>(),
                         j.at("subcategory").get<std::string>(),
                         j.at("prompt").get<std::string>(), j.value("gt1", ""), j.value("gt2", ""),
                         j.value("generated", "")});
    }
    return items;
}

struct ItemResult {
    std::string item_id;
    std::string subcategory;
    tag::EvalScores scores;
    double overall = 0.0;
};

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline std::string format_score(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

inline std::string render_items_csv(const std::vector<ItemResult>& results) {
    std::string out =
        "item_id,subcategory,clarity,content_quality,aesthetics,text_relevance_ip,overall,"
        "rationale\n";
    for (const auto& r : results) {
        out += csv_escape(r.item_id) + "," + csv_escape(r.subcategory) + "," +
               std::to_string(r.scores.clarity) + "," + std::to_string(r.scores.content_quality) +
               "," + std::to_string(r.scores.aesthetics) + "," +
               std::to_string(r.scores.text_relevance_ip) + "," + format_score(r.overall) + "," +
               csv_escape(r.scores.rationale) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json render_categories_json(const FactIpAggregate& agg) {
    nlohmann::ordered_json j;
    j["subcategories"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : agg.subcategory_means) j["subcategories"][k] = v;
    j["categories"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : agg.category_means) j["categories"][k] = v;
    j["overall"] = agg.overall;
    return j;
}

// Plain text table in the benchmark's category/overall column layout.
inline std::string render_table(const FactIpAggregate& agg) {
    std::ostringstream os;
    os << std::left << std::setw(28) << "Group" << std::right << std::setw(10) << "Score" << "\n";
    os << std::string(38, '-') << "\n";
    for (const auto& [k, v] : agg.subcategory_means)
        os << std::left << std::setw(28) << k << std::right << std::setw(10) << format_score(v)
           << "\n";
    os << std::string(38, '-') << "\n";
    for (const auto& [k, v] : agg.category_means)
        os << std::left << std::setw(28) << k << std::right << std::setw(10) << format_score(v)
           << "\n";
    os << std::left << std::setw(28) << "Overall" << std::right << std::setw(10)
       << format_score(agg.overall) << "\n";
    return os.str();
}

// Writes items.csv, categories.json and table.txt under out_dir.
inline void emit_report(const std::vector<ItemResult>& results, const CategoryTaxonomy& taxonomy,
                        const std::filesystem::path& out_dir) {
    std::vector<std::pair<std::string, double>> per_item;
    for (const auto& r : results) per_item.emplace_back(r.subcategory, r.overall);
    FactIpAggregate agg;
    if (!per_item.empty()) agg = factip_aggregate(per_item, taxonomy);

    util::atomic_write_file(out_dir / "items.csv", render_items_csv(results));
    util::atomic_write_file(out_dir / "categories.json",
                            render_categories_json(agg).dump(2) + "\n");
    util::atomic_write_file(out_dir / "table.txt", render_table(agg));
}

}  // namespace wga::eval
