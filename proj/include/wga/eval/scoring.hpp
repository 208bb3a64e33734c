#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wga/tag/verdicts.hpp"

namespace wga::eval {

// ---- FactIP ----

struct FactIpWeights {
    double clarity = 0.05;
    double content = 0.10;
    double aesthetics = 0.10;
    double relevance = 0.75;

    void validate() const {
        for (double a : {clarity, content, aesthetics, relevance})
            if (a < 0.0) throw std::invalid_argument("FactIP weights must be non-negative");
        if (std::abs(clarity + content + aesthetics + relevance - 1.0) > 1e-9)
            throw std::invalid_argument("FactIP weights must sum to 1");
    }
};

// Weighted 0-10 combination scaled to [0,100].
inline double factip_item_score(const tag::EvalScores& scores, const FactIpWeights& weights) {
    weights.validate();
    return 10.0 * (weights.clarity * scores.clarity + weights.content * scores.content_quality +
                   weights.aesthetics * scores.aesthetics +
                   weights.relevance * scores.text_relevance_ip);
}

enum class Category { Character, Object, Scene };

inline const char* to_string(Category c) {
    switch (c) {
        case Category::Character: return "Character";
        case Category::Object: return "Object";
        case Category::Scene: return "Scene";
    }
    return "?";
}

struct CategoryTaxonomy {
    // subcategory -> (category, prompt count)
    std::map<std::string, std::pair<Category, int>> entries;

    int category_total(Category c) const {
        int total = 0;
        for (const auto& [_, e] : entries)
            if (e.first == c) total += e.second;
        return total;
    }

    int total() const {
        int t = 0;
        for (const auto& [_, e] : entries) t += e.second;
        return t;
    }
};

// The shipped 12-subcategory benchmark taxonomy (2,462 prompts).
inline CategoryTaxonomy default_taxonomy() {
    CategoryTaxonomy t;
    t.entries = {
        {"Animation", {Category::Character, 438}},
        {"Comic", {Category::Character, 363}},
        {"Celebrity", {Category::Character, 300}},
        {"Game", {Category::Character, 272}},
        {"Mascot", {Category::Character, 77}},
        {"Mythology", {Category::Character, 50}},
        {"Food", {Category::Object, 316}},
        {"Cultural Relic / Art", {Category::Object, 126}},
        {"Toy", {Category::Object, 123}},
        {"Animal / Plant", {Category::Object, 50}},
        {"Landmark", {Category::Scene, 297}},
        {"Festival / Celebration", {Category::Scene, 50}},
    };
    return t;
}

struct FactIpAggregate {
    std::map<std::string, double> subcategory_means;
    std::map<std::string, double> category_means;  // keyed by category name
    double overall = 0.0;
};

// Subcategory mean is arithmetic; category and overall means are
// weighted by taxonomy prompt counts.
inline FactIpAggregate factip_aggregate(
    const std::vector<std::pair<std::string, double>>& per_item, const CategoryTaxonomy& taxonomy) {
    std::map<std::string, std::pair<double, int>> sums;
    for (const auto& [subcat, score] : per_item) {
        if (!taxonomy.entries.count(subcat))
            throw std::invalid_argument("unknown subcategory: " + subcat);
        auto& s = sums[subcat];
        s.first += score;
        s.second += 1;
    }
    FactIpAggregate agg;
    for (const auto& [subcat, s] : sums)
        agg.subcategory_means[subcat] = s.first / s.second;

    std::map<Category, std::pair<double, int>> cat_acc;  // weighted sum, weight
    double overall_num = 0.0;
    int overall_den = 0;
    for (const auto& [subcat, mean] : agg.subcategory_means) {
        const auto& [cat, count] = taxonomy.entries.at(subcat);
        cat_acc[cat].first += mean * count;
        cat_acc[cat].second += count;
        overall_num += mean * count;
        overall_den += count;
    }
    for (const auto& [cat, acc] : cat_acc)
        agg.category_means[to_string(cat)] = acc.first / acc.second;
    agg.overall = overall_den ? overall_num / overall_den : 0.0;
    return agg;
}

// ---- WiSE ----

struct WiseWeights {
    double consistency = 0.7;
    double realism = 0.2;
    double aesthetic = 0.1;

    void validate() const {
        for (double a : {consistency, realism, aesthetic})
            if (a < 0.0) throw std::invalid_argument("WiScore weights must be non-negative");
        if (std::abs(consistency + realism + aesthetic - 1.0) > 1e-9)
            throw std::invalid_argument("WiScore weights must sum to 1");
    }
};

// Weighted combination on the 0-2 judge scale.
inline double wiscore(int consistency, int realism, int aesthetic,
                      const WiseWeights& weights = {}) {
    weights.validate();
    for (int v : {consistency, realism, aesthetic})
        if (v < 0 || v > 2) throw std::invalid_argument("WiScore dimensions are 0..2");
    return weights.consistency * consistency + weights.realism * realism +
           weights.aesthetic * aesthetic;
}

// ---- T2I factuality ----

struct ConceptBinary {
    int shape = 0, color = 0, texture = 0, feature = 0;
};

inline void check_binary(int v, const char* name) {
    if (v != 0 && v != 1) throw std::invalid_argument(std::string(name) + " must be 0 or 1");
}

// Mean over concepts of the per-concept quarter-sum of binary judgments.
inline double concept_factuality(const std::vector<ConceptBinary>& per_concept) {
    if (per_concept.empty()) throw std::invalid_argument("at least one concept is required");
    double acc = 0.0;
    for (const auto& c : per_concept) {
        check_binary(c.shape, "shape");
        check_binary(c.color, "color");
        check_binary(c.texture, "texture");
        check_binary(c.feature, "feature");
        acc += (c.shape + c.color + c.texture + c.feature) / 4.0;
    }
    return acc / static_cast<double>(per_concept.size());
}

// 1 only when the concept is present AND the instantiation phrase is
// realized.
inline int instantiation_score(bool concept_present, bool phrase_realized) {
    return (concept_present && phrase_realized) ? 1 : 0;
}

inline double composition_factuality(int seamless, int completeness, int authenticity,
                                     int prompt_following) {
    check_binary(seamless, "seamless");
    check_binary(completeness, "completeness");
    check_binary(authenticity, "authenticity");
    check_binary(prompt_following, "prompt_following");
    return (seamless + completeness + authenticity + prompt_following) / 4.0;
}

// ---- KiTTEN ----

struct KittenOverall {
    double text = 0.0;
    double entity = 0.0;
    double all = 0.0;
};

// Unweighted means over categories; the All column is the mean of the
// overall text- and entity-alignment scores.
inline KittenOverall kitten_aggregate(
    const std::vector<std::pair<double, double>>& per_category) {
    if (per_category.empty()) throw std::invalid_argument("at least one category is required");
    KittenOverall out;
    for (const auto& [t, e] : per_category) {
        out.text += t;
        out.entity += e;
    }
    out.text /= static_cast<double>(per_category.size());
    out.entity /= static_cast<double>(per_category.size());
    out.all = (out.text + out.entity) / 2.0;
    return out;
}

}  // namespace wga::eval
