#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wga/search/search.hpp"
#include "wga/tag/verdicts.hpp"

namespace wga::rank {

// Four judged dimensions of a candidate reference image.
struct DimensionScores {
    double identity_consistency = 0.0;
    double subject_salience = 0.0;
    double image_clarity = 0.0;
    double watermark_cleanliness = 0.0;
};

struct Weights {
    std::array<double, 4> lambda{0.25, 0.25, 0.25, 0.25};

    void validate() const {
        double sum = 0.0;
        for (double l : lambda) {
            if (l < 0.0) throw std::invalid_argument("ranker weights must be non-negative");
            sum += l;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("ranker weights must sum to 1");
    }
};

enum class ScoringMode { single, dimensional };

struct RankerConfig {
    ScoringMode mode = ScoringMode::single;
    Weights weights;
    double threshold = 6.0;  // rubric band boundary below which candidates are rejected
};

struct ScoredCandidate {
    search::ImageCandidate candidate;
    std::optional<DimensionScores> dims;
    std::optional<tag::JudgeVerdict> single_score;
    double aggregate = 0.0;
    bool rejected = false;
    std::optional<std::string> reject_reason;
};

struct ScoreResult {
    double aggregate = 0.0;
    bool rejected = false;
    std::optional<std::string> reason;
};

inline ScoreResult score_dimensional(const DimensionScores& dims, const Weights& weights,
                                     double threshold = 6.0) {
    weights.validate();
    double agg = weights.lambda[0] * dims.identity_consistency +
                 weights.lambda[1] * dims.subject_salience +
                 weights.lambda[2] * dims.image_clarity +
                 weights.lambda[3] * dims.watermark_cleanliness;
    ScoreResult r;
    r.aggregate = agg;
    if (agg < threshold) {
        r.rejected = true;
        r.reason = "aggregate below threshold";
    }
    return r;
}

inline ScoreResult score_single(const tag::JudgeVerdict& verdict, double threshold = 6.0) {
    ScoreResult r;
    r.aggregate = verdict.score;
    if (verdict.score == 0) {
        r.rejected = true;
        r.reason = "wrong IP";
    } else if (r.aggregate < threshold) {
        r.rejected = true;
        r.reason = verdict.reason.empty() ? "aggregate below threshold" : verdict.reason;
    }
    return r;
}

// Exactly one score source must be present.
inline ScoreResult score_candidate(ScoringMode mode, const std::optional<DimensionScores>& dims,
                                   const std::optional<tag::JudgeVerdict>& verdict,
                                   const Weights& weights, double threshold = 6.0) {
    if (dims.has_value() == verdict.has_value())
        throw std::invalid_argument("exactly one of dims/single_score must be present");
    if (mode == ScoringMode::dimensional) {
        if (!dims) throw std::invalid_argument("dimensional mode requires dimension scores");
        return score_dimensional(*dims, weights, threshold);
    }
    if (!verdict) throw std::invalid_argument("single mode requires a judge verdict");
    return score_single(*verdict, threshold);
}

// Top-2 of the non-rejected candidates by aggregate descending, ties
// broken by ascending ordinal id. Fewer than two survivors are returned
// as-is; the caller decides the fallback.
inline std::vector<int> select_top2(const std::vector<ScoredCandidate>& candidates) {
    std::vector<const ScoredCandidate*> surv;
    for (const auto& c : candidates)
        if (!c.rejected) surv.push_back(&c);
    std::stable_sort(surv.begin(), surv.end(), [](const auto* a, const auto* b) {
        if (a->aggregate != b->aggregate) return a->aggregate > b->aggregate;
        return a->candidate.id < b->candidate.id;
    });
    std::vector<int> out;
    for (size_t i = 0; i < surv.size() && i < 2; ++i) out.push_back(surv[i]->candidate.id);
    return out;
}

}  // namespace wga::rank
