#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace wga::train {

// Token-budget defaults of the training recipe.
constexpr int kMaxTokensPerSample = 40240;
constexpr int kExpectedTokensPerBatch = 40240;
constexpr int kMaxPackedTokensHardLimit = 41520;
constexpr double kSpecialTokenCeWeight = 3.0;
constexpr double kCeWeight = 1.0;
constexpr double kMseWeight = 1.0;

enum class SegmentKind { DialogText, RefImage, RecaptionText, GenLatent };

struct Segment {
    SegmentKind kind = SegmentKind::DialogText;
    int token_count = 0;
    std::string sample_id;
    bool supervised = false;
    std::set<int> special_token_positions;  // offsets within the segment
};

struct PackedSequence {
    std::vector<Segment> segments;
    int total_tokens = 0;
};

struct PackItem {
    std::string sample_id;
    int token_cost = 0;
};

struct OversizeItemError : std::runtime_error {
    std::string sample_id;
    OversizeItemError(std::string id, int cost, int limit)
        : std::runtime_error("item " + id + " costs " + std::to_string(cost) +
                             " tokens, exceeding the packed-sequence limit " +
                             std::to_string(limit)),
          sample_id(std::move(id)) {}
};

struct PackSkeleton {
    std::vector<PackItem> items;
    int total_tokens = 0;
};

// First-fit-decreasing bin packing under the hard token limit. Sorting
// is stable on the input order for equal costs, so the result is
// deterministic.
inline std::vector<PackSkeleton> pack_sequences(const std::vector<PackItem>& items, int limit) {
    for (const auto& it : items)
        if (it.token_cost > limit) throw OversizeItemError(it.sample_id, it.token_cost, limit);

    std::vector<PackItem> sorted = items;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PackItem& a, const PackItem& b) { return a.token_cost > b.token_cost; });

    std::vector<PackSkeleton> packs;
    for (const auto& it : sorted) {
        bool placed = false;
        for (auto& p : packs) {
            if (p.total_tokens + it.token_cost <= limit) {
                p.items.push_back(it);
                p.total_tokens += it.token_cost;
                placed = true;
                break;
            }
        }
        if (!placed) packs.push_back({{it}, it.token_cost});
    }
    return packs;
}

inline void validate_pack(const PackedSequence& pack, int limit = kMaxPackedTokensHardLimit) {
    int total = 0;
    for (const auto& s : pack.segments) {
        if (s.token_count <= 0) throw std::invalid_argument("segment token_count must be positive");
        for (int p : s.special_token_positions)
            if (p < 0 || p >= s.token_count)
                throw std::invalid_argument("special token position out of segment range");
        total += s.token_count;
    }
    if (total != pack.total_tokens)
        throw std::invalid_argument("total_tokens does not match segment sum");
    if (total > limit) throw std::invalid_argument("pack exceeds the hard token limit");
}

struct SupervisionLayout {
    std::set<int> ce_positions;
    std::set<int> mse_positions;
    std::map<int, double> token_weights;  // defaults to 1.0; special tokens upweighted
};

// CE positions are the supervised text tokens; MSE positions are all
// generation-latent tokens. The two sets never overlap.
inline SupervisionLayout supervision_layout(const PackedSequence& pack,
                                            double special_weight = kSpecialTokenCeWeight) {
    validate_pack(pack);
    SupervisionLayout layout;
    int base = 0;
    for (const auto& s : pack.segments) {
        if (s.kind == SegmentKind::GenLatent) {
            for (int i = 0; i < s.token_count; ++i) layout.mse_positions.insert(base + i);
        } else if (s.supervised) {
            for (int i = 0; i < s.token_count; ++i) {
                int pos = base + i;
                layout.ce_positions.insert(pos);
                layout.token_weights[pos] =
                    s.special_token_positions.count(i) ? special_weight : 1.0;
            }
        }
        base += s.token_count;
    }
    return layout;
}

}  // namespace wga::train
