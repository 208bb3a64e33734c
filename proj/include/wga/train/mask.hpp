#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wga/train/packing.hpp"

namespace wga::train {

struct MaskMatrix {
    int n = 0;
    std::vector<std::uint8_t> bits;  // row-major; bits[i*n+j]=1 means i may attend to j

    bool at(int i, int j) const { return bits[static_cast<size_t>(i) * n + j] != 0; }
    void set(int i, int j, bool v) { bits[static_cast<size_t>(i) * n + j] = v ? 1 : 0; }
};

namespace detail {

struct TokenInfo {
    SegmentKind kind;
    std::string sample_id;
    int block_start;  // token range of the owning segment
    int block_end;    // one past
};

inline std::vector<TokenInfo> token_table(const PackedSequence& pack) {
    std::vector<TokenInfo> toks;
    int base = 0;
    for (const auto& s : pack.segments) {
        for (int i = 0; i < s.token_count; ++i)
            toks.push_back({s.kind, s.sample_id, base, base + s.token_count});
        base += s.token_count;
    }
    return toks;
}

}  // namespace detail

// Hybrid attention over a packed interleaved sequence:
//  - text tokens (dialog, recaption) attend causally within their sample;
//  - reference-image tokens attend bidirectionally inside their block and
//    causally to prior same-sample context;
//  - generation-latent tokens attend inside their own block, to all
//    same-sample reference-image tokens, and to same-sample recaption
//    tokens — dialog and reasoning history is masked out;
//  - nothing attends across sample boundaries.
inline MaskMatrix build_hybrid_mask(const PackedSequence& pack) {
    validate_pack(pack);
    auto toks = detail::token_table(pack);
    int n = static_cast<int>(toks.size());
    MaskMatrix m;
    m.n = n;
    m.bits.assign(static_cast<size_t>(n) * n, 0);

    for (int i = 0; i < n; ++i) {
        const auto& ti = toks[i];
        for (int j = 0; j < n; ++j) {
            const auto& tj = toks[j];
            if (ti.sample_id != tj.sample_id) continue;
            bool allow = false;
            switch (ti.kind) {
                case SegmentKind::DialogText:
                case SegmentKind::RecaptionText:
                    allow = (j <= i);
                    break;
                case SegmentKind::RefImage:
                    allow = (j <= i) || (j >= ti.block_start && j < ti.block_end);
                    break;
                case SegmentKind::GenLatent:
                    allow = (j >= ti.block_start && j < ti.block_end) ||
                            tj.kind == SegmentKind::RefImage ||
                            tj.kind == SegmentKind::RecaptionText;
                    break;
            }
            if (allow) m.set(i, j, true);
        }
    }
    return m;
}

struct MaskViolation {
    int i = 0;
    int j = 0;
    std::string rule;

    bool operator==(const MaskViolation&) const = default;
};

// Default mode checks prohibitions only (an over-restrictive mask is
// legal); strict mode additionally requires every permitted bit.
inline std::vector<MaskViolation> validate_mask(const MaskMatrix& mask, const PackedSequence& pack,
                                                bool strict_completeness = false) {
    auto toks = detail::token_table(pack);
    int n = static_cast<int>(toks.size());
    std::vector<MaskViolation> out;
    if (mask.n != n) {
        out.push_back({0, 0, "mask size does not match pack token count"});
        return out;
    }
    MaskMatrix reference = build_hybrid_mask(pack);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            bool have = mask.at(i, j);
            bool permitted = reference.at(i, j);
            if (have && !permitted) {
                std::string rule;
                if (toks[i].sample_id != toks[j].sample_id) rule = "cross-sample attention";
                else if (toks[i].kind == SegmentKind::GenLatent)
                    rule = "generation token attends outside recaption/reference/own block";
                else rule = "non-causal attention";
                out.push_back({i, j, rule});
            } else if (!have && permitted && strict_completeness) {
                out.push_back({i, j, "missing permitted attention bit"});
            }
        }
    }
    return out;
}

// Run-length-encoded rows, one line per row: "<i>:<bit>x<count>,..."
inline std::string dump_mask_rle(const MaskMatrix& mask) {
    std::string out;
    for (int i = 0; i < mask.n; ++i) {
        out += std::to_string(i) + ":";
        int j = 0;
        bool first = true;
        while (j < mask.n) {
            bool v = mask.at(i, j);
            int run = 1;
            while (j + run < mask.n && mask.at(i, j + run) == v) ++run;
            if (!first) out += ",";
            out += std::string(v ? "1" : "0") + "x" + std::to_string(run);
            first = false;
            j += run;
        }
        out += "\n";
    }
    return out;
}

}  // namespace wga::train
