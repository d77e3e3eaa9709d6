#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sentigan/tensor.hpp"

namespace sentigan {

// Non-negative caption attention grid, Ha x Wa.
struct AttentionMap {
    Tensor grid;  // shape [Ha, Wa]

    static AttentionMap from_grid(Tensor g);  // validates invariants
};

// Integer class labels per pixel plus the distinct label set.
struct SegmentationMap {
    int h = 0, w = 0;
    std::vector<int> labels;  // row-major, size h*w
    std::set<int> class_set;

    static SegmentationMap from_labels(int h, int w, std::vector<int> labels);
};

struct CaptionNouns {
    // noun -> one attention map per caption occurrence
    std::vector<std::pair<std::string, std::vector<AttentionMap>>> entries;
};

struct MaskFusionConfig {
    float alpha = 1.4f;
};

// Elementwise arithmetic mean of same-shaped occurrence maps.
AttentionMap aggregate_attention(const std::vector<AttentionMap>& occurrences);

// Corner-aligned bilinear resampling to H x W.
AttentionMap resize_bilinear(const AttentionMap& a, int h, int w);

// argmax over classes of (sum of attention under class)^alpha / class pixel
// count; ties broken by smallest label. Classes with zero pixels cannot
// occur (class_set only holds labels present in the grid).
int select_segment_class(const AttentionMap& a, const SegmentationMap& s,
                         const MaskFusionConfig& cfg);

// Per noun: average occurrences, resize to the segmentation grid, pick the
// class, emit the binary {0,1} mask of that class.
std::map<std::string, Tensor> extract_object_masks(const CaptionNouns& captions,
                                                   const SegmentationMap& s,
                                                   const MaskFusionConfig& cfg);

// Retain an ANP iff its noun appears among the caption nouns
// (case-insensitive exact match).
bool filter_anp(const std::string& anp_noun, const std::set<std::string>& caption_nouns);

// ---- file formats ----

// "ATTN Ha Wa" header followed by Ha*Wa whitespace-separated floats.
AttentionMap load_attention(const std::string& path);
void save_attention(const std::string& path, const AttentionMap& a);

// Manifest: one "noun<TAB>attention-path" line per occurrence; relative
// paths resolve against the manifest's directory.
CaptionNouns load_caption_manifest(const std::string& path);

// Segmentation map from an 8-bit gray PNG, pixel value = class label.
SegmentationMap load_segmentation_png(const std::string& path);

}  // namespace sentigan
