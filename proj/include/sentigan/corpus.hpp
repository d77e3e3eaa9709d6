#pragma once

#include <string>
#include <vector>

#include "sentigan/rng.hpp"
#include "sentigan/tensor.hpp"

namespace sentigan {

// Two-palette synthetic corpus: flat-shaded discs and rectangles over a
// lightly textured background. The palette hue ranges stand in for
// sentiment polarity (warm vs cold).
struct SyntheticCorpusSpec {
    int count = 64;
    int image_size = 32;
    int min_objects = 1;
    int max_objects = 3;
    float warm_hue_lo = 0.0f, warm_hue_hi = 60.0f;
    float cold_hue_lo = 180.0f, cold_hue_hi = 260.0f;
    float background_amplitude = 0.08f;
    std::uint64_t seed = 1;

    void validate() const;
};

struct CorpusSample {
    Tensor image;  // 3xHxW in [-1,1]
    std::vector<std::pair<std::string, Tensor>> masks;  // (noun, HxW mask)
    std::string anp_adjective;  // sentiment word: "warm" or "cold"
    std::string anp_noun;       // shape noun of the first object
};

// Deterministic in spec.seed; each sample draws from a derived RNG stream.
std::vector<CorpusSample> generate_corpus(const SyntheticCorpusSpec& spec);

// Corpus on disk: PNG images/masks plus a manifest with one line per
// sample: "image-path<TAB>noun=mask-path[,noun=mask-path...]<TAB>adjective_noun".
void write_corpus(const std::string& dir, const std::vector<CorpusSample>& samples);
std::vector<CorpusSample> load_corpus(const std::string& manifest_path);

// "key = value" spec file (count, image_size, max_objects,
// background_amplitude, seed); unknown keys are errors.
SyntheticCorpusSpec parse_corpus_spec(const std::string& text);

// Heuristic: does this file look like a corpus spec rather than a manifest?
bool looks_like_corpus_spec(const std::string& text);

}  // namespace sentigan
