#include "sentigan/mask_extract.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sentigan/image_io.hpp"

namespace sentigan {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

AttentionMap AttentionMap::from_grid(Tensor g) {
    if (g.rank() != 2) throw ShapeError("attention map must be HxW");
    bool any_positive = false;
    for (float v : g.data) {
        if (!(v >= 0.0f)) throw ContractError("attention map entries must be non-negative");
        if (v > 0.0f) any_positive = true;
    }
    if (!any_positive) throw ContractError("attention map must have at least one positive entry");
    return AttentionMap{std::move(g)};
}

SegmentationMap SegmentationMap::from_labels(int h, int w, std::vector<int> labels) {
    if (h < 1 || w < 1 || labels.size() != static_cast<size_t>(h) * w)
        throw ShapeError("segmentation map label buffer does not match dimensions");
    SegmentationMap s;
    s.h = h;
    s.w = w;
    s.class_set.insert(labels.begin(), labels.end());
    s.labels = std::move(labels);
    return s;
}

AttentionMap aggregate_attention(const std::vector<AttentionMap>& occurrences) {
    if (occurrences.empty()) throw ContractError("aggregate_attention: empty occurrence list");
    const Tensor& first = occurrences.front().grid;
    Tensor acc(first.shape);
    for (const auto& occ : occurrences) {
        if (!occ.grid.same_shape(first))
            throw ShapeError("aggregate_attention: occurrence maps differ in shape");
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += occ.grid.data[i];
    }
    float inv = 1.0f / static_cast<float>(occurrences.size());
    for (float& v : acc.data) v *= inv;
    return AttentionMap::from_grid(std::move(acc));
}

AttentionMap resize_bilinear(const AttentionMap& a, int h, int w) {
    if (h < 1 || w < 1) throw ContractError("resize_bilinear: target dims must be >= 1");
    const int hs = a.grid.dim(0), ws = a.grid.dim(1);
    if (h == hs && w == ws) return a;
    Tensor out({h, w});
    // Corner-aligned: output corner samples coincide with input corners.
    const double sy = h > 1 ? static_cast<double>(hs - 1) / (h - 1) : 0.0;
    const double sx = w > 1 ? static_cast<double>(ws - 1) / (w - 1) : 0.0;
    for (int y = 0; y < h; ++y) {
        double fy = y * sy;
        int y0 = static_cast<int>(fy);
        int y1 = std::min(y0 + 1, hs - 1);
        double ty = fy - y0;
        for (int x = 0; x < w; ++x) {
            double fx = x * sx;
            int x0 = static_cast<int>(fx);
            int x1 = std::min(x0 + 1, ws - 1);
            double tx = fx - x0;
            double v00 = a.grid.data[static_cast<size_t>(y0) * ws + x0];
            double v01 = a.grid.data[static_cast<size_t>(y0) * ws + x1];
            double v10 = a.grid.data[static_cast<size_t>(y1) * ws + x0];
            double v11 = a.grid.data[static_cast<size_t>(y1) * ws + x1];
            double v = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
            out.data[static_cast<size_t>(y) * w + x] = static_cast<float>(v);
        }
    }
    return AttentionMap::from_grid(std::move(out));
}

int select_segment_class(const AttentionMap& a, const SegmentationMap& s,
                         const MaskFusionConfig& cfg) {
    if (!(cfg.alpha > 0.0f) || !std::isfinite(cfg.alpha))
        throw ContractError("alpha must be finite and positive");
    if (s.class_set.empty()) throw ContractError("segmentation class set is empty");
    if (a.grid.dim(0) != s.h || a.grid.dim(1) != s.w)
        throw ShapeError("attention map must be resized to the segmentation grid first");

    int best = 0;
    double best_score = -1.0;
    bool have = false;
    for (int c : s.class_set) {  // std::set iterates ascending: ties keep the smallest label
        double att_sum = 0.0;
        long count = 0;
        for (int i = 0; i < s.h * s.w; ++i) {
            if (s.labels[static_cast<size_t>(i)] == c) {
                att_sum += a.grid.data[static_cast<size_t>(i)];
                ++count;
            }
        }
        double score = std::pow(att_sum, static_cast<double>(cfg.alpha)) / count;
        if (!have || score > best_score) {
            have = true;
            best_score = score;
            best = c;
        }
    }
    return best;
}

std::map<std::string, Tensor> extract_object_masks(const CaptionNouns& captions,
                                                   const SegmentationMap& s,
                                                   const MaskFusionConfig& cfg) {
    std::map<std::string, Tensor> out;
    for (const auto& [noun, occurrences] : captions.entries) {
        AttentionMap avg = aggregate_attention(occurrences);
        AttentionMap sized = resize_bilinear(avg, s.h, s.w);
        int cls = select_segment_class(sized, s, cfg);
        Tensor mask({s.h, s.w});
        for (int i = 0; i < s.h * s.w; ++i)
            mask.data[static_cast<size_t>(i)] = s.labels[static_cast<size_t>(i)] == cls ? 1.0f : 0.0f;
        out[noun] = std::move(mask);
    }
    return out;
}

bool filter_anp(const std::string& anp_noun, const std::set<std::string>& caption_nouns) {
    std::string needle = lowercase(anp_noun);
    for (const auto& n : caption_nouns)
        if (lowercase(n) == needle) return true;
    return false;
}

AttentionMap load_attention(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open attention file: " + path);
    std::string magic;
    int h = 0, w = 0;
    if (!(in >> magic >> h >> w) || magic != "ATTN")
        throw FormatError("attention file must start with 'ATTN Ha Wa': " + path);
    if (h < 1 || w < 1) throw FormatError("attention dimensions must be positive: " + path);
    Tensor grid({h, w});
    for (size_t i = 0; i < grid.data.size(); ++i)
        if (!(in >> grid.data[i]))
            throw FormatError("attention file truncated: " + path);
    return AttentionMap::from_grid(std::move(grid));
}

void save_attention(const std::string& path, const AttentionMap& a) {
    std::ostringstream out;
    out << "ATTN " << a.grid.dim(0) << " " << a.grid.dim(1) << "\n";
    for (int y = 0; y < a.grid.dim(0); ++y) {
        for (int x = 0; x < a.grid.dim(1); ++x) {
            if (x) out << " ";
            out << a.grid.data[static_cast<size_t>(y) * a.grid.dim(1) + x];
        }
        out << "\n";
    }
    atomic_write_file(path, out.str());
}

CaptionNouns load_caption_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open caption manifest: " + path);
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    CaptionNouns cn;
    std::map<std::string, size_t> index;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("caption manifest line " + std::to_string(lineno) +
                              " lacks a tab separator");
        std::string noun = line.substr(0, tab);
        std::string rel = line.substr(tab + 1);
        if (noun.empty() || rel.empty())
            throw FormatError("caption manifest line " + std::to_string(lineno) +
                              " has an empty field");
        std::filesystem::path p(rel);
        if (p.is_relative()) p = base / p;
        auto it = index.find(noun);
        if (it == index.end()) {
            index[noun] = cn.entries.size();
            cn.entries.emplace_back(noun, std::vector<AttentionMap>{});
            it = index.find(noun);
        }
        cn.entries[it->second].second.push_back(load_attention(p.string()));
    }
    if (cn.entries.empty()) throw FormatError("caption manifest is empty: " + path);
    return cn;
}

SegmentationMap load_segmentation_png(const std::string& path) {
    std::vector<std::uint8_t> px;
    int h = 0, w = 0;
    read_gray_png(path, px, h, w);
    std::vector<int> labels(px.size());
    for (size_t i = 0; i < px.size(); ++i) labels[i] = static_cast<int>(px[i]);
    return SegmentationMap::from_labels(h, w, std::move(labels));
}

}  // namespace sentigan
