#include "sentigan/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sentigan/errors.hpp"
#include "sentigan/image_io.hpp"

namespace sentigan {

namespace {

void hsv_to_rgb(float h_deg, float s, float v, float& r, float& g, float& b) {
    float c = v * s;
    float hp = h_deg / 60.0f;
    float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
    float r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1)      { r1 = c; g1 = x; }
    else if (hp < 2) { r1 = x; g1 = c; }
    else if (hp < 3) { g1 = c; b1 = x; }
    else if (hp < 4) { g1 = x; b1 = c; }
    else if (hp < 5) { r1 = x; b1 = c; }
    else             { r1 = c; b1 = x; }
    float m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

void set_pixel(Tensor& img, int y, int x, float r, float g, float b) {
    const int h = img.dim(1), w = img.dim(2);
    img.data[(0 * static_cast<size_t>(h) + y) * w + x] = r * 2.0f - 1.0f;
    img.data[(1 * static_cast<size_t>(h) + y) * w + x] = g * 2.0f - 1.0f;
    img.data[(2 * static_cast<size_t>(h) + y) * w + x] = b * 2.0f - 1.0f;
}

}  // namespace

void SyntheticCorpusSpec::validate() const {
    if (count < 2) throw ContractError("corpus count must be >= 2");
    if (image_size < 8) throw ContractError("corpus image_size must be >= 8");
    if (min_objects < 1 || max_objects < min_objects || max_objects > 3)
        throw ContractError("objects per image must lie in 1..3");
    // palette ranges must be disjoint
    if (!(warm_hue_hi < cold_hue_lo || cold_hue_hi < warm_hue_lo))
        throw ContractError("palette hue ranges must be disjoint");
    if (!(background_amplitude >= 0.0f && background_amplitude < 0.5f))
        throw ContractError("background amplitude out of range");
}

std::vector<CorpusSample> generate_corpus(const SyntheticCorpusSpec& spec) {
    spec.validate();
    const int S = spec.image_size;
    RngState root{spec.seed, 0};
    std::vector<CorpusSample> out;
    out.reserve(static_cast<size_t>(spec.count));

    for (int n = 0; n < spec.count; ++n) {
        RngState rng = root.derive(static_cast<std::uint64_t>(n) + 1);
        CorpusSample sample;
        bool warm = (n % 2 == 0);  // both palettes always present
        sample.anp_adjective = warm ? "warm" : "cold";

        // background: a very pale tint of the image's palette plus
        // low-amplitude per-pixel texture
        sample.image = Tensor({3, S, S});
        {
            float bg_hue = warm ? rng.next_uniform(spec.warm_hue_lo, spec.warm_hue_hi)
                                : rng.next_uniform(spec.cold_hue_lo, spec.cold_hue_hi);
            float br, bg, bb;
            hsv_to_rgb(bg_hue, 0.15f, 0.72f, br, bg, bb);
            for (int y = 0; y < S; ++y)
                for (int x = 0; x < S; ++x) {
                    float t = rng.next_uniform(-spec.background_amplitude, spec.background_amplitude);
                    set_pixel(sample.image, y, x, br + t, bg + t, bb + t);
                }
        }

        int num_objects =
            spec.min_objects +
            static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.max_objects - spec.min_objects + 1)));
        // ownership map: which object is topmost at each pixel (-1 none)
        std::vector<int> owner(static_cast<size_t>(S) * S, -1);
        std::vector<std::string> nouns;

        for (int k = 0; k < num_objects; ++k) {
            bool is_disc = rng.next_below(2) == 0;
            nouns.push_back(is_disc ? "disc" : "rectangle");
            float hue = warm ? rng.next_uniform(spec.warm_hue_lo, spec.warm_hue_hi)
                             : rng.next_uniform(spec.cold_hue_lo, spec.cold_hue_hi);
            float sat = rng.next_uniform(0.7f, 1.0f);
            float val = rng.next_uniform(0.6f, 0.95f);
            float r, g, b;
            hsv_to_rgb(hue, sat, val, r, g, b);

            // Placement jitters around the centre and the size is fixed, so
            // that corpus variation lives in appearance (palette, saturation,
            // brightness) rather than geometry.  Multi-object samples fan the
            // extra objects out to the image quadrants.
            const int jitter = S / 16 + 1;
            int bx = S / 2, by = S / 2;
            if (num_objects > 1) {
                bx = (k % 2 == 0) ? S / 4 : 3 * S / 4;
                by = (k / 2 == 0) ? S / 4 : 3 * S / 4;
            }
            int cx = bx - jitter / 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(jitter)));
            int cy = by - jitter / 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(jitter)));
            int half = S / 8 + 1;
            for (int y = 0; y < S; ++y)
                for (int x = 0; x < S; ++x) {
                    bool inside;
                    if (is_disc) {
                        int dx = x - cx, dy = y - cy;
                        inside = dx * dx + dy * dy <= half * half;
                    } else {
                        inside = std::abs(x - cx) <= half && std::abs(y - cy) <= half;
                    }
                    if (inside) {
                        set_pixel(sample.image, y, x, r, g, b);
                        owner[static_cast<size_t>(y) * S + x] = k;
                    }
                }
        }

        // A mask is only usable if it keeps support after nearest-neighbor
        // downsampling to the S/4 feature grid; drop slivers that would not.
        auto coarse_support = [S](const Tensor& m) {
            const int q = S / 4;
            for (int y = 0; y < q; ++y) {
                int sy = ((2 * y + 1) * S) / (2 * q);
                for (int x = 0; x < q; ++x) {
                    int sx = ((2 * x + 1) * S) / (2 * q);
                    if (m.data[static_cast<size_t>(sy) * S + sx] > 0.0f) return true;
                }
            }
            return false;
        };
        for (int k = 0; k < num_objects; ++k) {
            Tensor mask({S, S});
            for (int i = 0; i < S * S; ++i)
                mask.data[static_cast<size_t>(i)] = owner[static_cast<size_t>(i)] == k ? 1.0f : 0.0f;
            if (coarse_support(mask))
                sample.masks.emplace_back(nouns[static_cast<size_t>(k)], std::move(mask));
        }
        if (sample.masks.empty()) {
            // fully occluded draw; fall back to a guaranteed center disc
            Tensor mask({S, S});
            float r, g, b;
            hsv_to_rgb(warm ? 30.0f : 220.0f, 0.9f, 0.8f, r, g, b);
            for (int y = S / 4; y < 3 * S / 4; ++y)
                for (int x = S / 4; x < 3 * S / 4; ++x) {
                    set_pixel(sample.image, y, x, r, g, b);
                    mask.data[static_cast<size_t>(y) * S + x] = 1.0f;
                }
            sample.masks.emplace_back("disc", std::move(mask));
        }
        sample.anp_noun = sample.masks.front().first;
        out.push_back(std::move(sample));
    }
    return out;
}

void write_corpus(const std::string& dir, const std::vector<CorpusSample>& samples) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ostringstream manifest;
    for (size_t n = 0; n < samples.size(); ++n) {
        const CorpusSample& s = samples[n];
        std::string img_name = "sample" + std::to_string(n) + ".png";
        write_image_png((fs::path(dir) / img_name).string(), s.image);
        manifest << img_name << "\t";
        for (size_t k = 0; k < s.masks.size(); ++k) {
            std::string mask_name =
                "sample" + std::to_string(n) + "_mask" + std::to_string(k) + ".png";
            write_mask_png((fs::path(dir) / mask_name).string(), s.masks[k].second);
            if (k) manifest << ",";
            manifest << s.masks[k].first << "=" << mask_name;
        }
        manifest << "\t" << s.anp_adjective << "_" << s.anp_noun << "\n";
    }
    atomic_write_file((fs::path(dir) / "manifest.tsv").string(), manifest.str());
}

std::vector<CorpusSample> load_corpus(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open corpus manifest: " + manifest_path);
    std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    std::vector<CorpusSample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw FormatError("corpus manifest line " + std::to_string(lineno) +
                              " needs three tab-separated fields");
        CorpusSample s;
        std::filesystem::path img(line.substr(0, t1));
        if (img.is_relative()) img = base / img;
        s.image = read_image_png(img.string());

        std::string masks_field = line.substr(t1 + 1, t2 - t1 - 1);
        std::istringstream ms(masks_field);
        std::string item;
        while (std::getline(ms, item, ',')) {
            size_t eq = item.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size())
                throw FormatError("corpus manifest line " + std::to_string(lineno) +
                                  " has a malformed noun=mask entry");
            std::filesystem::path mp(item.substr(eq + 1));
            if (mp.is_relative()) mp = base / mp;
            s.masks.emplace_back(item.substr(0, eq), read_mask_png(mp.string()));
        }
        if (s.masks.empty())
            throw FormatError("corpus manifest line " + std::to_string(lineno) + " lists no masks");

        std::string anp = line.substr(t2 + 1);
        size_t us = anp.find('_');
        if (us == std::string::npos || us == 0 || us + 1 >= anp.size())
            throw FormatError("corpus manifest line " + std::to_string(lineno) +
                              " has a malformed adjective_noun field");
        s.anp_adjective = anp.substr(0, us);
        s.anp_noun = anp.substr(us + 1);
        out.push_back(std::move(s));
    }
    if (out.size() < 2) throw FormatError("corpus must contain at least two samples");
    return out;
}

SyntheticCorpusSpec parse_corpus_spec(const std::string& text) {
    SyntheticCorpusSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw FormatError("corpus spec line " + std::to_string(lineno) + ": expected key = value");
        auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        std::string key = strip(trimmed.substr(0, eq));
        std::string val = strip(trimmed.substr(eq + 1));
        try {
            if (key == "count") spec.count = std::stoi(val);
            else if (key == "image_size") spec.image_size = std::stoi(val);
            else if (key == "min_objects") spec.min_objects = std::stoi(val);
            else if (key == "max_objects") spec.max_objects = std::stoi(val);
            else if (key == "background_amplitude") spec.background_amplitude = std::stof(val);
            else if (key == "seed") spec.seed = std::stoull(val);
            else throw FormatError("corpus spec: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw FormatError("corpus spec: bad value for key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

bool looks_like_corpus_spec(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = line;
        t.erase(0, t.find_first_not_of(" \t\r"));
        if (t.empty() || t[0] == '#') continue;
        return t.find('\t') == std::string::npos && t.find('=') != std::string::npos &&
               t.find(".png") == std::string::npos;
    }
    return false;
}

}  // namespace sentigan
