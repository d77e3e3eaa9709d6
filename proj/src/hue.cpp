#include "sentigan/hue.hpp"

#include <algorithm>

namespace sentigan {

float rgb_hue_deg(float r, float g, float b) {
    // map [-1,1] -> [0,1]
    r = (r + 1.0f) * 0.5f;
    g = (g + 1.0f) * 0.5f;
    b = (b + 1.0f) * 0.5f;
    float mx = std::max({r, g, b});
    float mn = std::min({r, g, b});
    float d = mx - mn;
    if (d <= 1e-12f) return 0.0f;
    float h;
    if (mx == r)
        h = 60.0f * std::fmod((g - b) / d, 6.0f);
    else if (mx == g)
        h = 60.0f * ((b - r) / d + 2.0f);
    else
        h = 60.0f * ((r - g) / d + 4.0f);
    if (h < 0.0f) h += 360.0f;
    return h;
}

float masked_hue_mean_deg(const Tensor& image, const Tensor& mask) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("expected a 3xHxW image");
    const int h = image.dim(1), w = image.dim(2);
    if (mask.rank() != 2 || mask.dim(0) != h || mask.dim(1) != w)
        throw ShapeError("mask must match image size");
    double sx = 0.0, sy = 0.0, total = 0.0;
    const float* r = image.data.data();
    const float* g = r + static_cast<size_t>(h) * w;
    const float* b = g + static_cast<size_t>(h) * w;
    for (int i = 0; i < h * w; ++i) {
        float wgt = mask.data[static_cast<size_t>(i)];
        if (wgt <= 0.0f) continue;
        double a = rgb_hue_deg(r[i], g[i], b[i]) * M_PI / 180.0;
        sx += wgt * std::cos(a);
        sy += wgt * std::sin(a);
        total += wgt;
    }
    if (total <= 0.0) throw DegenerateMaskError("hue mean: mask has zero total weight");
    double ang = std::atan2(sy, sx) * 180.0 / M_PI;
    if (ang < 0.0) ang += 360.0;
    return static_cast<float>(ang);
}

}  // namespace sentigan
