#pragma once

#include <cmath>

#include "sentigan/tensor.hpp"

namespace sentigan {

// Hue in degrees [0, 360) of an RGB triple given in [-1, 1].
// Achromatic pixels report hue 0.
float rgb_hue_deg(float r, float g, float b);

// Mask-weighted circular mean hue (vector averaging of hue angles) of a
// 3xHxW image in [-1, 1].
float masked_hue_mean_deg(const Tensor& image, const Tensor& mask);

// Shortest circular distance between two hue angles, in [0, 180].
inline float hue_distance_deg(float a, float b) {
    float d = std::fmod(std::fabs(a - b), 360.0f);
    return d > 180.0f ? 360.0f - d : d;
}

}  // namespace sentigan
