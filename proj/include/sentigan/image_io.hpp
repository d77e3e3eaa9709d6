#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentigan/tensor.hpp"

namespace sentigan {

// 8-bit RGB PNG <-> [3,H,W] tensor with values mapped linearly to [-1,1].
Tensor read_image_png(const std::string& path);
void write_image_png(const std::string& path, const Tensor& image);

// 8-bit single-channel PNG as raw byte values (segmentation class labels).
void read_gray_png(const std::string& path, std::vector<std::uint8_t>& pixels, int& h, int& w);
void write_gray_png(const std::string& path, const std::vector<std::uint8_t>& pixels, int h, int w);

// Mask helpers: PNG value 0..255 maps to [0,1]; masks are written as 0 or 255.
Tensor read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const Tensor& mask);

inline float u8_to_signed(std::uint8_t v) { return static_cast<float>(v) / 255.0f * 2.0f - 1.0f; }
inline std::uint8_t signed_to_u8(float x) {
    float v = (x + 1.0f) * 0.5f * 255.0f;
    if (v < 0.0f) v = 0.0f;
    if (v > 255.0f) v = 255.0f;
    return static_cast<std::uint8_t>(v + 0.5f);
}

// Write-to-temp-then-rename; partial files never land at `path`.
void atomic_write_file(const std::string& path, const std::string& bytes);
std::string read_file_bytes(const std::string& path);

}  // namespace sentigan
