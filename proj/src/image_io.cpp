#include "sentigan/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace sentigan {

namespace {

struct MemReader {
    const std::uint8_t* p;
    size_t remaining;
};

void mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (n > r->remaining) png_error(png, "truncated PNG stream");
    std::memcpy(out, r->p, n);
    r->p += n;
    r->remaining -= n;
}

void mem_write(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), n);
}

void mem_flush(png_structp) {}

// Decodes to 8-bit rows with `channels` samples per pixel (1 or 3).
void decode_png(const std::string& bytes, int channels, std::vector<std::uint8_t>& pixels,
                int& h, int& w) {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8))
        throw FormatError("not a PNG file");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt PNG stream");
    }
    MemReader reader{reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()};
    png_set_read_fn(png, &reader, mem_read);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    png_set_expand(png);
    int color = png_get_color_type(png, info);
    if (channels == 3) {
        if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
    } else {
        if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
            color == PNG_COLOR_TYPE_PALETTE)
            png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    size_t rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<size_t>(w) * channels) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unexpected PNG channel layout");
    }
    pixels.resize(static_cast<size_t>(h) * w * channels);
    std::vector<png_bytep> rows(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = pixels.data() + static_cast<size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

std::string encode_png(const std::vector<std::uint8_t>& pixels, int h, int w, int channels) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    std::string out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed");
    }
    png_set_write_fn(png, &out, mem_write, mem_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<size_t>(y)] = const_cast<png_bytep>(pixels.data() + static_cast<size_t>(y) * w * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path);
    return bytes;
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open file for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("rename failed: " + path);
    }
}

Tensor read_image_png(const std::string& path) {
    std::vector<std::uint8_t> px;
    int h = 0, w = 0;
    decode_png(read_file_bytes(path), 3, px, h, w);
    Tensor img({3, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.data[(static_cast<size_t>(c) * h + y) * w + x] =
                    u8_to_signed(px[(static_cast<size_t>(y) * w + x) * 3 + c]);
    return img;
}

void write_image_png(const std::string& path, const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("expected a 3xHxW image");
    const int h = image.dim(1), w = image.dim(2);
    std::vector<std::uint8_t> px(static_cast<size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                px[(static_cast<size_t>(y) * w + x) * 3 + c] =
                    signed_to_u8(image.data[(static_cast<size_t>(c) * h + y) * w + x]);
    atomic_write_file(path, encode_png(px, h, w, 3));
}

void read_gray_png(const std::string& path, std::vector<std::uint8_t>& pixels, int& h, int& w) {
    decode_png(read_file_bytes(path), 1, pixels, h, w);
}

void write_gray_png(const std::string& path, const std::vector<std::uint8_t>& pixels, int h,
                    int w) {
    if (pixels.size() != static_cast<size_t>(h) * w) throw ShapeError("gray pixel buffer size mismatch");
    atomic_write_file(path, encode_png(pixels, h, w, 1));
}

Tensor read_mask_png(const std::string& path) {
    std::vector<std::uint8_t> px;
    int h = 0, w = 0;
    read_gray_png(path, px, h, w);
    Tensor m({h, w});
    for (size_t i = 0; i < px.size(); ++i) m.data[i] = static_cast<float>(px[i]) / 255.0f;
    return m;
}

void write_mask_png(const std::string& path, const Tensor& mask) {
    if (mask.rank() != 2) throw ShapeError("expected an HxW mask");
    std::vector<std::uint8_t> px(mask.data.size());
    for (size_t i = 0; i < px.size(); ++i) {
        float v = mask.data[i] * 255.0f;
        if (v < 0.0f) v = 0.0f;
        if (v > 255.0f) v = 255.0f;
        px[i] = static_cast<std::uint8_t>(v + 0.5f);
    }
    atomic_write_file(path, encode_png(px, mask.dim(0), mask.dim(1), 1));
}

}  // namespace sentigan
