#pragma once

#include <functional>
#include <type_traits>
#include <map>
#include <string>
#include <vector>

#include "sentigan/graph.hpp"
#include "sentigan/rng.hpp"
#include "sentigan/tensor.hpp"

namespace sentigan {

// Desk-scale dimensions. The reference architecture this follows runs at
// 256x256 with a 256x64x64 content code; every dimension here is
// configurable, defaults target a 32x32 workload.
struct NetConfig {
    int image_size = 32;
    int in_channels = 3;
    int base_channels = 32;     // first encoder/discriminator width
    int content_channels = 32;  // Cc
    int style_dim = 8;          // Ds
    int mlp_hidden = 64;
    int res_blocks = 2;
    float eps = 1e-5f;

    int content_spatial() const { return image_size / 4; }  // two stride-2 convs
    int num_adain() const { return 2 * res_blocks; }

    void validate() const {
        if (image_size < 8 || image_size % 8 != 0)
            throw ContractError("image_size must be a positive multiple of 8");
        if (in_channels < 1 || base_channels < 1 || content_channels < 1 || style_dim < 1 ||
            mlp_hidden < 1 || res_blocks < 1)
            throw ContractError("all network dimensions must be >= 1");
    }
};

// Named tensors for E_c, E_s, G, MLP and D. The object-oriented variants
// E_s^o and G^o are views over the very same tensors; masking is a
// forward-pass argument, not a separate parameter set.
struct ModelParams {
    std::map<std::string, Tensor> tensors;
};

// Enumerates every parameter tensor name with its shape.
std::vector<std::pair<std::string, std::vector<int>>> param_table(const NetConfig& cfg);

// Kaiming-style uniform fan-in initialization, zero biases; deterministic
// in the RngState.
ModelParams init_params(const NetConfig& cfg, RngState& rng);

inline bool is_discriminator_param(const std::string& name) {
    return name.rfind("d.", 0) == 0;
}

// Nearest-neighbor downsampling of an HxW mask to h x w.
template <typename T>
TensorT<T> downsample_mask_nearest(const TensorT<T>& m, int h, int w) {
    if (m.rank() != 2) throw ShapeError("mask must be HxW");
    const int H = m.dim(0), W = m.dim(1);
    if (H == h && W == w) return m;
    TensorT<T> out({h, w});
    for (int y = 0; y < h; ++y) {
        int sy = static_cast<int>((static_cast<long>(2 * y + 1) * H) / (2 * h));
        for (int x = 0; x < w; ++x) {
            int sx = static_cast<int>((static_cast<long>(2 * x + 1) * W) / (2 * w));
            out.data[static_cast<size_t>(y) * w + x] = m.data[static_cast<size_t>(sy) * W + sx];
        }
    }
    return out;
}

// Parameters bound as leaves of one graph. A filter decides which names
// receive gradients (e.g. freeze D during the generator update).
template <typename T>
struct BoundParams {
    std::map<std::string, int> ids;

    static BoundParams bind(GraphT<T>& g, const ModelParams& p,
                            const std::function<bool(const std::string&)>& grad_filter) {
        BoundParams bp;
        for (const auto& [name, t] : p.tensors) {
            bool rg = grad_filter ? grad_filter(name) : false;
            if constexpr (std::is_same_v<T, float>) {
                bp.ids[name] = g.leaf(t, rg);
            } else {
                bp.ids[name] = g.leaf(t.template cast<T>(), rg);
            }
        }
        return bp;
    }

    int at(const std::string& name) const {
        auto it = ids.find(name);
        if (it == ids.end()) throw ContractError("missing parameter tensor: " + name);
        return it->second;
    }
};

namespace detail {

template <typename T>
int conv_block(GraphT<T>& g, const BoundParams<T>& p, const std::string& prefix, int x,
               int stride, int pad) {
    return g.conv2d(x, p.at(prefix + ".w"), p.at(prefix + ".b"), stride, pad);
}

// Validate a mask against the image size and return its total weight at
// feature resolution; throws on zero support.
template <typename T>
TensorT<T> feature_mask(const TensorT<T>& mask, const NetConfig& cfg, int h, int w) {
    if (mask.rank() != 2 || mask.dim(0) != cfg.image_size || mask.dim(1) != cfg.image_size)
        throw ShapeError("object mask must match the configured image size");
    TensorT<T> fm = downsample_mask_nearest(mask, h, w);
    T tot = T(0);
    for (T v : fm.data) tot += v;
    if (!(tot > T(0)))
        throw DegenerateMaskError("object mask has no support at feature resolution");
    return fm;
}

}  // namespace detail

// Content encoder: two stride-2 convs + res blocks, instance normalized.
template <typename T>
int encode_content(GraphT<T>& g, const BoundParams<T>& p, const NetConfig& cfg, int image) {
    const auto& v = g.val(image);
    if (v.rank() != 3 || v.dim(0) != cfg.in_channels || v.dim(1) != cfg.image_size ||
        v.dim(2) != cfg.image_size)
        throw ShapeError("encode_content: image does not match configured size");
    T eps = static_cast<T>(cfg.eps);
    int x = g.relu(instance_norm_op(g, detail::conv_block(g, p, "ec.conv1", image, 2, 1), eps));
    x = g.relu(instance_norm_op(g, detail::conv_block(g, p, "ec.conv2", x, 2, 1), eps));
    for (int r = 1; r <= cfg.res_blocks; ++r) {
        std::string pre = "ec.res" + std::to_string(r);
        int y = g.relu(instance_norm_op(g, detail::conv_block(g, p, pre + ".conv1", x, 1, 1), eps));
        y = instance_norm_op(g, detail::conv_block(g, p, pre + ".conv2", y, 1, 1), eps);
        x = g.add(x, y);
    }
    return x;
}

// Style encoder; a non-null mask turns it into the object-oriented variant
// (same parameters, pooling restricted to the object).
template <typename T>
int encode_style(GraphT<T>& g, const BoundParams<T>& p, const NetConfig& cfg, int image,
                 const std::type_identity_t<TensorT<T>>* mask = nullptr) {
    const auto& v = g.val(image);
    if (v.rank() != 3 || v.dim(1) != cfg.image_size || v.dim(2) != cfg.image_size)
        throw ShapeError("encode_style: image does not match configured size");
    int x = g.relu(detail::conv_block(g, p, "es.conv1", image, 2, 1));
    x = g.relu(detail::conv_block(g, p, "es.conv2", x, 2, 1));
    const int hs = g.val(x).dim(1), ws = g.val(x).dim(2);
    int mask_id = -1;
    if (mask) mask_id = g.leaf(detail::feature_mask(*mask, cfg, hs, ws), false);
    int pooled = g.channel_weighted_mean(x, mask_id);
    return g.linear(pooled, p.at("es.fc.w"), p.at("es.fc.b"));
}

// Global pooling P applied to a content code.
template <typename T>
int global_pool(GraphT<T>& g, int code) {
    return g.channel_weighted_mean(code, -1);
}

struct AdainParamIds {
    std::vector<int> gamma;
    std::vector<int> beta;
};

// MLP from [s || P(c_in) || P(c_rand)] to per-AdaIN-layer (gamma, beta).
template <typename T>
AdainParamIds mlp_adain_params(GraphT<T>& g, const BoundParams<T>& p, const NetConfig& cfg,
                               int style, int pooled_in, int pooled_rand) {
    if (g.val(style).numel() != cfg.style_dim ||
        g.val(pooled_in).numel() != cfg.content_channels ||
        g.val(pooled_rand).numel() != cfg.content_channels)
        throw ShapeError("mlp_adain_params: input dimensions do not match config");
    int x = g.concat({style, pooled_in, pooled_rand});
    x = g.relu(g.linear(x, p.at("mlp.fc1.w"), p.at("mlp.fc1.b")));
    int out = g.linear(x, p.at("mlp.fc2.w"), p.at("mlp.fc2.b"));
    AdainParamIds ids;
    int off = 0;
    for (int i = 0; i < cfg.num_adain(); ++i) {
        ids.gamma.push_back(g.slice(out, off, cfg.content_channels));
        off += cfg.content_channels;
        ids.beta.push_back(g.slice(out, off, cfg.content_channels));
        off += cfg.content_channels;
    }
    return ids;
}

// Decoder: AdaIN res blocks then two upsample+conv stages and a tanh head.
// A non-null mask restricts the AdaIN statistics to the object (G^o);
// the upsampling convs stay unmasked.
template <typename T>
int decode(GraphT<T>& g, const BoundParams<T>& p, const NetConfig& cfg, int content, int style,
           int pooled_in, int pooled_rand, const std::type_identity_t<TensorT<T>>* mask = nullptr) {
    const auto& vc = g.val(content);
    const int hc = cfg.content_spatial();
    if (vc.rank() != 3 || vc.dim(0) != cfg.content_channels || vc.dim(1) != hc ||
        vc.dim(2) != hc)
        throw ShapeError("decode: content code does not match config");
    AdainParamIds ap = mlp_adain_params(g, p, cfg, style, pooled_in, pooled_rand);
    int mask_id = -1;
    if (mask) mask_id = g.leaf(detail::feature_mask(*mask, cfg, hc, hc), false);
    T eps = static_cast<T>(cfg.eps);
    int x = content;
    int layer = 0;
    for (int r = 1; r <= cfg.res_blocks; ++r) {
        std::string pre = "g.res" + std::to_string(r);
        int y = detail::conv_block(g, p, pre + ".conv1", x, 1, 1);
        y = g.relu(adain_op(g, y, ap.gamma[layer], ap.beta[layer], mask_id, eps));
        ++layer;
        y = detail::conv_block(g, p, pre + ".conv2", y, 1, 1);
        y = adain_op(g, y, ap.gamma[layer], ap.beta[layer], mask_id, eps);
        ++layer;
        x = g.add(x, y);
    }
    x = g.relu(detail::conv_block(g, p, "g.up1", g.upsample2x(x), 1, 1));
    x = g.relu(detail::conv_block(g, p, "g.up2", g.upsample2x(x), 1, 1));
    return g.tanh_op(detail::conv_block(g, p, "g.out", x, 1, 1));
}

// Patch discriminator: three stride-2 convs (leaky relu 0.2) and a 1x1
// projection to one logit channel of size (image_size/8)^2.
template <typename T>
int discriminate(GraphT<T>& g, const BoundParams<T>& p, const NetConfig& cfg, int image) {
    const auto& v = g.val(image);
    if (v.rank() != 3 || v.dim(1) != cfg.image_size || v.dim(2) != cfg.image_size)
        throw ShapeError("discriminate: image does not match configured size");
    const T slope = static_cast<T>(0.2);
    int x = g.leaky_relu(detail::conv_block(g, p, "d.conv1", image, 2, 1), slope);
    x = g.leaky_relu(detail::conv_block(g, p, "d.conv2", x, 2, 1), slope);
    x = g.leaky_relu(detail::conv_block(g, p, "d.conv3", x, 2, 1), slope);
    return g.conv2d(x, p.at("d.out.w"), p.at("d.out.b"), 1, 0);
}

}  // namespace sentigan
