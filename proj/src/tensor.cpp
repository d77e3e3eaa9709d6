#include "sentigan/tensor.hpp"

#include <cmath>

namespace sentigan {

ChannelStats channel_stats(const Tensor& z, const Tensor* mask, float eps) {
    if (z.rank() != 3) throw ShapeError("channel_stats expects a CxHxW tensor");
    const int C = z.dim(0), H = z.dim(1), W = z.dim(2);
    const float* m = nullptr;
    if (mask) {
        if (mask->rank() != 2 || mask->dim(0) != H || mask->dim(1) != W)
            throw ShapeError("channel_stats mask must be HxW matching z");
        m = mask->data.data();
    }
    float wsum = 0.0f;
    for (int i = 0; i < H * W; ++i) wsum += m ? m[i] : 1.0f;
    if (!(wsum > 0.0f)) throw DegenerateMaskError("channel_stats: mask has zero total weight");

    ChannelStats cs;
    cs.mean.resize(C);
    cs.std.resize(C);
    for (int c = 0; c < C; ++c) {
        const float* zc = z.data.data() + static_cast<size_t>(c) * H * W;
        float acc = 0.0f;
        for (int i = 0; i < H * W; ++i) acc += (m ? m[i] : 1.0f) * zc[i];
        float mu = acc / wsum;
        float vacc = 0.0f;
        for (int i = 0; i < H * W; ++i) {
            float d = zc[i] - mu;
            vacc += (m ? m[i] : 1.0f) * d * d;
        }
        cs.mean[c] = mu;
        cs.std[c] = std::sqrt(vacc / wsum + eps);
    }
    return cs;
}

Tensor adain(const Tensor& z, const std::vector<float>& gamma, const std::vector<float>& beta,
             const Tensor* mask, float eps) {
    if (z.rank() != 3) throw ShapeError("adain expects a CxHxW tensor");
    const int C = z.dim(0), H = z.dim(1), W = z.dim(2);
    if (static_cast<int>(gamma.size()) != C || static_cast<int>(beta.size()) != C)
        throw ShapeError("adain gamma/beta length must equal channel count");
    ChannelStats cs = channel_stats(z, mask, eps);
    Tensor out(z.shape);
    for (int c = 0; c < C; ++c) {
        const float* zc = z.data.data() + static_cast<size_t>(c) * H * W;
        float* oc = out.data.data() + static_cast<size_t>(c) * H * W;
        for (int i = 0; i < H * W; ++i)
            oc[i] = gamma[static_cast<size_t>(c)] * (zc[i] - cs.mean[static_cast<size_t>(c)]) /
                        cs.std[static_cast<size_t>(c)] +
                    beta[static_cast<size_t>(c)];
    }
    check_finite(out, "adain");
    return out;
}

}  // namespace sentigan
