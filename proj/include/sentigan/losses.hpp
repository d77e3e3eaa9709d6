#pragma once

#include <array>
#include <cmath>

#include "sentigan/graph.hpp"

namespace sentigan {

// Term weights in total-loss order: gan, g_m, g_c, g_s, o_m, o_c, o_s, g_cd.
struct LossWeights {
    float gan = 1.0f;
    float g_m = 10.0f;
    float g_c = 1.0f;
    float g_s = 10.0f;
    float o_m = 10.0f;
    float o_c = 0.0f;
    float o_s = 0.0f;
    float g_cd = 1.0f;

    std::array<float, 8> as_array() const { return {gan, g_m, g_c, g_s, o_m, o_c, o_s, g_cd}; }

    void validate() const {
        for (float w : as_array())
            if (!(w >= 0.0f) || !std::isfinite(w))
                throw ContractError("loss weights must be finite and non-negative");
    }
};

// Unweighted term values plus the weighted total. disc is the
// discriminator's own objective, reported alongside but not part of the
// eight-term sum.
struct LossReport {
    float gan = 0, g_m = 0, g_c = 0, g_s = 0, o_m = 0, o_c = 0, o_s = 0, g_cd = 0;
    float total = 0;
    float disc = 0;

    std::array<float, 8> terms() const { return {gan, g_m, g_c, g_s, o_m, o_c, o_s, g_cd}; }
};

inline float total_loss(const std::array<float, 8>& terms, const LossWeights& w) {
    w.validate();
    auto lam = w.as_array();
    float total = 0.0f;
    for (size_t i = 0; i < 8; ++i) {
        if (!std::isfinite(terms[i])) throw ContractError("loss term is not finite");
        total += lam[i] * terms[i];
    }
    return total;
}

// Mean absolute difference; when a mask node is given the mean is weighted
// by it: sum m|a-b| / (C * sum m). A full mask of ones is bitwise
// identical to the unmasked mean.
template <typename T>
int mean_abs_diff(GraphT<T>& g, int a, int b, int mask = -1) {
    int d = g.abs_op(g.sub(a, b));
    if (mask < 0) return g.mean_all(d);
    const auto& vm = g.val(mask);
    T wsum = T(0);
    for (T v : vm.data) wsum += v;
    if (!(wsum > T(0))) throw DegenerateMaskError("masked loss: mask has zero total weight");
    const int C = g.val(d).dim(0);
    return g.scale(g.sum_all(g.mul_mask_hw(d, mask)), T(1) / (T(C) * wsum));
}

// Non-saturating GAN objectives in logit space, p = sigmoid(logit):
//   disc = -mean log p(real) - mean log(1 - p(fake))
//   gen  = -mean log p(fake)
template <typename T>
std::pair<int, int> adversarial_loss(GraphT<T>& g, int d_real_logits, int d_fake_logits) {
    int disc = g.add(g.mean_all(g.softplus(g.scale(d_real_logits, T(-1)))),
                     g.mean_all(g.softplus(d_fake_logits)));
    int gen = g.mean_all(g.softplus(g.scale(d_fake_logits, T(-1))));
    return {disc, gen};
}

// Content disentanglement: pull the re-encoded code's channel statistics
// toward c_rand's while matching the input code's normalized layout.
// ||mu(c_rec)-mu(c_rand)|| + ||sd(c_rec)-sd(c_rand)||
//   + ||(c_rec-mu)/sd(c_rec) - (c-mu)/sd(c)||, mean-absolute norms. The
// statistic terms carry an internal balance factor so that, at desk scale,
// statistic transfer and layout preservation make comparable progress.
template <typename T>
int content_disentanglement_loss(GraphT<T>& g, int c_rec, int c_in, int c_rand, T eps) {
    const auto& v = g.val(c_rec);
    if (!v.same_shape(g.val(c_in)) || !v.same_shape(g.val(c_rand)))
        throw ShapeError("content codes must share one shape");
    const int H = v.dim(1), W = v.dim(2);
    auto stats = [&](int x, int& mu, int& sd, int* norm) {
        mu = g.channel_weighted_mean(x, -1);
        int diff = g.sub(x, g.broadcast_chw(mu, H, W));
        int var = g.channel_weighted_mean(g.mul(diff, diff), -1);
        sd = g.sqrt_op(g.add_scalar(var, eps));
        if (norm) *norm = g.div(diff, g.broadcast_chw(sd, H, W));
    };
    int mu_rec, sd_rec, norm_rec;
    int mu_in, sd_in, norm_in;
    int mu_rand, sd_rand;
    stats(c_rec, mu_rec, sd_rec, &norm_rec);
    stats(c_in, mu_in, sd_in, &norm_in);
    stats(c_rand, mu_rand, sd_rand, nullptr);
    // The donor statistics act as fixed targets: letting gradient flow into
    // them would reward collapsing every code's statistics together instead
    // of steering the generated code toward the donor.
    mu_rand = g.leaf(g.val(mu_rand));
    sd_rand = g.leaf(g.val(sd_rand));
    const T kStatBalance = T(2);
    int t1 = g.scale(g.mean_all(g.abs_op(g.sub(mu_rec, mu_rand))), kStatBalance);
    int t2 = g.scale(g.mean_all(g.abs_op(g.sub(sd_rec, sd_rand))), kStatBalance);
    int t3 = g.mean_all(g.abs_op(g.sub(norm_rec, norm_in)));
    return g.add(g.add(t1, t2), t3);
}

}  // namespace sentigan
