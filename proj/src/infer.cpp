#include "sentigan/infer.hpp"

#include <cmath>

#include "sentigan/hue.hpp"

namespace sentigan {

Tensor align_content(const Tensor& c_in, const Tensor& c_ref, float t) {
    if (!c_in.same_shape(c_ref)) throw ShapeError("align_content: shape mismatch");
    if (c_in.rank() != 3) throw ShapeError("align_content expects CxHxW codes");
    if (!(t >= 0.0f && t <= 1.0f)) throw ContractError("align_content: t must lie in [0,1]");
    const int C = c_in.dim(0), H = c_in.dim(1), W = c_in.dim(2);
    const int hw = H * W;
    Tensor out(c_in.shape);
    for (int c = 0; c < C; ++c) {
        const float* zi = c_in.data.data() + static_cast<size_t>(c) * hw;
        const float* zr = c_ref.data.data() + static_cast<size_t>(c) * hw;
        double mi = 0, mr = 0;
        for (int i = 0; i < hw; ++i) { mi += zi[i]; mr += zr[i]; }
        mi /= hw;
        mr /= hw;
        double vi = 0, vr = 0;
        for (int i = 0; i < hw; ++i) {
            vi += (zi[i] - mi) * (zi[i] - mi);
            vr += (zr[i] - mr) * (zr[i] - mr);
        }
        double si = std::sqrt(vi / hw);
        double sr = std::sqrt(vr / hw);
        double mu_star = (1.0 - t) * mi + t * mr;
        double sd_star = (1.0 - t) * si + t * sr;
        double denom = si > 1e-12 ? si : 1e-12;
        float* o = out.data.data() + static_cast<size_t>(c) * hw;
        for (int i = 0; i < hw; ++i)
            o[i] = static_cast<float>(sd_star * (zi[i] - mi) / denom + mu_star);
    }
    check_finite(out, "align_content");
    return out;
}

Tensor transfer_object(const Tensor& input, const Tensor& in_mask, const Tensor& reference,
                       const Tensor& ref_mask, float strength, float align_t,
                       const ModelParams& params, const NetConfig& cfg, JobDiagnostics* diag) {
    cfg.validate();
    if (params.tensors.empty()) throw ContractError("transfer_object: missing model parameters");
    if (!(strength >= 0.0f && strength <= 1.0f))
        throw ContractError("transfer_object: strength must lie in [0,1]");

    Graph g;
    auto bp = BoundParams<float>::bind(g, params, nullptr);
    int img = g.leaf(input);
    int ref = g.leaf(reference);
    int c_in = encode_content(g, bp, cfg, img);
    int c_ref = encode_content(g, bp, cfg, ref);
    int s_ref = encode_style(g, bp, cfg, ref, &ref_mask);

    Tensor aligned = align_content(g.val(c_in), g.val(c_ref), align_t);
    if (diag) {
        ChannelStats cs = channel_stats(aligned, nullptr, 0.0f);
        diag->aligned_mean = cs.mean;
        diag->aligned_std = cs.std;
    }
    int c_aligned = g.leaf(aligned);
    // MLP pooled inputs mirror their training-time roles: the input's own
    // pooled code (pre-alignment) and the reference's pooled code.
    int out = decode(g, bp, cfg, c_aligned, s_ref, global_pool(g, c_in), global_pool(g, c_ref),
                     &in_mask);

    const Tensor& gen = g.val(out);
    Tensor blended(input.shape);
    for (size_t i = 0; i < blended.data.size(); ++i)
        blended.data[i] = strength * gen.data[i] + (1.0f - strength) * input.data[i];
    check_finite(blended, "transfer_object");

    if (diag) {
        diag->hue_in = masked_hue_mean_deg(input, in_mask);
        diag->hue_ref = masked_hue_mean_deg(reference, ref_mask);
        diag->hue_out = masked_hue_mean_deg(blended, in_mask);
    }
    return blended;
}

Tensor composite(const Tensor& input,
                 const std::vector<std::pair<Tensor, Tensor>>& mask_and_result) {
    Tensor out = input;
    const int h = input.dim(1), w = input.dim(2);
    for (const auto& [mask, result] : mask_and_result) {
        if (!result.same_shape(input)) throw ShapeError("composite: result shape mismatch");
        if (mask.rank() != 2 || mask.dim(0) != h || mask.dim(1) != w)
            throw ShapeError("composite: mask shape mismatch");
        for (int c = 0; c < input.dim(0); ++c)
            for (int i = 0; i < h * w; ++i) {
                size_t idx = static_cast<size_t>(c) * h * w + i;
                float m = mask.data[static_cast<size_t>(i)];
                out.data[idx] = m * result.data[idx] + (1.0f - m) * out.data[idx];
            }
    }
    return out;
}

TransferResult run_transfer(const TransferRequest& request, const ModelParams& params,
                            const NetConfig& cfg) {
    TransferResult res;
    std::vector<std::pair<Tensor, Tensor>> layers;
    for (size_t j = 0; j < request.jobs.size(); ++j) {
        const TransferJob& job = request.jobs[j];
        JobDiagnostics diag;
        try {
            Tensor transferred =
                transfer_object(request.input, job.object_mask, job.reference,
                                job.reference_mask, job.strength, job.align_t, params, cfg, &diag);
            layers.emplace_back(job.object_mask, std::move(transferred));
        } catch (const Error& e) {
            throw ContractError("transfer job " + std::to_string(j) + ": " + e.what());
        }
        res.diagnostics.push_back(std::move(diag));
    }
    res.output = composite(request.input, layers);
    return res;
}

}  // namespace sentigan
