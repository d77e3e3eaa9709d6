#pragma once

#include <string>
#include <vector>

#include "sentigan/nets.hpp"

namespace sentigan {

// One object to transfer: its mask in the input frame, a reference image
// with its own object mask, the blend strength and the content alignment
// strength (t = 1 reproduces the full stat remapping).
struct TransferJob {
    Tensor object_mask;      // HxW in [0,1]
    Tensor reference;        // 3xHxW in [-1,1]
    Tensor reference_mask;   // HxW
    float strength = 1.0f;
    float align_t = 1.0f;
};

struct TransferRequest {
    Tensor input;  // 3xHxW in [-1,1]
    std::vector<TransferJob> jobs;
};

struct JobDiagnostics {
    std::vector<float> aligned_mean;  // per-channel stats of the aligned code
    std::vector<float> aligned_std;
    float hue_in = 0;   // masked hue means, degrees
    float hue_ref = 0;
    float hue_out = 0;
};

struct TransferResult {
    Tensor output;
    std::vector<JobDiagnostics> diagnostics;
};

// Channel-wise remap of c_in's mean/std toward c_ref's:
//   mu* = (1-t) mu(c_in) + t mu(c_ref), sigma* likewise,
//   out = sigma* (c_in - mu)/sigma + mu*.
// At t = 1 the output's channel stats equal c_ref's exactly (population
// convention, no eps).
Tensor align_content(const Tensor& c_in, const Tensor& c_ref, float t);

// Full single-object path: encode, align, masked decode, strength blend.
Tensor transfer_object(const Tensor& input, const Tensor& in_mask, const Tensor& reference,
                       const Tensor& ref_mask, float strength, float align_t,
                       const ModelParams& params, const NetConfig& cfg,
                       JobDiagnostics* diag = nullptr);

// Painter's-order compositing: later jobs win on overlap; pixels outside
// every mask stay bitwise equal to the input.
Tensor composite(const Tensor& input, const std::vector<std::pair<Tensor, Tensor>>& mask_and_result);

TransferResult run_transfer(const TransferRequest& request, const ModelParams& params,
                            const NetConfig& cfg);

}  // namespace sentigan
