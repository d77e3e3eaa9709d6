#pragma once

#include <map>
#include <string>
#include <vector>

#include "sentigan/corpus.hpp"
#include "sentigan/losses.hpp"
#include "sentigan/nets.hpp"

namespace sentigan {

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.5f;
    float beta2 = 0.999f;
    float eps = 1e-8f;

    void validate() const {
        if (!(lr > 0.0f)) throw ContractError("learning rate must be positive");
        if (!(beta1 >= 0.0f && beta1 < 1.0f && beta2 >= 0.0f && beta2 < 1.0f))
            throw ContractError("Adam betas must lie in [0, 1)");
    }
};

struct TrainConfig {
    LossWeights weights;
    AdamConfig adam;
    int halve_every = 5000;  // iterations between halvings of the learning rate
    int iters = 3000;
    int batch_size = 4;
    std::uint64_t seed = 1;
    NetConfig net;

    void validate() const {
        weights.validate();
        adam.validate();
        net.validate();
        if (iters < 1) throw ContractError("iters must be >= 1");
        if (batch_size < 1) throw ContractError("batch_size must be >= 1");
        if (halve_every < 1) throw ContractError("halve_every must be >= 1");
    }
};

// First/second moment per parameter plus the shared step counter.
struct AdamState {
    std::map<std::string, std::pair<Tensor, Tensor>> moments;  // name -> (m, v)
    std::int64_t step = 0;
};

// Bias-corrected Adam over the (param, grad) pairs present in `grads`,
// with effective lr = lr / 2^floor(step / halve_every) where `step` is
// the number of previously completed updates. Increments state.step.
void adam_step(ModelParams& params, const std::map<std::string, Tensor>& grads, AdamState& state,
               const AdamConfig& adam, int halve_every);

float effective_lr(const AdamConfig& adam, std::int64_t step, int halve_every);

// Complete training state. The discriminator and the generator/encoder
// groups keep separate optimizer states; each advances once per
// train_step, so both step counters equal the iteration count.
struct Trainer {
    TrainConfig cfg;
    ModelParams params;
    AdamState opt_d;
    AdamState opt_g;
    RngState rng;
    std::int64_t iteration = 0;

    static Trainer create(const TrainConfig& cfg);
};

// One training iteration: samples a batch (and per-sample object, style
// prior draw and random content partner), does one discriminator update
// followed by one generator/encoder update, and reports all eight terms.
LossReport train_step(Trainer& trainer, const std::vector<CorpusSample>& corpus);

// ---- checkpoint persistence ----
// Binary format: magic "SGN1", u32 LE version = 1, u32 tensor count, per
// tensor { u16 name length, UTF-8 name, u8 rank, rank x u32 dims, raw LE
// f32 payload }, and a trailing u32 CRC-32 of all preceding bytes.
struct Checkpoint {
    NetConfig net;
    ModelParams params;
    AdamState opt_d;
    AdamState opt_g;
    std::int64_t iteration = 0;
    RngState rng;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint checkpoint_of(const Trainer& t);
Trainer trainer_from(const Checkpoint& ckpt, const TrainConfig& cfg);

// Mean reconstruction error of G(E_c(i), E_s(i), P, P) over the corpus.
float mean_reconstruction_error(const ModelParams& params, const NetConfig& cfg,
                                const std::vector<CorpusSample>& corpus);

// Toy sentiment oracle: cross-palette transfers at strength 1, t = 1;
// returns the mean hue gap-closure ratio over `trials` random pairs.
float eval_hue_shift(const ModelParams& params, const NetConfig& cfg,
                     const std::vector<CorpusSample>& corpus, int trials, RngState& rng);

// ---- "key = value" train config files (unknown keys are errors) ----
TrainConfig parse_train_config(const std::string& text);

}  // namespace sentigan
