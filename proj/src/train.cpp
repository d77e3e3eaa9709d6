#include "sentigan/train.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "sentigan/image_io.hpp"
#include "sentigan/hue.hpp"
#include "sentigan/infer.hpp"

namespace sentigan {

float effective_lr(const AdamConfig& adam, std::int64_t step, int halve_every) {
    std::int64_t halvings = step / halve_every;
    return adam.lr / static_cast<float>(std::pow(2.0, static_cast<double>(halvings)));
}

void adam_step(ModelParams& params, const std::map<std::string, Tensor>& grads, AdamState& state,
               const AdamConfig& adam, int halve_every) {
    adam.validate();
    const float lr = effective_lr(adam, state.step, halve_every);
    const double t = static_cast<double>(state.step) + 1.0;
    const float bc1 = 1.0f - static_cast<float>(std::pow(adam.beta1, t));
    const float bc2 = 1.0f - static_cast<float>(std::pow(adam.beta2, t));
    for (const auto& [name, g] : grads) {
        auto pit = params.tensors.find(name);
        if (pit == params.tensors.end()) throw ContractError("adam_step: unknown parameter " + name);
        Tensor& p = pit->second;
        if (!p.same_shape(g)) throw ShapeError("adam_step: gradient shape mismatch for " + name);
        auto mit = state.moments.find(name);
        if (mit == state.moments.end())
            mit = state.moments.emplace(name, std::make_pair(Tensor(p.shape), Tensor(p.shape))).first;
        Tensor& m = mit->second.first;
        Tensor& v = mit->second.second;
        for (size_t i = 0; i < p.data.size(); ++i) {
            float gi = g.data[i];
            m.data[i] = adam.beta1 * m.data[i] + (1.0f - adam.beta1) * gi;
            v.data[i] = adam.beta2 * v.data[i] + (1.0f - adam.beta2) * gi * gi;
            float mhat = m.data[i] / bc1;
            float vhat = v.data[i] / bc2;
            p.data[i] -= lr * mhat / (std::sqrt(vhat) + adam.eps);
        }
    }
    ++state.step;
}

Trainer Trainer::create(const TrainConfig& cfg) {
    cfg.validate();
    Trainer t;
    t.cfg = cfg;
    t.rng = RngState{cfg.seed, 0};
    RngState init_rng = t.rng.derive(0xC0DEC0DEULL);
    t.params = init_params(cfg.net, init_rng);
    return t;
}

namespace {

struct SampleDraw {
    int corpus_index;
    int partner;  // index within the batch
    int object;   // mask index within the sample
    std::vector<float> style_prior;
};

std::vector<SampleDraw> draw_batch(Trainer& tr, const std::vector<CorpusSample>& corpus) {
    const int B = tr.cfg.batch_size;
    std::vector<SampleDraw> batch(static_cast<size_t>(B));
    for (int i = 0; i < B; ++i)
        batch[static_cast<size_t>(i)].corpus_index =
            static_cast<int>(tr.rng.next_below(corpus.size()));
    for (int i = 0; i < B; ++i) {
        SampleDraw& d = batch[static_cast<size_t>(i)];
        if (B > 1) {
            int j = static_cast<int>(tr.rng.next_below(static_cast<std::uint64_t>(B - 1)));
            d.partner = j >= i ? j + 1 : j;
        } else {
            d.partner = 0;
        }
        const CorpusSample& s = corpus[static_cast<size_t>(d.corpus_index)];
        d.object = static_cast<int>(tr.rng.next_below(s.masks.size()));
        d.style_prior.resize(static_cast<size_t>(tr.cfg.net.style_dim));
        for (float& v : d.style_prior) v = tr.rng.next_normal();
    }
    return batch;
}

}  // namespace

namespace {
constexpr const Tensor* kNoMask = nullptr;

// In-graph content alignment (the inference-time step at t=1): restandardize
// x per channel onto ref's channel statistics. Training the generator on
// aligned codes keeps the latent-reconstruction target consistent with the
// disentanglement loss and with what decode() sees at transfer time.
int align_code_op(Graph& g, int x, int ref, float eps) {
    const auto& v = g.val(ref);
    int mu = g.channel_weighted_mean(ref, -1);
    int diff = g.sub(ref, g.broadcast_chw(mu, v.dim(1), v.dim(2)));
    int var = g.channel_weighted_mean(g.mul(diff, diff), -1);
    int sd = g.sqrt_op(g.add_scalar(var, eps));
    // the donor statistics are targets, not trainable signal: gradient into
    // them would collapse code statistics across images
    mu = g.leaf(g.val(mu));
    sd = g.leaf(g.val(sd));
    return adain_op(g, x, sd, mu, -1, eps);
}
}

LossReport train_step(Trainer& tr, const std::vector<CorpusSample>& corpus) {
    tr.cfg.validate();
    if (corpus.empty()) throw ContractError("train_step: empty corpus");
    const NetConfig& net = tr.cfg.net;
    const int B = tr.cfg.batch_size;
    const int ds = net.style_dim;

    std::vector<SampleDraw> batch = draw_batch(tr, corpus);

    // ---- discriminator update ----
    float disc_value;
    {
        Graph g;
        auto bp = BoundParams<float>::bind(g, tr.params, is_discriminator_param);
        std::vector<int> imgs(static_cast<size_t>(B)), contents(static_cast<size_t>(B));
        for (int i = 0; i < B; ++i) {
            imgs[static_cast<size_t>(i)] =
                g.leaf(corpus[static_cast<size_t>(batch[static_cast<size_t>(i)].corpus_index)].image);
            contents[static_cast<size_t>(i)] = encode_content(g, bp, net, imgs[static_cast<size_t>(i)]);
        }
        int disc_sum = -1;
        for (int i = 0; i < B; ++i) {
            const SampleDraw& d = batch[static_cast<size_t>(i)];
            int s_rand = g.leaf(Tensor({ds}, d.style_prior));
            int c = contents[static_cast<size_t>(i)];
            int c_partner = contents[static_cast<size_t>(d.partner)];
            int fake = decode(g, bp, net, align_code_op(g, c, c_partner, net.eps), s_rand,
                              global_pool(g, c), global_pool(g, c_partner), kNoMask);
            auto [disc, gen] = adversarial_loss(g, discriminate(g, bp, net, imgs[static_cast<size_t>(i)]),
                                                discriminate(g, bp, net, fake));
            (void)gen;
            disc_sum = disc_sum < 0 ? disc : g.add(disc_sum, disc);
        }
        int disc_loss = g.scale(disc_sum, 1.0f / static_cast<float>(B));
        disc_value = g.val(disc_loss).data[0];
        auto grads = g.backward(disc_loss);
        std::map<std::string, Tensor> gmap;
        for (const auto& [name, id] : bp.ids)
            if (is_discriminator_param(name)) gmap.emplace(name, g.grad_of(grads, id));
        adam_step(tr.params, gmap, tr.opt_d, tr.cfg.adam, tr.cfg.halve_every);
    }

    // ---- generator / encoder update ----
    LossReport report;
    {
        Graph g;
        auto bp = BoundParams<float>::bind(
            g, tr.params, [](const std::string& n) { return !is_discriminator_param(n); });
        std::vector<int> imgs(static_cast<size_t>(B)), contents(static_cast<size_t>(B));
        for (int i = 0; i < B; ++i) {
            imgs[static_cast<size_t>(i)] =
                g.leaf(corpus[static_cast<size_t>(batch[static_cast<size_t>(i)].corpus_index)].image);
            contents[static_cast<size_t>(i)] = encode_content(g, bp, net, imgs[static_cast<size_t>(i)]);
        }
        int sum_gan = -1, sum_gm = -1, sum_gc = -1, sum_gs = -1;
        int sum_om = -1, sum_oc = -1, sum_os = -1, sum_gcd = -1;
        auto acc = [&g](int& slot, int term) { slot = slot < 0 ? term : g.add(slot, term); };

        for (int i = 0; i < B; ++i) {
            const SampleDraw& d = batch[static_cast<size_t>(i)];
            const CorpusSample& sample = corpus[static_cast<size_t>(d.corpus_index)];
            const Tensor& mask = sample.masks[static_cast<size_t>(d.object)].second;
            int img = imgs[static_cast<size_t>(i)];
            int c = contents[static_cast<size_t>(i)];
            int c_rand = contents[static_cast<size_t>(d.partner)];
            int pooled_c = global_pool(g, c);
            int pooled_rand = global_pool(g, c_rand);
            int s_rand = g.leaf(Tensor({ds}, d.style_prior));

            // image-level reconstruction
            int s_img = encode_style(g, bp, net, img, kNoMask);
            int recon = decode(g, bp, net, c, s_img, pooled_c, pooled_c, kNoMask);
            acc(sum_gm, mean_abs_diff(g, recon, img));

            // sampled-style generation, latent reconstruction, disentanglement;
            // the decoder sees the aligned code, so that is also the
            // latent-reconstruction target
            int c_al = align_code_op(g, c, c_rand, net.eps);
            int fake = decode(g, bp, net, c_al, s_rand, pooled_c, pooled_rand, kNoMask);
            int c_rec = encode_content(g, bp, net, fake);
            int s_rec = encode_style(g, bp, net, fake, kNoMask);
            acc(sum_gc, mean_abs_diff(g, c_rec, c_al));
            acc(sum_gs, mean_abs_diff(g, s_rec, s_rand));
            acc(sum_gcd, content_disentanglement_loss(g, c_rec, c, c_rand, net.eps));

            // object-level reconstruction (masked scope)
            int mask_img = g.leaf(mask);
            int s_obj = encode_style(g, bp, net, img, &mask);
            int recon_o = decode(g, bp, net, c, s_obj, pooled_c, pooled_c, &mask);
            acc(sum_om, mean_abs_diff(g, recon_o, img, mask_img));

            // object-level latent reconstruction
            int fake_o = decode(g, bp, net, c_al, s_rand, pooled_c, pooled_rand, &mask);
            int c_rec_o = encode_content(g, bp, net, fake_o);
            int mask_code = g.leaf(
                downsample_mask_nearest(mask, net.content_spatial(), net.content_spatial()));
            acc(sum_oc, mean_abs_diff(g, c_rec_o, c_al, mask_code));
            acc(sum_os, mean_abs_diff(g, encode_style(g, bp, net, fake_o, &mask), s_rand));

            // adversarial (generator side; D frozen in this graph)
            auto [disc, gen] = adversarial_loss(g, discriminate(g, bp, net, img),
                                                discriminate(g, bp, net, fake));
            (void)disc;
            acc(sum_gan, gen);
        }

        const float inv_b = 1.0f / static_cast<float>(B);
        int t_gan = g.scale(sum_gan, inv_b);
        int t_gm = g.scale(sum_gm, inv_b);
        int t_gc = g.scale(sum_gc, inv_b);
        int t_gs = g.scale(sum_gs, inv_b);
        int t_om = g.scale(sum_om, inv_b);
        int t_oc = g.scale(sum_oc, inv_b);
        int t_os = g.scale(sum_os, inv_b);
        int t_gcd = g.scale(sum_gcd, inv_b);

        const LossWeights& w = tr.cfg.weights;
        std::array<int, 8> ids = {t_gan, t_gm, t_gc, t_gs, t_om, t_oc, t_os, t_gcd};
        std::array<float, 8> lam = w.as_array();
        int objective = -1;
        for (size_t k = 0; k < 8; ++k) {
            if (lam[k] == 0.0f) continue;  // zero-weight terms never join the backward graph
            int weighted = g.scale(ids[k], lam[k]);
            objective = objective < 0 ? weighted : g.add(objective, weighted);
        }
        if (objective < 0) throw ContractError("train_step: all loss weights are zero");

        auto grads = g.backward(objective);
        std::map<std::string, Tensor> gmap;
        for (const auto& [name, id] : bp.ids)
            if (!is_discriminator_param(name)) gmap.emplace(name, g.grad_of(grads, id));
        adam_step(tr.params, gmap, tr.opt_g, tr.cfg.adam, tr.cfg.halve_every);

        report.gan = g.val(t_gan).data[0];
        report.g_m = g.val(t_gm).data[0];
        report.g_c = g.val(t_gc).data[0];
        report.g_s = g.val(t_gs).data[0];
        report.o_m = g.val(t_om).data[0];
        report.o_c = g.val(t_oc).data[0];
        report.o_s = g.val(t_os).data[0];
        report.g_cd = g.val(t_gcd).data[0];
        report.total = total_loss(report.terms(), w);
        report.disc = disc_value;
    }

    ++tr.iteration;
    return report;
}

// ---- checkpoint serialization ----

namespace {

constexpr char kMagic[4] = {'S', 'G', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct Cursor {
    const std::uint8_t* p;
    size_t remaining;

    void need(size_t n) const {
        if (n > remaining) throw FormatError("checkpoint file truncated");
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        remaining -= 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        remaining -= 4;
        return v;
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        remaining -= n;
        return s;
    }
};

float bits_to_f32(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

std::uint32_t f32_to_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

void append_tensor(std::string& out, const std::string& name, const Tensor& t) {
    if (name.size() > 0xFFFF) throw ContractError("tensor name too long");
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.append(name);
    if (t.rank() > 0xFF) throw ContractError("tensor rank too large");
    out.push_back(static_cast<char>(t.rank()));
    for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : t.data) put_u32(out, f32_to_bits(v));
}

// 64-bit values ride in two bit-cast f32 words so the file stays a pure
// named-f32-tensor container.
Tensor meta_tensor(const Checkpoint& c) {
    auto lo = [](std::uint64_t v) { return bits_to_f32(static_cast<std::uint32_t>(v & 0xFFFFFFFFULL)); };
    auto hi = [](std::uint64_t v) { return bits_to_f32(static_cast<std::uint32_t>(v >> 32)); };
    std::vector<float> f = {
        lo(static_cast<std::uint64_t>(c.iteration)), hi(static_cast<std::uint64_t>(c.iteration)),
        lo(static_cast<std::uint64_t>(c.opt_d.step)), hi(static_cast<std::uint64_t>(c.opt_d.step)),
        lo(static_cast<std::uint64_t>(c.opt_g.step)), hi(static_cast<std::uint64_t>(c.opt_g.step)),
        lo(c.rng.seed), hi(c.rng.seed),
        lo(c.rng.counter), hi(c.rng.counter),
        bits_to_f32(static_cast<std::uint32_t>(c.net.image_size)),
        bits_to_f32(static_cast<std::uint32_t>(c.net.in_channels)),
        bits_to_f32(static_cast<std::uint32_t>(c.net.base_channels)),
        bits_to_f32(static_cast<std::uint32_t>(c.net.content_channels)),
        bits_to_f32(static_cast<std::uint32_t>(c.net.style_dim)),
        bits_to_f32(static_cast<std::uint32_t>(c.net.mlp_hidden)),
        bits_to_f32(static_cast<std::uint32_t>(c.net.res_blocks)),
        c.net.eps,
    };
    const int n = static_cast<int>(f.size());
    return Tensor({n}, std::move(f));
}

void apply_meta(Checkpoint& c, const Tensor& t) {
    if (t.numel() != 18) throw FormatError("checkpoint meta block has unexpected size");
    auto u64_at = [&t](int i) {
        return static_cast<std::uint64_t>(f32_to_bits(t.data[static_cast<size_t>(i)])) |
               (static_cast<std::uint64_t>(f32_to_bits(t.data[static_cast<size_t>(i + 1)])) << 32);
    };
    auto u32_at = [&t](int i) { return f32_to_bits(t.data[static_cast<size_t>(i)]); };
    c.iteration = static_cast<std::int64_t>(u64_at(0));
    c.opt_d.step = static_cast<std::int64_t>(u64_at(2));
    c.opt_g.step = static_cast<std::int64_t>(u64_at(4));
    c.rng.seed = u64_at(6);
    c.rng.counter = u64_at(8);
    c.net.image_size = static_cast<int>(u32_at(10));
    c.net.in_channels = static_cast<int>(u32_at(11));
    c.net.base_channels = static_cast<int>(u32_at(12));
    c.net.content_channels = static_cast<int>(u32_at(13));
    c.net.style_dim = static_cast<int>(u32_at(14));
    c.net.mlp_hidden = static_cast<int>(u32_at(15));
    c.net.res_blocks = static_cast<int>(u32_at(16));
    c.net.eps = t.data[17];
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::vector<std::pair<std::string, const Tensor*>> entries;
    Tensor meta = meta_tensor(ckpt);
    entries.emplace_back("meta/state", &meta);
    for (const auto& [name, t] : ckpt.params.tensors) entries.emplace_back("param/" + name, &t);
    for (const auto& [name, mv] : ckpt.opt_d.moments) {
        entries.emplace_back("optd/m/" + name, &mv.first);
        entries.emplace_back("optd/v/" + name, &mv.second);
    }
    for (const auto& [name, mv] : ckpt.opt_g.moments) {
        entries.emplace_back("optg/m/" + name, &mv.first);
        entries.emplace_back("optg/v/" + name, &mv.second);
    }

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) append_tensor(out, name, *t);
    put_u32(out, static_cast<std::uint32_t>(
                     ::crc32(0, reinterpret_cast<const Bytef*>(out.data()),
                             static_cast<uInt>(out.size()))));
    atomic_write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    if (bytes.size() < 12 + 4) throw FormatError("checkpoint file truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("bad checkpoint magic; expected \"SGN1\"");
    std::uint32_t stored_crc = 0;
    for (int i = 0; i < 4; ++i)
        stored_crc |= static_cast<std::uint32_t>(
                          static_cast<std::uint8_t>(bytes[bytes.size() - 4 + static_cast<size_t>(i)]))
                      << (8 * i);
    std::uint32_t actual_crc = static_cast<std::uint32_t>(
        ::crc32(0, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size() - 4)));
    if (stored_crc != actual_crc) throw FormatError("checkpoint checksum mismatch");

    Cursor cur{reinterpret_cast<const std::uint8_t*>(bytes.data()) + 4, bytes.size() - 8};
    std::uint32_t version = cur.u32();
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    std::uint32_t count = cur.u32();

    Checkpoint ckpt;
    bool have_meta = false;
    for (std::uint32_t k = 0; k < count; ++k) {
        std::uint16_t name_len = cur.u16();
        std::string name = cur.bytes(name_len);
        cur.need(1);
        int rank = static_cast<int>(*cur.p);
        cur.p += 1;
        cur.remaining -= 1;
        std::vector<int> shape(static_cast<size_t>(rank));
        for (int i = 0; i < rank; ++i) {
            std::uint32_t d = cur.u32();
            if (d == 0 || d > (1u << 28)) throw FormatError("checkpoint tensor dim out of range");
            shape[static_cast<size_t>(i)] = static_cast<int>(d);
        }
        Tensor t(shape);
        for (float& v : t.data) v = bits_to_f32(cur.u32());

        if (name == "meta/state") {
            apply_meta(ckpt, t);
            have_meta = true;
        } else if (name.rfind("param/", 0) == 0) {
            ckpt.params.tensors.emplace(name.substr(6), std::move(t));
        } else if (name.rfind("optd/m/", 0) == 0) {
            ckpt.opt_d.moments[name.substr(7)].first = std::move(t);
        } else if (name.rfind("optd/v/", 0) == 0) {
            ckpt.opt_d.moments[name.substr(7)].second = std::move(t);
        } else if (name.rfind("optg/m/", 0) == 0) {
            ckpt.opt_g.moments[name.substr(7)].first = std::move(t);
        } else if (name.rfind("optg/v/", 0) == 0) {
            ckpt.opt_g.moments[name.substr(7)].second = std::move(t);
        } else {
            throw FormatError("checkpoint contains unknown tensor name: " + name);
        }
    }
    if (cur.remaining != 0) throw FormatError("checkpoint has trailing bytes");
    if (!have_meta) throw FormatError("checkpoint lacks its meta block");
    if (ckpt.params.tensors.empty()) throw FormatError("checkpoint holds no parameters");
    ckpt.net.validate();
    return ckpt;
}

Checkpoint checkpoint_of(const Trainer& t) {
    Checkpoint c;
    c.net = t.cfg.net;
    c.params = t.params;
    c.opt_d = t.opt_d;
    c.opt_g = t.opt_g;
    c.iteration = t.iteration;
    c.rng = t.rng;
    return c;
}

Trainer trainer_from(const Checkpoint& ckpt, const TrainConfig& cfg) {
    TrainConfig merged = cfg;
    merged.net = ckpt.net;
    merged.validate();
    Trainer t;
    t.cfg = merged;
    t.params = ckpt.params;
    t.opt_d = ckpt.opt_d;
    t.opt_g = ckpt.opt_g;
    t.rng = ckpt.rng;
    t.iteration = ckpt.iteration;
    return t;
}

float mean_reconstruction_error(const ModelParams& params, const NetConfig& cfg,
                                const std::vector<CorpusSample>& corpus) {
    double total = 0.0;
    for (const CorpusSample& s : corpus) {
        Graph g;
        auto bp = BoundParams<float>::bind(g, params, nullptr);
        int img = g.leaf(s.image);
        int c = encode_content(g, bp, cfg, img);
        int style = encode_style(g, bp, cfg, img, kNoMask);
        int pooled = global_pool(g, c);
        int recon = decode(g, bp, cfg, c, style, pooled, pooled, kNoMask);
        total += g.val(mean_abs_diff(g, recon, img)).data[0];
    }
    return static_cast<float>(total / static_cast<double>(corpus.size()));
}

float eval_hue_shift(const ModelParams& params, const NetConfig& cfg,
                     const std::vector<CorpusSample>& corpus, int trials, RngState& rng) {
    if (trials < 1) throw ContractError("eval_hue_shift: trials must be >= 1");
    std::vector<size_t> warm, cold;
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].anp_adjective == "warm") warm.push_back(i);
        else if (corpus[i].anp_adjective == "cold") cold.push_back(i);
    }
    if (warm.empty() || cold.empty())
        throw ContractError("eval_hue_shift: corpus must contain both palettes");

    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        bool cold_to_warm = (t % 2 == 0);
        const auto& in_pool = cold_to_warm ? cold : warm;
        const auto& ref_pool = cold_to_warm ? warm : cold;
        const CorpusSample& input = corpus[in_pool[rng.next_below(in_pool.size())]];
        const CorpusSample& ref = corpus[ref_pool[rng.next_below(ref_pool.size())]];
        JobDiagnostics diag;
        transfer_object(input.image, input.masks.front().second, ref.image,
                        ref.masks.front().second, 1.0f, 1.0f, params, cfg, &diag);
        float gap_in = hue_distance_deg(diag.hue_in, diag.hue_ref);
        float gap_out = hue_distance_deg(diag.hue_out, diag.hue_ref);
        if (gap_in > 1e-3f) sum += static_cast<double>((gap_in - gap_out) / gap_in);
    }
    return static_cast<float>(sum / trials);
}

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto strip = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = strip(t.substr(0, eq));
        std::string val = strip(t.substr(eq + 1));
        try {
            if (key == "iters") cfg.iters = std::stoi(val);
            else if (key == "batch_size") cfg.batch_size = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "halve_every") cfg.halve_every = std::stoi(val);
            else if (key == "lr") cfg.adam.lr = std::stof(val);
            else if (key == "beta1") cfg.adam.beta1 = std::stof(val);
            else if (key == "beta2") cfg.adam.beta2 = std::stof(val);
            else if (key == "adam_eps") cfg.adam.eps = std::stof(val);
            else if (key == "lambda1") cfg.weights.gan = std::stof(val);
            else if (key == "lambda2") cfg.weights.g_m = std::stof(val);
            else if (key == "lambda3") cfg.weights.g_c = std::stof(val);
            else if (key == "lambda4") cfg.weights.g_s = std::stof(val);
            else if (key == "lambda5") cfg.weights.o_m = std::stof(val);
            else if (key == "lambda6") cfg.weights.o_c = std::stof(val);
            else if (key == "lambda7") cfg.weights.o_s = std::stof(val);
            else if (key == "lambda8") cfg.weights.g_cd = std::stof(val);
            else if (key == "image_size") cfg.net.image_size = std::stoi(val);
            else if (key == "base_channels") cfg.net.base_channels = std::stoi(val);
            else if (key == "content_channels") cfg.net.content_channels = std::stoi(val);
            else if (key == "style_dim") cfg.net.style_dim = std::stoi(val);
            else if (key == "mlp_hidden") cfg.net.mlp_hidden = std::stoi(val);
            else if (key == "res_blocks") cfg.net.res_blocks = std::stoi(val);
            else throw FormatError("config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw FormatError("config: bad value for key '" + key + "'");
        } catch (const std::out_of_range&) {
            throw FormatError("config: value out of range for key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace sentigan
