// Acceptance gate: run as `acceptance <criterion 1..7> [cli-binary-path]`.
// Prints one "criterion N: PASS|FAIL" line and exits nonzero on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sentigan/hue.hpp"
#include "sentigan/image_io.hpp"
#include "sentigan/infer.hpp"
#include "sentigan/mask_extract.hpp"
#include "sentigan/train.hpp"

namespace fs = std::filesystem;
using namespace sentigan;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure {
    std::string detail;
};

void expect(bool ok, const std::string& detail) {
    if (!ok) throw Failure{detail};
}

// ---- shared fixtures ----

SyntheticCorpusSpec acceptance_corpus_spec() {
    SyntheticCorpusSpec spec;
    spec.count = 64;
    spec.image_size = 32;
    spec.seed = 2601;
    // one flat-shaded object over a gently textured background: hard enough
    // that the autoencoder must carry shape and palette through the codes,
    // easy enough that 3000 desk-scale steps reach a clean reconstruction
    spec.max_objects = 1;
    spec.background_amplitude = 0.02f;
    return spec;
}

TrainConfig acceptance_train_config() {
    TrainConfig cfg;  // reference weights, Adam 1e-4 / 0.5 / 0.999, batch 4
    cfg.seed = 17;
    return cfg;
}

fs::path cache_path(int iters) {
    return fs::temp_directory_path() /
           ("sentigan_acceptance_" + std::to_string(iters) + ".ckpt");
}

// Train (or resume from the deterministic cache) up to `iters` and cache
// the result so later criteria can reuse the exact same model.
Trainer trained_model(int iters, const std::vector<CorpusSample>& corpus) {
    TrainConfig cfg = acceptance_train_config();
    Trainer t = Trainer::create(cfg);
    for (int from : {10000, 3000}) {
        if (from > iters) continue;
        fs::path p = cache_path(from);
        if (fs::exists(p)) {
            try {
                t = trainer_from(load_checkpoint(p.string()), cfg);
                break;
            } catch (const Error&) {
                t = Trainer::create(cfg);  // stale cache; retrain
            }
        }
    }
    while (t.iteration < iters) train_step(t, corpus);
    save_checkpoint(checkpoint_of(t), cache_path(iters).string());
    return t;
}

double stat_distance(const ChannelStats& a, const ChannelStats& b) {
    double d = 0;
    for (size_t i = 0; i < a.mean.size(); ++i) {
        d += std::fabs(static_cast<double>(a.mean[i]) - b.mean[i]);
        d += std::fabs(static_cast<double>(a.std[i]) - b.std[i]);
    }
    return d;
}

Tensor encode_content_plain(const ModelParams& params, const NetConfig& cfg, const Tensor& img) {
    Graph g;
    auto bp = BoundParams<float>::bind(g, params, nullptr);
    return g.val(encode_content(g, bp, cfg, g.leaf(img)));
}

// ---- criterion 1: gradient fidelity ----

void criterion1() {
    auto t0 = Clock::now();
    const double kEps = 1e-3, kTol = 1e-3;
    RngState rng{90125, 0};

    auto rnd = [&rng](std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
        TensorT<double> t(std::move(shape));
        for (double& v : t.data) v = rng.next_uniform(static_cast<float>(lo), static_cast<float>(hi));
        return t;
    };
    auto off_kink = [&rnd, &rng](std::vector<int> shape) {
        auto t = rnd(std::move(shape));
        for (double& v : t.data) v += v >= 0 ? 0.1 : -0.1;
        return t;
    };

    using G = GraphT<double>;
    using Ids = std::vector<int>;
    int ops = 0;
    auto run = [&](const char* name, const GradCheckFn& f,
                   const std::function<std::vector<TensorT<double>>()>& make) {
        for (int trial = 0; trial < 20; ++trial) {
            double err = grad_check(f, make(), kEps);
            expect(err < kTol, std::string(name) + " trial " + std::to_string(trial) +
                                   " rel err " + std::to_string(err));
        }
        ++ops;
    };

    run("add", [](G& g, const Ids& in) { return g.sum_all(g.mul(g.add(in[0], in[1]), in[0])); },
        [&] { return std::vector{rnd({2, 3}), rnd({2, 3})}; });
    run("sub", [](G& g, const Ids& in) { return g.sum_all(g.mul(g.sub(in[0], in[1]), in[1])); },
        [&] { return std::vector{rnd({2, 3}), rnd({2, 3})}; });
    run("mul", [](G& g, const Ids& in) { return g.sum_all(g.mul(in[0], in[1])); },
        [&] { return std::vector{rnd({4}), rnd({4})}; });
    run("div", [](G& g, const Ids& in) { return g.sum_all(g.div(in[0], in[1])); },
        [&] { return std::vector{rnd({4}), rnd({4}, 0.5, 1.5)}; });
    run("scale/add_scalar",
        [](G& g, const Ids& in) { return g.sum_all(g.add_scalar(g.scale(in[0], 2.5), 0.75)); },
        [&] { return std::vector{rnd({6})}; });
    run("relu", [](G& g, const Ids& in) { return g.sum_all(g.relu(in[0])); },
        [&] { return std::vector{off_kink({6})}; });
    run("leaky_relu", [](G& g, const Ids& in) { return g.sum_all(g.leaky_relu(in[0], 0.2)); },
        [&] { return std::vector{off_kink({6})}; });
    run("tanh", [](G& g, const Ids& in) { return g.sum_all(g.tanh_op(in[0])); },
        [&] { return std::vector{rnd({5})}; });
    run("abs", [](G& g, const Ids& in) { return g.sum_all(g.abs_op(in[0])); },
        [&] { return std::vector{off_kink({6})}; });
    run("sqrt", [](G& g, const Ids& in) { return g.sum_all(g.sqrt_op(in[0])); },
        [&] { return std::vector{rnd({5}, 0.5, 2.0)}; });
    run("softplus", [](G& g, const Ids& in) { return g.sum_all(g.softplus(in[0])); },
        [&] { return std::vector{rnd({5}, -2.0, 2.0)}; });
    run("mean_all", [](G& g, const Ids& in) { return g.mean_all(g.mul(in[0], in[0])); },
        [&] { return std::vector{rnd({3, 4})}; });
    run("concat/slice",
        [](G& g, const Ids& in) {
            int c = g.concat({in[0], in[1]});
            return g.sum_all(g.mul(g.slice(c, 1, 4), g.slice(c, 2, 4)));
        },
        [&] { return std::vector{rnd({3}), rnd({4})}; });
    run("pool",
        [](G& g, const Ids& in) {
            int p = g.channel_weighted_mean(in[0], -1);
            return g.sum_all(g.mul(p, p));
        },
        [&] { return std::vector{rnd({2, 3, 3})}; });
    run("masked pool",
        [](G& g, const Ids& in) {
            int m = g.leaf(TensorT<double>({3, 3}, {1, 0, 1, 0, 0.5, 0, 1, 0, 0}));
            int p = g.channel_weighted_mean(in[0], m);
            return g.sum_all(g.mul(p, p));
        },
        [&] { return std::vector{rnd({2, 3, 3})}; });
    run("broadcast",
        [](G& g, const Ids& in) {
            int b = g.broadcast_chw(in[0], 3, 2);
            return g.sum_all(g.mul(b, b));
        },
        [&] { return std::vector{rnd({4})}; });
    run("mask multiply",
        [](G& g, const Ids& in) {
            int m = g.leaf(TensorT<double>({2, 2}, {1, 0, 0.5, 1}));
            return g.sum_all(g.mul_mask_hw(g.mul(in[0], in[0]), m));
        },
        [&] { return std::vector{rnd({3, 2, 2})}; });
    run("linear",
        [](G& g, const Ids& in) {
            int y = g.linear(in[0], in[1], in[2]);
            return g.sum_all(g.mul(y, y));
        },
        [&] { return std::vector{rnd({4}), rnd({3, 4}), rnd({3})}; });
    run("conv2d",
        [](G& g, const Ids& in) {
            int y = g.conv2d(in[0], in[1], in[2], 2, 1);
            return g.sum_all(g.mul(y, y));
        },
        [&] { return std::vector{rnd({2, 4, 4}), rnd({3, 2, 3, 3}), rnd({3})}; });
    run("upsample2x",
        [](G& g, const Ids& in) {
            int y = g.upsample2x(in[0]);
            return g.sum_all(g.mul(y, y));
        },
        [&] { return std::vector{rnd({2, 3, 3})}; });
    run("adain",
        [](G& g, const Ids& in) {
            int m = g.leaf(TensorT<double>({2, 2}, {1, 0, 1, 1}));
            int y = adain_op(g, in[0], in[1], in[2], m, 1e-3);
            return g.sum_all(g.mul(y, y));
        },
        [&] { return std::vector{rnd({2, 2, 2}), rnd({2}), rnd({2})}; });
    run("instance norm",
        [](G& g, const Ids& in) {
            int y = instance_norm_op(g, in[0], 1e-3);
            return g.sum_all(g.mul(y, y));
        },
        [&] { return std::vector{rnd({2, 3, 3})}; });

    // end-to-end objective (miniature config, image_size 8): weighted sum of
    // all nonzero-weight terms, differentiated with respect to every
    // parameter tensor and both images.
    NetConfig net;
    net.image_size = 8;
    net.base_channels = 4;
    net.content_channels = 8;
    net.style_dim = 4;
    net.mlp_hidden = 16;
    RngState prng{5150, 0};
    ModelParams params = init_params(net, prng);
    LossWeights w;

    std::vector<std::string> names;
    std::vector<TensorT<double>> inputs;
    for (const auto& [name, t] : params.tensors) {
        names.push_back(name);
        inputs.push_back(t.cast<double>());
    }
    const size_t n_params = inputs.size();
    inputs.push_back(rnd({3, 8, 8}, -0.9, 0.9));  // input image
    inputs.push_back(rnd({3, 8, 8}, -0.9, 0.9));  // partner image
    inputs.push_back(rnd({4}));                   // style prior draw
    TensorT<double> mask({8, 8});
    for (int y = 2; y < 7; ++y)
        for (int x = 1; x < 6; ++x) mask.data[static_cast<size_t>(y) * 8 + x] = 1.0;

    // The donor branch feeds the objective only through stop-gradient
    // statistics (alignment target, disentanglement donor).  Freeze those
    // values up front so the checked function is smooth in its inputs; the
    // live pooled-donor path still exercises the partner encoder gradient.
    TensorT<double> frozen_rand, frozen_mu, frozen_sd;
    {
        GraphT<double> g;
        BoundParams<double> bp;
        for (size_t k = 0; k < n_params; ++k) bp.ids[names[k]] = g.leaf(inputs[k]);
        int c_rand = encode_content(g, bp, net, g.leaf(inputs[n_params + 1]));
        int mu = g.channel_weighted_mean(c_rand, -1);
        int diff = g.sub(c_rand, g.broadcast_chw(mu, g.val(c_rand).dim(1), g.val(c_rand).dim(2)));
        int sd = g.sqrt_op(g.add_scalar(g.channel_weighted_mean(g.mul(diff, diff), -1),
                                        static_cast<double>(net.eps)));
        frozen_rand = g.val(c_rand);
        frozen_mu = g.val(mu);
        frozen_sd = g.val(sd);
    }

    GradCheckFn objective = [&](GraphT<double>& g, const Ids& in) {
        ModelParams unused;  // bindings come from grad-check leaves instead
        BoundParams<double> bp;
        for (size_t k = 0; k < n_params; ++k) bp.ids[names[k]] = in[k];
        int img = in[n_params];
        int partner = in[n_params + 1];
        int s_rand = in[n_params + 2];
        double eps = static_cast<double>(net.eps);

        int c = encode_content(g, bp, net, img);
        int c_rand = encode_content(g, bp, net, partner);
        int pooled_c = global_pool(g, c);
        int pooled_rand = global_pool(g, c_rand);

        int s_img = encode_style(g, bp, net, img);
        int recon = decode(g, bp, net, c, s_img, pooled_c, pooled_c);
        int l_gm = mean_abs_diff(g, recon, img);

        // the cross-style decode consumes the code aligned onto the partner's
        // channel statistics, matching the inference path; the statistics are
        // stop-gradient targets, supplied here as the frozen constants
        int c_al = adain_op(g, c, g.leaf(frozen_sd), g.leaf(frozen_mu), -1, eps);
        int fake = decode(g, bp, net, c_al, s_rand, pooled_c, pooled_rand);
        int c_rec = encode_content(g, bp, net, fake);
        int s_rec = encode_style(g, bp, net, fake);
        int l_gc = mean_abs_diff(g, c_rec, c_al);
        int l_gs = mean_abs_diff(g, s_rec, s_rand);
        int l_gcd = content_disentanglement_loss(g, c_rec, c, g.leaf(frozen_rand), eps);

        int m_img = g.leaf(mask);
        int s_obj = encode_style(g, bp, net, img, &mask);
        int recon_o = decode(g, bp, net, c, s_obj, pooled_c, pooled_c, &mask);
        int l_om = mean_abs_diff(g, recon_o, img, m_img);

        auto [l_disc, l_gan] = adversarial_loss(g, discriminate(g, bp, net, img),
                                                discriminate(g, bp, net, fake));
        (void)l_disc;

        int total = g.scale(l_gan, w.gan);
        total = g.add(total, g.scale(l_gm, w.g_m));
        total = g.add(total, g.scale(l_gc, w.g_c));
        total = g.add(total, g.scale(l_gs, w.g_s));
        total = g.add(total, g.scale(l_om, w.o_m));
        total = g.add(total, g.scale(l_gcd, w.g_cd));
        return total;
    };

    RngState coord_rng{31337, 0};
    double err = grad_check_sampled(objective, inputs, kEps, 2, coord_rng);
    expect(err < kTol, "end-to-end objective rel err " + std::to_string(err));

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect(secs < 120.0, "runtime " + std::to_string(secs) + "s exceeds 2 minutes");
    std::printf("  %d primitives x 20 trials + end-to-end objective, %.1fs\n", ops, secs);
}

// ---- criterion 2: mask-fusion oracle ----

void criterion2() {
    RngState rng{424242, 0};
    const float alphas[] = {0.5f, 1.0f, 1.4f, 4.0f};
    for (int trial = 0; trial < 1000; ++trial) {
        int h = 1 + static_cast<int>(rng.next_below(8));
        int w = 1 + static_cast<int>(rng.next_below(8));
        int num_classes = 1 + static_cast<int>(rng.next_below(4));
        std::vector<int> labels(static_cast<size_t>(h) * w);
        for (int& l : labels) l = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_classes)));
        SegmentationMap s = SegmentationMap::from_labels(h, w, labels);
        Tensor grid({h, w});
        for (float& v : grid.data) v = rng.next_uniform(0.0f, 1.0f);
        grid.data[rng.next_below(grid.data.size())] += 0.5f;
        AttentionMap a = AttentionMap::from_grid(grid);
        MaskFusionConfig cfg;
        cfg.alpha = alphas[rng.next_below(4)];

        // brute-force evaluation of the selection formula
        std::map<int, double> att_sum;
        std::map<int, int> count;
        for (int i = 0; i < h * w; ++i) {
            att_sum[labels[static_cast<size_t>(i)]] += grid.data[static_cast<size_t>(i)];
            count[labels[static_cast<size_t>(i)]] += 1;
        }
        int best = -1;
        double best_score = -1.0;
        for (const auto& [cls, n] : count) {
            double score = std::pow(att_sum[cls], static_cast<double>(cfg.alpha)) / n;
            if (score > best_score) {
                best_score = score;
                best = cls;
            }
        }
        int got = select_segment_class(a, s, cfg);
        expect(got == best, "trial " + std::to_string(trial) + ": got " + std::to_string(got) +
                                ", oracle " + std::to_string(best));
    }
    std::printf("  1000/1000 instances agree with the brute-force oracle\n");
}

// ---- criterion 3: autoencoding ----

void criterion3() {
    auto t0 = Clock::now();
    auto corpus = generate_corpus(acceptance_corpus_spec());
    Trainer t = trained_model(3000, corpus);
    float err = mean_reconstruction_error(t.params, t.cfg.net, corpus);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("  reconstruction MAE %.4f after 3000 steps (%.0fs)\n", err, secs);
    expect(err < 0.08f, "reconstruction MAE " + std::to_string(err) + " >= 0.08");
    expect(secs < 900.0, "runtime " + std::to_string(secs) + "s exceeds 15 minutes");
}

// ---- criterion 4: disentanglement direction ----

void criterion4() {
    auto corpus = generate_corpus(acceptance_corpus_spec());
    Trainer t = trained_model(3000, corpus);
    const NetConfig& net = t.cfg.net;

    RngState rng{604, 0};
    int closer = 0;
    const int kPairs = 50;
    for (int k = 0; k < kPairs; ++k) {
        // a transfer pair crosses sentiments: the reference supplies the
        // opposite palette's statistics
        const CorpusSample& a = corpus[rng.next_below(corpus.size())];
        const CorpusSample* bp_sample = &corpus[rng.next_below(corpus.size())];
        while (bp_sample->anp_adjective == a.anp_adjective)
            bp_sample = &corpus[rng.next_below(corpus.size())];
        const CorpusSample& b = *bp_sample;
        // align the content code onto the reference's statistics, decode with
        // the reference object's style, and re-encode the result
        Graph g;
        auto bp = BoundParams<float>::bind(g, t.params, nullptr);
        int img = g.leaf(a.image);
        int ref = g.leaf(b.image);
        int c_in = encode_content(g, bp, net, img);
        int c_ref = encode_content(g, bp, net, ref);
        int s_ref = encode_style(g, bp, net, ref, &b.masks.front().second);
        int c_al = g.leaf(align_content(g.val(c_in), g.val(c_ref), 1.0f));
        int out = decode(g, bp, net, c_al, s_ref, global_pool(g, c_in), global_pool(g, c_ref));
        int c_rec = encode_content(g, bp, net, out);

        ChannelStats s_in = channel_stats(g.val(c_in), nullptr, 0);
        ChannelStats s_ref_stats = channel_stats(g.val(c_ref), nullptr, 0);
        ChannelStats s_rec = channel_stats(g.val(c_rec), nullptr, 0);
        if (stat_distance(s_rec, s_ref_stats) < stat_distance(s_rec, s_in)) ++closer;
    }
    std::printf("  re-encoded stats closer to the reference in %d/%d pairs\n", closer, kPairs);
    expect(closer * 5 >= kPairs * 4, std::to_string(closer) + "/50 below the 80% bar");
}

// ---- criterion 5: color-transfer efficacy ----

void criterion5() {
    auto corpus = generate_corpus(acceptance_corpus_spec());
    Trainer t = trained_model(10000, corpus);
    RngState rng{1999, 0};
    float ratio = eval_hue_shift(t.params, t.cfg.net, corpus, 20, rng);
    std::printf("  mean hue gap-closure ratio %.3f over 20 trials\n", ratio);
    expect(ratio >= 0.3f, "ratio " + std::to_string(ratio) + " < 0.3");
}

// ---- criterion 6: exact invariants ----

void criterion6() {
    NetConfig net;
    net.image_size = 16;
    net.base_channels = 4;
    net.content_channels = 8;
    net.style_dim = 4;
    net.mlp_hidden = 16;
    RngState rng{66, 0};
    ModelParams params = init_params(net, rng);

    Tensor img({3, 16, 16}), ref({3, 16, 16});
    for (float& v : img.data) v = rng.next_uniform(-1.0f, 1.0f);
    for (float& v : ref.data) v = rng.next_uniform(-1.0f, 1.0f);
    Tensor ones = Tensor::full({16, 16}, 1.0f);

    {  // align_content(t=1) matches reference stats within 1e-5
        Graph g;
        auto bp = BoundParams<float>::bind(g, params, nullptr);
        Tensor c_in = g.val(encode_content(g, bp, net, g.leaf(img)));
        Tensor c_ref = g.val(encode_content(g, bp, net, g.leaf(ref)));
        Tensor aligned = align_content(c_in, c_ref, 1.0f);
        ChannelStats sa = channel_stats(aligned, nullptr, 0.0f);
        ChannelStats sr = channel_stats(c_ref, nullptr, 0.0f);
        for (size_t i = 0; i < sa.mean.size(); ++i) {
            expect(std::fabs(sa.mean[i] - sr.mean[i]) < 1e-5f, "aligned mean off at channel " +
                                                                   std::to_string(i));
            expect(std::fabs(sa.std[i] - sr.std[i]) < 1e-5f, "aligned std off at channel " +
                                                                 std::to_string(i));
        }
    }
    {  // strength-0 transfer is bitwise identity
        Tensor out = transfer_object(img, ones, ref, ones, 0.0f, 1.0f, params, net);
        expect(out.data == img.data, "strength-0 transfer is not bitwise identical");
    }
    {  // full-mask object paths equal image paths bitwise
        Graph g;
        auto bp = BoundParams<float>::bind(g, params, nullptr);
        int image = g.leaf(img);
        int plain_s = encode_style(g, bp, net, image);
        int masked_s = encode_style(g, bp, net, image, &ones);
        expect(g.val(plain_s).data == g.val(masked_s).data, "full-mask style code differs");
        int c = encode_content(g, bp, net, image);
        int pooled = global_pool(g, c);
        int plain_d = decode(g, bp, net, c, plain_s, pooled, pooled);
        int masked_d = decode(g, bp, net, c, masked_s, pooled, pooled, &ones);
        expect(g.val(plain_d).data == g.val(masked_d).data, "full-mask decode differs");
    }
    {  // masked losses ignore outside-mask target perturbations exactly
        Tensor mask({16, 16});
        for (int y = 4; y < 12; ++y)
            for (int x = 4; x < 12; ++x) mask.data[static_cast<size_t>(y) * 16 + x] = 1.0f;
        Tensor perturbed = ref;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                if (mask.data[static_cast<size_t>(y) * 16 + x] == 0.0f)
                    for (int c = 0; c < 3; ++c)
                        perturbed.data[(static_cast<size_t>(c) * 16 + y) * 16 + x] += 40.0f;
        Graph g;
        int m = g.leaf(mask);
        int before = mean_abs_diff(g, g.leaf(img), g.leaf(ref), m);
        int after = mean_abs_diff(g, g.leaf(img), g.leaf(perturbed), m);
        expect(g.val(before).data[0] == g.val(after).data[0],
               "masked loss changed under outside-mask perturbation");
    }
    {  // checkpoint round trip is bitwise
        TrainConfig cfg;
        cfg.net = net;
        cfg.batch_size = 2;
        cfg.seed = 8;
        SyntheticCorpusSpec spec;
        spec.count = 8;
        spec.image_size = 16;
        spec.seed = 3;
        auto corpus = generate_corpus(spec);
        Trainer t = Trainer::create(cfg);
        for (int i = 0; i < 3; ++i) train_step(t, corpus);
        fs::path p = fs::temp_directory_path() / "sentigan_acceptance_c6.ckpt";
        save_checkpoint(checkpoint_of(t), p.string());
        Checkpoint c = load_checkpoint(p.string());
        for (const auto& [name, tensor] : t.params.tensors)
            expect(c.params.tensors.at(name).data == tensor.data,
                   "checkpoint round trip altered " + name);
        expect(c.iteration == t.iteration && c.rng.counter == t.rng.counter,
               "checkpoint round trip altered scalar state");
        fs::remove(p);

        // fixed-seed training reproduces 100 loss reports bitwise
        Trainer a = Trainer::create(cfg);
        Trainer b = Trainer::create(cfg);
        for (int i = 0; i < 100; ++i) {
            LossReport ra = train_step(a, corpus);
            LossReport rb = train_step(b, corpus);
            expect(ra.terms() == rb.terms() && ra.total == rb.total && ra.disc == rb.disc,
                   "loss reports diverged at step " + std::to_string(i));
        }
    }
    std::printf("  all six exact invariants hold\n");
}

// ---- criterion 7: CLI end-to-end ----

void criterion7(const std::string& cli) {
    expect(!cli.empty(), "cli binary path required as the second argument");
    fs::path dir = fs::temp_directory_path() / "sentigan_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto P = [&dir](const char* n) { return (dir / n).string(); };
    auto run = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " > " + P("out.log") + " 2> " + P("err.log");
        int rc = std::system(cmd.c_str());
        return rc == -1 ? -1 : WEXITSTATUS(rc);
    };

    // fixtures: scene image, 2-class segmentation, one caption noun
    SyntheticCorpusSpec spec;
    spec.count = 2;
    spec.image_size = 16;
    spec.seed = 77;
    auto samples = generate_corpus(spec);
    write_image_png(P("scene.png"), samples[0].image);
    write_image_png(P("ref.png"), samples[1].image);
    write_mask_png(P("ref_mask.png"), samples[1].masks.front().second);

    std::vector<std::uint8_t> seg(16 * 16, 0);
    for (int i = 0; i < 16 * 16; ++i)
        seg[static_cast<size_t>(i)] = samples[0].masks.front().second.data[static_cast<size_t>(i)] > 0 ? 1 : 0;
    write_gray_png(P("seg.png"), seg, 16, 16);
    Tensor att({4, 4});
    // attention follows the object's coarse location
    Tensor coarse = downsample_mask_nearest(samples[0].masks.front().second, 4, 4);
    for (size_t i = 0; i < att.data.size(); ++i) att.data[i] = 0.05f + 0.9f * coarse.data[i];
    save_attention(P("obj.txt"), AttentionMap::from_grid(att));
    atomic_write_file(P("captions.tsv"), "object\tobj.txt\n");

    expect(run("extract-masks --image " + P("scene.png") + " --captions " + P("captions.tsv") +
               " --seg " + P("seg.png") + " --alpha 1.4 --out-dir " + P("masks")) == 0,
           "extract-masks failed");
    fs::path mask_png = dir / "masks" / "object.png";
    expect(fs::exists(mask_png), "extract-masks wrote no mask");

    atomic_write_file(P("train.cfg"),
                      "iters = 20\nbatch_size = 2\nseed = 12\nimage_size = 16\n"
                      "base_channels = 4\ncontent_channels = 8\nstyle_dim = 4\nmlp_hidden = 16\n");
    atomic_write_file(P("corpus.cfg"), "count = 8\nimage_size = 16\nseed = 5\n");
    expect(run("train --corpus " + P("corpus.cfg") + " --config " + P("train.cfg") + " --out " +
               P("model.ckpt")) == 0,
           "train failed");

    atomic_write_file(P("jobs.tsv"), "masks/object.png\tref.png\tref_mask.png\n");
    expect(run("transfer --model " + P("model.ckpt") + " --input " + P("scene.png") + " --jobs " +
               P("jobs.tsv") + " --out " + P("result.png")) == 0,
           "transfer failed");
    Tensor result = read_image_png(P("result.png"));  // throws if the PNG is invalid
    expect(result.shape == samples[0].image.shape, "transfer output has the wrong shape");

    // exit-code conformance under injected faults
    expect(run("transfer --model " + P("model.ckpt") + " --jobs " + P("jobs.tsv")) == 2,
           "missing required flag should exit 2");
    expect(run("transfer --model " + P("model.ckpt") + " --input " + P("scene.png") + " --jobs " +
               P("jobs.tsv") + " --out " + P("r.png") + " --frobnicate") == 2,
           "unknown flag should exit 2");
    expect(run("transfer --model " + P("absent.ckpt") + " --input " + P("scene.png") + " --jobs " +
               P("jobs.tsv") + " --out " + P("r.png")) == 3,
           "missing model file should exit 3");
    atomic_write_file(P("garbage.ckpt"), "XXXX not a checkpoint");
    expect(run("transfer --model " + P("garbage.ckpt") + " --input " + P("scene.png") +
               " --jobs " + P("jobs.tsv") + " --out " + P("r.png")) == 4,
           "corrupt model file should exit 4");
    atomic_write_file(P("badjobs.tsv"), "only-one-field\n");
    expect(run("transfer --model " + P("model.ckpt") + " --input " + P("scene.png") + " --jobs " +
               P("badjobs.tsv") + " --out " + P("r.png")) == 4,
           "malformed job file should exit 4");
    expect(!fs::exists(P("r.png")), "failed invocations must not write output files");

    fs::remove_all(dir);
    std::printf("  extract-masks -> train -> transfer round trip and fault mapping hold\n");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..7> [cli-binary]\n");
        return 2;
    }
    int n = std::atoi(argv[1]);
    std::string cli = argc > 2 ? argv[2] : "";
    try {
        switch (n) {
            case 1: criterion1(); break;
            case 2: criterion2(); break;
            case 3: criterion3(); break;
            case 4: criterion4(); break;
            case 5: criterion5(); break;
            case 6: criterion6(); break;
            case 7: criterion7(cli); break;
            default:
                std::fprintf(stderr, "unknown criterion %d\n", n);
                return 2;
        }
    } catch (const Failure& f) {
        std::printf("criterion %d: FAIL (%s)\n", n, f.detail.c_str());
        return 1;
    } catch (const std::exception& e) {
        std::printf("criterion %d: FAIL (unexpected error: %s)\n", n, e.what());
        return 1;
    }
    std::printf("criterion %d: PASS\n", n);
    return 0;
}
