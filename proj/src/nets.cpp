#include "sentigan/nets.hpp"

#include <cmath>

namespace sentigan {

std::vector<std::pair<std::string, std::vector<int>>> param_table(const NetConfig& cfg) {
    cfg.validate();
    const int ci = cfg.in_channels;
    const int b = cfg.base_channels;
    const int cc = cfg.content_channels;
    const int ds = cfg.style_dim;
    std::vector<std::pair<std::string, std::vector<int>>> t;

    auto conv = [&t](const std::string& name, int out, int in, int k) {
        t.emplace_back(name + ".w", std::vector<int>{out, in, k, k});
        t.emplace_back(name + ".b", std::vector<int>{out});
    };
    auto fc = [&t](const std::string& name, int out, int in) {
        t.emplace_back(name + ".w", std::vector<int>{out, in});
        t.emplace_back(name + ".b", std::vector<int>{out});
    };

    conv("ec.conv1", b, ci, 3);
    conv("ec.conv2", cc, b, 3);
    for (int r = 1; r <= cfg.res_blocks; ++r) {
        conv("ec.res" + std::to_string(r) + ".conv1", cc, cc, 3);
        conv("ec.res" + std::to_string(r) + ".conv2", cc, cc, 3);
    }

    conv("es.conv1", b, ci, 3);
    conv("es.conv2", cc, b, 3);
    fc("es.fc", ds, cc);

    fc("mlp.fc1", cfg.mlp_hidden, ds + 2 * cc);
    fc("mlp.fc2", cfg.num_adain() * 2 * cc, cfg.mlp_hidden);

    for (int r = 1; r <= cfg.res_blocks; ++r) {
        conv("g.res" + std::to_string(r) + ".conv1", cc, cc, 3);
        conv("g.res" + std::to_string(r) + ".conv2", cc, cc, 3);
    }
    conv("g.up1", cc, cc, 3);
    conv("g.up2", b, cc, 3);
    conv("g.out", ci, b, 3);

    conv("d.conv1", b, ci, 3);
    conv("d.conv2", b, b, 3);
    conv("d.conv3", b, b, 3);
    conv("d.out", 1, b, 1);
    return t;
}

ModelParams init_params(const NetConfig& cfg, RngState& rng) {
    ModelParams p;
    for (const auto& [name, shape] : param_table(cfg)) {
        Tensor t(shape);
        bool is_bias = name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0;
        if (!is_bias) {
            // fan-in: input features for fc, Cin*K*K for conv
            long fan_in = 1;
            for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
            float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
            for (float& v : t.data) v = rng.next_uniform(-bound, bound);
        }
        p.tensors.emplace(name, std::move(t));
    }
    return p;
}

}  // namespace sentigan
