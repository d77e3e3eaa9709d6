#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "sentigan/rng.hpp"
#include "sentigan/tensor.hpp"

namespace sentigan {

// Reverse-mode autodiff tape. Nodes are appended in evaluation order, so
// the node index order is a topological order by construction; every
// input id must precede the node that consumes it.
//
// Masks enter ops as ordinary constant nodes (requires_grad = false);
// gradients never flow into them.
template <typename T>
class GraphT {
public:
    using Ten = TensorT<T>;
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MapM = Eigen::Map<Mat>;
    using CMapM = Eigen::Map<const Mat>;

    int leaf(Ten t, bool requires_grad = false) {
        return push(std::move(t), {}, nullptr, requires_grad);
    }

    const Ten& val(int id) const { return nodes_[check(id)].value; }
    bool requires_grad(int id) const { return nodes_[check(id)].requires_grad; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // ---- elementwise binary (same shape) ----

    int add(int a, int b) {
        return ew2(a, b, [](T x, T y) { return x + y; },
                   [](GraphT& g, const Ten& go, int ia, int ib, std::vector<Ten>& gr) {
                       g.accum(gr, ia, go);
                       g.accum(gr, ib, go);
                   });
    }

    int sub(int a, int b) {
        return ew2(a, b, [](T x, T y) { return x - y; },
                   [](GraphT& g, const Ten& go, int ia, int ib, std::vector<Ten>& gr) {
                       g.accum(gr, ia, go);
                       g.accum_scaled(gr, ib, go, T(-1));
                   });
    }

    int mul(int a, int b) {
        return ew2(a, b, [](T x, T y) { return x * y; },
                   [](GraphT& g, const Ten& go, int ia, int ib, std::vector<Ten>& gr) {
                       g.accum_prod(gr, ia, go, g.val(ib));
                       g.accum_prod(gr, ib, go, g.val(ia));
                   });
    }

    int div(int a, int b) {
        return ew2(a, b, [](T x, T y) { return x / y; },
                   [](GraphT& g, const Ten& go, int ia, int ib, std::vector<Ten>& gr) {
                       const Ten& va = g.val(ia);
                       const Ten& vb = g.val(ib);
                       if (g.wants(ia)) {
                           Ten d(go.shape);
                           for (size_t i = 0; i < d.data.size(); ++i)
                               d.data[i] = go.data[i] / vb.data[i];
                           g.accum(gr, ia, d);
                       }
                       if (g.wants(ib)) {
                           Ten d(go.shape);
                           for (size_t i = 0; i < d.data.size(); ++i)
                               d.data[i] = -go.data[i] * va.data[i] / (vb.data[i] * vb.data[i]);
                           g.accum(gr, ib, d);
                       }
                   });
    }

    // ---- elementwise unary ----

    int scale(int a, T k) {
        return ew1(a, [k](T x) { return k * x; },
                   [k](T, T, T go) { return k * go; });
    }

    int add_scalar(int a, T k) {
        return ew1(a, [k](T x) { return x + k; },
                   [](T, T, T go) { return go; });
    }

    int relu(int a) {
        return ew1(a, [](T x) { return x > T(0) ? x : T(0); },
                   [](T x, T, T go) { return x > T(0) ? go : T(0); });
    }

    int leaky_relu(int a, T slope) {
        return ew1(a, [slope](T x) { return x > T(0) ? x : slope * x; },
                   [slope](T x, T, T go) { return x > T(0) ? go : slope * go; });
    }

    int tanh_op(int a) {
        return ew1(a, [](T x) { return std::tanh(x); },
                   [](T, T y, T go) { return go * (T(1) - y * y); });
    }

    int abs_op(int a) {
        return ew1(a, [](T x) { return std::abs(x); },
                   [](T x, T, T go) { return x > T(0) ? go : (x < T(0) ? -go : T(0)); });
    }

    int sqrt_op(int a) {
        return ew1(a, [](T x) { return std::sqrt(x); },
                   [](T, T y, T go) { return go / (T(2) * y); });
    }

    // log(1 + exp(x)), evaluated in the numerically stable branch form.
    int softplus(int a) {
        return ew1(a,
                   [](T x) {
                       return x > T(0) ? x + std::log1p(std::exp(-x))
                                       : std::log1p(std::exp(x));
                   },
                   [](T x, T, T go) { return go / (T(1) + std::exp(-x)); });
    }

    // ---- reductions ----

    int sum_all(int a) {
        const Ten& va = val(a);
        T acc = T(0);
        for (T v : va.data) acc += v;
        return push(Ten({1}, {acc}), {a},
                    [](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        int ia = g.nodes_[self].inputs[0];
                        if (!g.wants(ia)) return;
                        Ten d = Ten::full(g.val(ia).shape, go.data[0]);
                        g.accum(gr, ia, d);
                    });
    }

    int mean_all(int a) {
        // sum * (1/n) rather than sum / n, so that a hand-rolled
        // weighted mean with unit weights reproduces it bitwise.
        const Ten& va = val(a);
        T n = T(0);
        for (size_t i = 0; i < va.data.size(); ++i) n += T(1);
        return scale(sum_all(a), T(1) / n);
    }

    // ---- shape ops on flat vectors ----

    int concat(const std::vector<int>& parts) {
        if (parts.empty()) throw ContractError("concat of zero tensors");
        std::vector<T> out;
        std::vector<int> sizes;
        for (int p : parts) {
            const Ten& v = val(p);
            if (v.rank() != 1) throw ShapeError("concat expects rank-1 tensors");
            sizes.push_back(static_cast<int>(v.data.size()));
            out.insert(out.end(), v.data.begin(), v.data.end());
        }
        const int total = static_cast<int>(out.size());
        return push(Ten({total}, std::move(out)), parts,
                    [sizes](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        const auto& ins = g.nodes_[self].inputs;
                        int off = 0;
                        for (size_t k = 0; k < ins.size(); ++k) {
                            if (g.wants(ins[k])) {
                                Ten d({sizes[k]});
                                for (int i = 0; i < sizes[k]; ++i) d.data[i] = go.data[off + i];
                                g.accum(gr, ins[k], d);
                            }
                            off += sizes[k];
                        }
                    });
    }

    int slice(int a, int offset, int len) {
        const Ten& va = val(a);
        if (va.rank() != 1) throw ShapeError("slice expects a rank-1 tensor");
        if (offset < 0 || len <= 0 || offset + len > va.numel())
            throw ShapeError("slice out of range");
        std::vector<T> out(va.data.begin() + offset, va.data.begin() + offset + len);
        return push(Ten({len}, std::move(out)), {a},
                    [offset, len](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        int ia = g.nodes_[self].inputs[0];
                        if (!g.wants(ia)) return;
                        Ten d(g.val(ia).shape);
                        for (int i = 0; i < len; ++i) d.data[offset + i] = go.data[i];
                        g.accum(gr, ia, d);
                    });
    }

    // ---- channel / mask ops (x is C x H x W, mask is H x W) ----

    // Weighted per-channel mean: m_c = sum_hw w * x_c / sum_hw w.
    // With mask == -1 the weight is the literal constant 1, which makes
    // the result bitwise identical to an explicit all-ones mask.
    int channel_weighted_mean(int x, int mask) {
        const Ten& vx = val(x);
        if (vx.rank() != 3) throw ShapeError("channel_weighted_mean expects CxHxW");
        const int C = vx.dim(0), H = vx.dim(1), W = vx.dim(2);
        const T* m = nullptr;
        if (mask >= 0) {
            const Ten& vm = val(mask);
            if (vm.rank() != 2 || vm.dim(0) != H || vm.dim(1) != W)
                throw ShapeError("mask shape does not match feature map");
            m = vm.data.data();
        }
        T wsum = T(0);
        for (int i = 0; i < H * W; ++i) wsum += m ? m[i] : T(1);
        if (!(wsum > T(0))) throw DegenerateMaskError("mask has zero total weight");
        Ten out({C});
        for (int c = 0; c < C; ++c) {
            T acc = T(0);
            const T* xc = vx.data.data() + static_cast<size_t>(c) * H * W;
            for (int i = 0; i < H * W; ++i) acc += (m ? m[i] : T(1)) * xc[i];
            out.data[c] = acc / wsum;
        }
        std::vector<int> ins = {x};
        if (mask >= 0) ins.push_back(mask);
        return push(std::move(out), ins,
                    [C, H, W, wsum](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        const auto& ins2 = g.nodes_[self].inputs;
                        int ix = ins2[0];
                        if (!g.wants(ix)) return;
                        const T* m2 = ins2.size() > 1 ? g.val(ins2[1]).data.data() : nullptr;
                        Ten d(g.val(ix).shape);
                        for (int c = 0; c < C; ++c) {
                            T gc = go.data[c] / wsum;
                            T* dc = d.data.data() + static_cast<size_t>(c) * H * W;
                            for (int i = 0; i < H * W; ++i) dc[i] = (m2 ? m2[i] : T(1)) * gc;
                        }
                        g.accum(gr, ix, d);
                    });
    }

    // Expand a length-C vector to C x H x W.
    int broadcast_chw(int v, int h, int w) {
        const Ten& vv = val(v);
        if (vv.rank() != 1) throw ShapeError("broadcast_chw expects a rank-1 tensor");
        const int C = static_cast<int>(vv.numel());
        Ten out({C, h, w});
        for (int c = 0; c < C; ++c) {
            T x = vv.data[c];
            T* oc = out.data.data() + static_cast<size_t>(c) * h * w;
            for (int i = 0; i < h * w; ++i) oc[i] = x;
        }
        return push(std::move(out), {v},
                    [C, h, w](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        int iv = g.nodes_[self].inputs[0];
                        if (!g.wants(iv)) return;
                        Ten d({C});
                        for (int c = 0; c < C; ++c) {
                            T acc = T(0);
                            const T* gc = go.data.data() + static_cast<size_t>(c) * h * w;
                            for (int i = 0; i < h * w; ++i) acc += gc[i];
                            d.data[c] = acc;
                        }
                        g.accum(gr, iv, d);
                    });
    }

    // x (C x H x W) times mask (H x W), broadcast across channels.
    int mul_mask_hw(int x, int mask) {
        const Ten& vx = val(x);
        const Ten& vm = val(mask);
        if (vx.rank() != 3) throw ShapeError("mul_mask_hw expects CxHxW input");
        const int C = vx.dim(0), H = vx.dim(1), W = vx.dim(2);
        if (vm.rank() != 2 || vm.dim(0) != H || vm.dim(1) != W)
            throw ShapeError("mask shape does not match feature map");
        Ten out(vx.shape);
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < H * W; ++i)
                out.data[static_cast<size_t>(c) * H * W + i] =
                    vx.data[static_cast<size_t>(c) * H * W + i] * vm.data[i];
        return push(std::move(out), {x, mask},
                    [C, H, W](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        const auto& ins = g.nodes_[self].inputs;
                        if (!g.wants(ins[0])) return;
                        const T* m = g.val(ins[1]).data.data();
                        Ten d(go.shape);
                        for (int c = 0; c < C; ++c)
                            for (int i = 0; i < H * W; ++i)
                                d.data[static_cast<size_t>(c) * H * W + i] =
                                    go.data[static_cast<size_t>(c) * H * W + i] * m[i];
                        g.accum(gr, ins[0], d);
                    });
    }

    // ---- dense / conv / resampling ----

    // y = W x + b with x: [N], W: [M, N], b: [M].
    int linear(int x, int w, int b) {
        const Ten& vx = val(x);
        const Ten& vw = val(w);
        const Ten& vb = val(b);
        if (vx.rank() != 1 || vw.rank() != 2 || vb.rank() != 1)
            throw ShapeError("linear expects x:[N], w:[M,N], b:[M]");
        const int N = vx.dim(0), M = vw.dim(0);
        if (vw.dim(1) != N || vb.dim(0) != M)
            throw ShapeError("linear dimension mismatch");
        Ten out({M});
        CMapM wm(vw.data.data(), M, N);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv(vx.data.data(), N);
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> yv(out.data.data(), M);
        yv.noalias() = wm * xv;
        for (int i = 0; i < M; ++i) out.data[i] += vb.data[i];
        return push(std::move(out), {x, w, b},
                    [M, N](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        const auto& ins = g.nodes_[self].inputs;
                        const Ten& vx2 = g.val(ins[0]);
                        const Ten& vw2 = g.val(ins[1]);
                        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> gv(go.data.data(), M);
                        if (g.wants(ins[0])) {
                            Ten dx({N});
                            CMapM wm2(vw2.data.data(), M, N);
                            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dxv(dx.data.data(), N);
                            dxv.noalias() = wm2.transpose() * gv;
                            g.accum(gr, ins[0], dx);
                        }
                        if (g.wants(ins[1])) {
                            Ten dw({M, N});
                            Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv2(vx2.data.data(), N);
                            MapM dwm(dw.data.data(), M, N);
                            dwm.noalias() = gv * xv2.transpose();
                            g.accum(gr, ins[1], dw);
                        }
                        if (g.wants(ins[2])) g.accum(gr, ins[2], go);
                    });
    }

    // Zero-padded strided convolution via im2col + GEMM.
    // x: [Cin, H, W], w: [Cout, Cin, K, K], b: [Cout].
    int conv2d(int x, int w, int b, int stride, int pad) {
        const Ten& vx = val(x);
        const Ten& vw = val(w);
        const Ten& vb = val(b);
        if (vx.rank() != 3 || vw.rank() != 4 || vb.rank() != 1)
            throw ShapeError("conv2d expects x:[C,H,W], w:[O,C,K,K], b:[O]");
        const int Cin = vx.dim(0), H = vx.dim(1), W = vx.dim(2);
        const int Cout = vw.dim(0), K = vw.dim(2);
        if (vw.dim(1) != Cin || vw.dim(3) != K || vb.dim(0) != Cout)
            throw ShapeError("conv2d weight/bias mismatch");
        if (stride < 1 || pad < 0) throw ContractError("conv2d stride/pad out of range");
        const int Ho = (H + 2 * pad - K) / stride + 1;
        const int Wo = (W + 2 * pad - K) / stride + 1;
        if (Ho < 1 || Wo < 1) throw ShapeError("conv2d output would be empty");

        auto col = std::make_shared<std::vector<T>>();
        im2col(vx.data.data(), Cin, H, W, K, stride, pad, Ho, Wo, *col);
        Ten out({Cout, Ho, Wo});
        {
            CMapM wm(vw.data.data(), Cout, Cin * K * K);
            CMapM cm(col->data(), Cin * K * K, Ho * Wo);
            MapM om(out.data.data(), Cout, Ho * Wo);
            om.noalias() = wm * cm;
        }
        for (int o = 0; o < Cout; ++o) {
            T bias = vb.data[o];
            T* row = out.data.data() + static_cast<size_t>(o) * Ho * Wo;
            for (int i = 0; i < Ho * Wo; ++i) row[i] += bias;
        }
        return push(std::move(out), {x, w, b},
                    [col, Cin, H, W, Cout, K, stride, pad, Ho, Wo](
                        GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        const auto& ins = g.nodes_[self].inputs;
                        CMapM gm(go.data.data(), Cout, Ho * Wo);
                        if (g.wants(ins[1])) {
                            Ten dw(g.val(ins[1]).shape);
                            CMapM cm(col->data(), Cin * K * K, Ho * Wo);
                            MapM dwm(dw.data.data(), Cout, Cin * K * K);
                            dwm.noalias() = gm * cm.transpose();
                            g.accum(gr, ins[1], dw);
                        }
                        if (g.wants(ins[2])) {
                            Ten db({Cout});
                            for (int o = 0; o < Cout; ++o) {
                                T acc = T(0);
                                const T* row = go.data.data() + static_cast<size_t>(o) * Ho * Wo;
                                for (int i = 0; i < Ho * Wo; ++i) acc += row[i];
                                db.data[o] = acc;
                            }
                            g.accum(gr, ins[2], db);
                        }
                        if (g.wants(ins[0])) {
                            std::vector<T> gcol(static_cast<size_t>(Cin * K * K) * Ho * Wo);
                            CMapM wm(g.val(ins[1]).data.data(), Cout, Cin * K * K);
                            MapM gcm(gcol.data(), Cin * K * K, Ho * Wo);
                            gcm.noalias() = wm.transpose() * gm;
                            Ten dx({Cin, H, W});
                            col2im(gcol.data(), Cin, H, W, K, stride, pad, Ho, Wo,
                                   dx.data.data());
                            g.accum(gr, ins[0], dx);
                        }
                    });
    }

    // Nearest-neighbor 2x upsampling of a CxHxW tensor.
    int upsample2x(int x) {
        const Ten& vx = val(x);
        if (vx.rank() != 3) throw ShapeError("upsample2x expects CxHxW");
        const int C = vx.dim(0), H = vx.dim(1), W = vx.dim(2);
        Ten out({C, 2 * H, 2 * W});
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < 2 * H; ++y)
                for (int xx = 0; xx < 2 * W; ++xx)
                    out.data[(static_cast<size_t>(c) * 2 * H + y) * 2 * W + xx] =
                        vx.data[(static_cast<size_t>(c) * H + y / 2) * W + xx / 2];
        return push(std::move(out), {x},
                    [C, H, W](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        int ix = g.nodes_[self].inputs[0];
                        if (!g.wants(ix)) return;
                        Ten d({C, H, W});
                        for (int c = 0; c < C; ++c)
                            for (int y = 0; y < 2 * H; ++y)
                                for (int xx = 0; xx < 2 * W; ++xx)
                                    d.data[(static_cast<size_t>(c) * H + y / 2) * W + xx / 2] +=
                                        go.data[(static_cast<size_t>(c) * 2 * H + y) * 2 * W + xx];
                        g.accum(gr, ix, d);
                    });
    }

    // ---- backward ----

    // Gradients of a scalar loss node with respect to every node; nodes
    // off the path to the loss (or with requires_grad false) come back
    // with an empty tensor, which grad_of() materializes as zeros.
    std::vector<Ten> backward(int loss) {
        check(loss);
        if (val(loss).numel() != 1) throw ContractError("backward requires a scalar loss node");
        std::vector<Ten> grads(nodes_.size());
        if (!nodes_[loss].requires_grad) return grads;
        grads[loss] = Ten({1}, {T(1)});
        grads[loss].shape = val(loss).shape;
        for (int id = loss; id >= 0; --id) {
            if (grads[id].data.empty()) continue;
            const Node& n = nodes_[id];
            if (n.back && n.requires_grad) n.back(*this, id, grads[id], grads);
        }
        return grads;
    }

    Ten grad_of(const std::vector<Ten>& grads, int id) const {
        check(id);
        if (!grads[id].data.empty()) return grads[id];
        return Ten(val(id).shape);
    }

private:
    using BackFn = std::function<void(GraphT&, int, const Ten&, std::vector<Ten>&)>;

    struct Node {
        Ten value;
        std::vector<int> inputs;
        BackFn back;
        bool requires_grad = false;
    };

    std::vector<Node> nodes_;

    int check(int id) const {
        if (id < 0 || id >= static_cast<int>(nodes_.size()))
            throw ContractError("invalid graph node id");
        return id;
    }

    bool wants(int id) const { return nodes_[id].requires_grad; }

    void accum(std::vector<Ten>& grads, int id, const Ten& d) {
        if (!wants(id)) return;
        if (grads[id].data.empty()) {
            grads[id] = d;
        } else {
            for (size_t i = 0; i < d.data.size(); ++i) grads[id].data[i] += d.data[i];
        }
    }

    void accum_scaled(std::vector<Ten>& grads, int id, const Ten& d, T k) {
        if (!wants(id)) return;
        if (grads[id].data.empty()) grads[id] = Ten(d.shape);
        for (size_t i = 0; i < d.data.size(); ++i) grads[id].data[i] += k * d.data[i];
    }

    void accum_prod(std::vector<Ten>& grads, int id, const Ten& go, const Ten& other) {
        if (!wants(id)) return;
        if (grads[id].data.empty()) grads[id] = Ten(go.shape);
        for (size_t i = 0; i < go.data.size(); ++i)
            grads[id].data[i] += go.data[i] * other.data[i];
    }

    int push(Ten value, std::vector<int> inputs, BackFn back, bool leaf_rg = false) {
        bool rg = leaf_rg;
        for (int i : inputs) {
            check(i);
            if (i >= static_cast<int>(nodes_.size()))
                throw ContractError("graph input must precede its consumer");
            rg = rg || nodes_[i].requires_grad;
        }
        nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(back), rg});
        return static_cast<int>(nodes_.size()) - 1;
    }

    template <typename F, typename B>
    int ew1(int a, F fwd, B bwd) {
        const Ten& va = val(a);
        Ten out(va.shape);
        for (size_t i = 0; i < va.data.size(); ++i) out.data[i] = fwd(va.data[i]);
        return push(std::move(out), {a},
                    [bwd](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        int ia = g.nodes_[self].inputs[0];
                        if (!g.wants(ia)) return;
                        const Ten& vx = g.val(ia);
                        const Ten& vy = g.val(self);
                        Ten d(go.shape);
                        for (size_t i = 0; i < go.data.size(); ++i)
                            d.data[i] = bwd(vx.data[i], vy.data[i], go.data[i]);
                        g.accum(gr, ia, d);
                    });
    }

    template <typename F, typename B>
    int ew2(int a, int b, F fwd, B bwd) {
        const Ten& va = val(a);
        const Ten& vb = val(b);
        if (!va.same_shape(vb))
            throw ShapeError("elementwise op shape mismatch: " + shape_str(va.shape) + " vs " +
                             shape_str(vb.shape));
        Ten out(va.shape);
        for (size_t i = 0; i < va.data.size(); ++i) out.data[i] = fwd(va.data[i], vb.data[i]);
        return push(std::move(out), {a, b},
                    [bwd](GraphT& g, int self, const Ten& go, std::vector<Ten>& gr) {
                        const auto& ins = g.nodes_[self].inputs;
                        bwd(g, go, ins[0], ins[1], gr);
                    });
    }

    static void im2col(const T* x, int C, int H, int W, int K, int stride, int pad, int Ho,
                       int Wo, std::vector<T>& col) {
        col.assign(static_cast<size_t>(C * K * K) * Ho * Wo, T(0));
        for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < K; ++ky)
                for (int kx = 0; kx < K; ++kx) {
                    T* dst = col.data() + (static_cast<size_t>((c * K + ky) * K + kx)) * Ho * Wo;
                    for (int oy = 0; oy < Ho; ++oy) {
                        int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) { dst += Wo; continue; }
                        const T* src = x + (static_cast<size_t>(c) * H + iy) * W;
                        for (int ox = 0; ox < Wo; ++ox) {
                            int ix = ox * stride + kx - pad;
                            *dst++ = (ix >= 0 && ix < W) ? src[ix] : T(0);
                        }
                    }
                }
    }

    static void col2im(const T* col, int C, int H, int W, int K, int stride, int pad, int Ho,
                       int Wo, T* x) {
        for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < K; ++ky)
                for (int kx = 0; kx < K; ++kx) {
                    const T* src = col + (static_cast<size_t>((c * K + ky) * K + kx)) * Ho * Wo;
                    for (int oy = 0; oy < Ho; ++oy) {
                        int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) { src += Wo; continue; }
                        T* dst = x + (static_cast<size_t>(c) * H + iy) * W;
                        for (int ox = 0; ox < Wo; ++ox) {
                            int ix = ox * stride + kx - pad;
                            T v = *src++;
                            if (ix >= 0 && ix < W) dst[ix] += v;
                        }
                    }
                }
    }
};

using Graph = GraphT<float>;

// ---- composite building blocks ----

// AdaIN: gamma * (z - mu) / sigma + beta, statistics over the masked
// scope (mask node id, -1 for none), affine applied everywhere.
template <typename T>
int adain_op(GraphT<T>& g, int z, int gamma, int beta, int mask, T eps) {
    const auto& vz = g.val(z);
    if (vz.rank() != 3) throw ShapeError("adain expects a CxHxW tensor");
    const int C = vz.dim(0), H = vz.dim(1), W = vz.dim(2);
    if (g.val(gamma).numel() != C || g.val(beta).numel() != C)
        throw ShapeError("adain gamma/beta length must equal channel count");
    int mu = g.channel_weighted_mean(z, mask);
    int diff = g.sub(z, g.broadcast_chw(mu, H, W));
    int var = g.channel_weighted_mean(g.mul(diff, diff), mask);
    int sd = g.sqrt_op(g.add_scalar(var, eps));
    int norm = g.div(diff, g.broadcast_chw(sd, H, W));
    return g.add(g.mul(g.broadcast_chw(gamma, H, W), norm), g.broadcast_chw(beta, H, W));
}

// Instance normalization without affine parameters.
template <typename T>
int instance_norm_op(GraphT<T>& g, int z, T eps) {
    const auto& vz = g.val(z);
    const int H = vz.dim(1), W = vz.dim(2);
    int mu = g.channel_weighted_mean(z, -1);
    int diff = g.sub(z, g.broadcast_chw(mu, H, W));
    int var = g.channel_weighted_mean(g.mul(diff, diff), -1);
    int sd = g.sqrt_op(g.add_scalar(var, eps));
    return g.div(diff, g.broadcast_chw(sd, H, W));
}

// ---- gradient checking ----

// Compares reverse-mode gradients against central finite differences
// (f(x+eps) - f(x-eps)) / 2eps for every element of every input, and
// returns the max relative error with denominator max(|a|, |b|, 1e-6).
// Runs in double precision so the difference quotient is meaningful at
// eps = 1e-3.
using GradCheckFn = std::function<int(GraphT<double>&, const std::vector<int>&)>;

double grad_check(const GradCheckFn& f, const std::vector<TensorT<double>>& inputs, double eps);

// Same, but only checks a deterministic random subset of coordinates per
// input; for objectives with many parameters.
double grad_check_sampled(const GradCheckFn& f, const std::vector<TensorT<double>>& inputs,
                          double eps, int coords_per_input, RngState& rng);

}  // namespace sentigan
