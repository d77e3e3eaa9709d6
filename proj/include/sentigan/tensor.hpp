#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sentigan/errors.hpp"

namespace sentigan {

inline std::int64_t numel_of(const std::vector<int>& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// Dense row-major tensor. The production scalar type is float; the
// double instantiation exists for finite-difference gradient checking.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel_of(shape)), T(0));
    }
    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != numel_of(shape))
            throw ShapeError("tensor data length does not match shape " + shape_str(shape));
    }

    static TensorT full(std::vector<int> s, T v) {
        TensorT t(std::move(s));
        for (T& x : t.data) x = v;
        return t;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;

template <typename T>
inline void check_finite(const TensorT<T>& t, const char* what) {
    for (T v : t.data)
        if (!std::isfinite(static_cast<double>(v)))
            throw ContractError(std::string("non-finite value in ") + what);
}

// Per-channel first and second moments (population convention, divisor N).
struct ChannelStats {
    std::vector<float> mean;
    std::vector<float> std;
};

// Channel-wise mean and standard deviation of a CxHxW tensor, optionally
// weighted by an HxW mask. std_c = sqrt(sum m (z - mean)^2 / sum m + eps).
// An absent mask behaves exactly like an all-ones mask: the accumulation
// multiplies by weight 1, so the two paths agree bitwise.
ChannelStats channel_stats(const Tensor& z, const Tensor* mask, float eps);

// gamma * (z - mu) / sigma + beta with mu/sigma from channel_stats over the
// masked scope; the affine map applies at every position.
Tensor adain(const Tensor& z, const std::vector<float>& gamma, const std::vector<float>& beta,
             const Tensor* mask, float eps);

}  // namespace sentigan
