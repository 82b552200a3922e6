#pragma once

#include <cmath>
#include <cstdint>

#include "rfgan/graph.hpp"
#include "rfgan/tensor.hpp"

namespace rfgan {

template <class T>
struct AdamHyper {
    T lr = T(2e-4);
    T beta1 = T(0.5);
    T beta2 = T(0.999);
    T eps = T(1e-8);
};

template <class T>
struct AdamState {
    Tensor<T> m;
    Tensor<T> v;
    std::int64_t t = 0;
    AdamHyper<T> hyper;

    AdamState() = default;
    AdamState(const std::vector<std::size_t>& shape, AdamHyper<T> h = {})
        : m(shape), v(shape), hyper(h) {}
};

// Standard Adam with bias correction. Frozen parameters are a no-op.
// Throws on a non-finite gradient.
template <class T>
void adam_step(Param<T>& p, AdamState<T>& s) {
    if (!p.trainable) return;
    require(s.m.shape() == p.value.shape() && s.v.shape() == p.value.shape(),
            "adam_step: state shape mismatch for '" + p.name + "'");
    s.t += 1;
    const T c1 = T(1) - static_cast<T>(std::pow(double(s.hyper.beta1), double(s.t)));
    const T c2 = T(1) - static_cast<T>(std::pow(double(s.hyper.beta2), double(s.t)));
    const T b1 = s.hyper.beta1, b2 = s.hyper.beta2;
    const T lr = s.hyper.lr, eps = s.hyper.eps;
    T* w = p.value.data();
    const T* g = p.grad.data();
    T* m = s.m.data();
    T* v = s.v.data();
    const std::size_t n = p.value.size();
    for (std::size_t i = 0; i < n; ++i) {
        const T gi = g[i];
        if (!std::isfinite(double(gi)))
            fail("adam_step: non-finite gradient in '" + p.name + "'");
        m[i] = b1 * m[i] + (T(1) - b1) * gi;
        v[i] = b2 * v[i] + (T(1) - b2) * gi * gi;
        const T mhat = m[i] / c1;
        const T vhat = v[i] / c2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace rfgan
