#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "rfgan/common.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

// Dense compute kernels. Every parallel kernel partitions work by output
// element and keeps the per-element accumulation order identical to the
// serial reference, so results are bit-identical at any thread count.
// The row primitives in detail:: are compiled once (kernels.cpp) and shared
// by both the serial and the OpenMP paths; the elementwise forward/backward
// kernels are shared by the graph engine, the inference paths, and the test
// references so all of them evaluate the same expressions.
namespace rfgan::kernels {

int max_threads();
void set_max_threads(int n);

// Activation applied by the fused dense kernel.
enum class Act : std::uint8_t { Linear, Relu, LeakyRelu, Sigmoid, Tanh };

namespace detail {

// c_row[0..n) (+)= sum_k a_row[k] * B[k*n + j]
void mm_row(const float* a_row, const float* B, float* c_row, std::size_t k, std::size_t n, bool acc);
void mm_row(const double* a_row, const double* B, double* c_row, std::size_t k, std::size_t n, bool acc);

// C row kk of A^T*G: c_row[0..n) (+)= sum_m A[m*k + kk] * G[m*n + j]
void mm_ta_row(const float* A, const float* G, float* c_row, std::size_t m, std::size_t k,
               std::size_t n, std::size_t kk, bool acc);
void mm_ta_row(const double* A, const double* G, double* c_row, std::size_t m, std::size_t k,
               std::size_t n, std::size_t kk, bool acc);

// bt_row[0..r) = column c of B[r,cols]
void transpose_row(const float* B, float* bt_row, std::size_t r, std::size_t cols, std::size_t c);
void transpose_row(const double* B, double* bt_row, std::size_t r, std::size_t cols, std::size_t c);

// out_row = act(x_row * W + bias); the whole row stays in registers
void dense_row(const float* x_row, const float* W, const float* bias, float* out_row,
               std::size_t k, std::size_t n, Act act, float slope);
void dense_row(const double* x_row, const double* W, const double* bias, double* out_row,
               std::size_t k, std::size_t n, Act act, double slope);

// float entry points compiled once with register tiling; the row-to-core
// assignment is fixed by absolute row index, so any thread count gives
// identical bits
void matmul_dispatch(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
                     std::size_t n, bool acc, int threads);
void matmul_ta_dispatch(const float* A, const float* G, float* C, std::size_t m, std::size_t k,
                        std::size_t n, bool acc, int threads);
void dense_dispatch(const float* X, const float* W, const float* bias, float* out, std::size_t m,
                    std::size_t k, std::size_t n, Act act, float slope, int threads);

inline bool parallel_worthwhile(std::size_t work) {
    return max_threads() > 1 && work >= (std::size_t(1) << 19);
}

// Elementwise passes are memory-bound and fast enough serially that the
// fork/join cost is never repaid at training sizes.
inline bool parallel_elementwise(std::size_t n) {
    return max_threads() > 1 && n >= (std::size_t(1) << 22);
}

} // namespace detail

// Serial reference implementations. Kept as the ground truth the parallel
// kernels are tested and benchmarked against; the float paths share the
// tiled cores with the threaded entry points so thread count never changes
// results.
namespace serial {

template <class T>
void matmul(const T* A, const T* B, T* C, std::size_t m, std::size_t k, std::size_t n,
            bool acc = false) {
    for (std::size_t i = 0; i < m; ++i) detail::mm_row(A + i * k, B, C + i * n, k, n, acc);
}

inline void matmul(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
                   std::size_t n, bool acc = false) {
    detail::matmul_dispatch(A, B, C, m, k, n, acc, 1);
}

template <class T>
void matmul_ta(const T* A, const T* G, T* C, std::size_t m, std::size_t k, std::size_t n,
               bool acc = false) {
    for (std::size_t kk = 0; kk < k; ++kk) detail::mm_ta_row(A, G, C + kk * n, m, k, n, kk, acc);
}

inline void matmul_ta(const float* A, const float* G, float* C, std::size_t m, std::size_t k,
                      std::size_t n, bool acc = false) {
    detail::matmul_ta_dispatch(A, G, C, m, k, n, acc, 1);
}

template <class T>
void transpose(const T* B, T* BT, std::size_t r, std::size_t c) {
    for (std::size_t j = 0; j < c; ++j) detail::transpose_row(B, BT + j * r, r, c, j);
}

} // namespace serial

// C[m,n] (+)= A[m,k] * B[k,n]
template <class T>
void matmul(const T* A, const T* B, T* C, std::size_t m, std::size_t k, std::size_t n,
            bool acc = false) {
#if defined(_OPENMP)
    if (detail::parallel_worthwhile(m * k * n)) {
        const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t i = 0; i < mi; ++i)
            detail::mm_row(A + std::size_t(i) * k, B, C + std::size_t(i) * n, k, n, acc);
        return;
    }
#endif
    serial::matmul(A, B, C, m, k, n, acc);
}

inline void matmul(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
                   std::size_t n, bool acc = false) {
    detail::matmul_dispatch(A, B, C, m, k, n, acc, max_threads());
}

// C[k,n] (+)= A[m,k]^T * G[m,n]
template <class T>
void matmul_ta(const T* A, const T* G, T* C, std::size_t m, std::size_t k, std::size_t n,
               bool acc = false) {
#if defined(_OPENMP)
    if (detail::parallel_worthwhile(m * k * n)) {
        const std::int64_t ki = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t kk = 0; kk < ki; ++kk)
            detail::mm_ta_row(A, G, C + std::size_t(kk) * n, m, k, n, std::size_t(kk), acc);
        return;
    }
#endif
    serial::matmul_ta(A, G, C, m, k, n, acc);
}

inline void matmul_ta(const float* A, const float* G, float* C, std::size_t m, std::size_t k,
                      std::size_t n, bool acc = false) {
    detail::matmul_ta_dispatch(A, G, C, m, k, n, acc, max_threads());
}

// BT[c,r] = B[r,c]^T
template <class T>
void transpose(const T* B, T* BT, std::size_t r, std::size_t c) {
#if defined(_OPENMP)
    if (detail::parallel_worthwhile(r * c * 8)) {
        const std::int64_t ci = static_cast<std::int64_t>(c);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t j = 0; j < ci; ++j)
            detail::transpose_row(B, BT + std::size_t(j) * r, r, c, std::size_t(j));
        return;
    }
#endif
    serial::transpose(B, BT, r, c);
}

// out[m,n] = x[m,n] + bias[n] row-broadcast
template <class T>
void add_bias_rows(const T* x, const T* bias, T* out, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* xr = x + i * n;
        T* yr = out + i * n;
        for (std::size_t j = 0; j < n; ++j) yr[j] = xr[j] + bias[j];
    }
}

// out[n] (+)= sum over rows of x[m,n]; per-column order fixed by row index
template <class T>
void col_sum(const T* x, T* out, std::size_t m, std::size_t n, bool acc = false) {
    if (!acc)
        for (std::size_t j = 0; j < n; ++j) out[j] = T(0);
    for (std::size_t i = 0; i < m; ++i) {
        const T* xr = x + i * n;
        for (std::size_t j = 0; j < n; ++j) out[j] += xr[j];
    }
}

// Fixed ascending-index order; used for reductions that feed losses.
template <class T>
T sum(const T* x, std::size_t n) {
    T s = T(0);
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

// ---- shared scalar functions ------------------------------------------------

template <class T>
inline T sigmoid_scalar(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    T e = std::exp(x);
    return e / (T(1) + e);
}

template <class T>
inline T leaky_relu_scalar(T x, T slope) {
    return x > T(0) ? x : slope * x;
}

template <class T>
inline T clamp_scalar(T x, T lo, T hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

// ---- fused dense layer -------------------------------------------------------

// out[m,n] = act(X[m,k] * W[k,n] + bias[n]), row-parallel.
template <class T>
void dense_fwd(const T* X, const T* W, const T* bias, T* out, std::size_t m, std::size_t k,
               std::size_t n, Act act, T slope = T(0)) {
#if defined(_OPENMP)
    if (detail::parallel_worthwhile(m * k * n)) {
        const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t i = 0; i < mi; ++i)
            detail::dense_row(X + std::size_t(i) * k, W, bias, out + std::size_t(i) * n, k, n,
                              act, slope);
        return;
    }
#endif
    for (std::size_t i = 0; i < m; ++i)
        detail::dense_row(X + i * k, W, bias, out + i * n, k, n, act, slope);
}

inline void dense_fwd(const float* X, const float* W, const float* bias, float* out,
                      std::size_t m, std::size_t k, std::size_t n, Act act, float slope = 0.0f) {
    detail::dense_dispatch(X, W, bias, out, m, k, n, act, slope, max_threads());
}

// ---- generic elementwise dispatch -------------------------------------------

// y[i] = f(x[i]); element-pure, any partition is exact
template <class T, class F>
void map(const T* x, T* y, std::size_t n, F f) {
#if defined(_OPENMP)
    if (detail::parallel_elementwise(n)) {
        const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t i = 0; i < ni; ++i) y[i] = f(x[i]);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) y[i] = f(x[i]);
}

template <class T, class F>
void zip(const T* a, const T* b, T* y, std::size_t n, F f) {
#if defined(_OPENMP)
    if (detail::parallel_elementwise(n)) {
        const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t i = 0; i < ni; ++i) y[i] = f(a[i], b[i]);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) y[i] = f(a[i], b[i]);
}

// dpre[i] = dout[i] * act'(post[i]), the backward mate of dense_fwd
template <class T>
void dense_act_bwd(const T* dout, const T* post, T* dpre, std::size_t n, Act act, T slope) {
    switch (act) {
        case Act::Linear:
            zip(dout, post, dpre, n, [](T g, T) { return g; });
            break;
        case Act::Relu:
            zip(dout, post, dpre, n, [](T g, T y) { return y > T(0) ? g : T(0); });
            break;
        case Act::LeakyRelu:
            zip(dout, post, dpre, n, [slope](T g, T y) { return y > T(0) ? g : g * slope; });
            break;
        case Act::Sigmoid:
            zip(dout, post, dpre, n, [](T g, T y) { return g * y * (T(1) - y); });
            break;
        case Act::Tanh:
            zip(dout, post, dpre, n, [](T g, T y) { return g * (T(1) - y * y); });
            break;
    }
}

// ---- named forward kernels ---------------------------------------------------

template <class T>
void sigmoid_fwd(const T* x, T* y, std::size_t n) {
    map(x, y, n, [](T v) { return sigmoid_scalar(v); });
}
template <class T>
void tanh_fwd(const T* x, T* y, std::size_t n) {
    map(x, y, n, [](T v) { return std::tanh(v); });
}
template <class T>
void relu_fwd(const T* x, T* y, std::size_t n) {
    map(x, y, n, [](T v) { return v > T(0) ? v : T(0); });
}
template <class T>
void leaky_relu_fwd(const T* x, T* y, std::size_t n, T slope) {
    map(x, y, n, [slope](T v) { return leaky_relu_scalar(v, slope); });
}

// ---- backward accumulation kernels -------------------------------------------

template <class T>
void acc_add(T* dst, const T* g, std::size_t n) {
    zip(dst, g, dst, n, [](T d, T gv) { return d + gv; });
}
template <class T>
void acc_sub(T* dst, const T* g, std::size_t n) {
    zip(dst, g, dst, n, [](T d, T gv) { return d - gv; });
}
template <class T>
void acc_scaled(T* dst, const T* g, T s, std::size_t n) {
    zip(dst, g, dst, n, [s](T d, T gv) { return d + gv * s; });
}
template <class T>
void acc_fill(T* dst, T v, std::size_t n) {
    map(dst, dst, n, [v](T d) { return d + v; });
}
template <class T>
void acc_mul(T* dst, const T* g, const T* o, std::size_t n) {
#if defined(_OPENMP)
    if (detail::parallel_elementwise(n)) {
        const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t i = 0; i < ni; ++i) dst[i] += g[i] * o[i];
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) dst[i] += g[i] * o[i];
}

namespace detail {

template <class T, class F>
void acc_apply2(T* dst, const T* g, const T* x, std::size_t n, F f) {
#if defined(_OPENMP)
    if (parallel_elementwise(n)) {
        const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::int64_t i = 0; i < ni; ++i) dst[i] += f(g[i], x[i]);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) dst[i] += f(g[i], x[i]);
}

} // namespace detail

// dst += g * y * (1-y), y = sigmoid output
template <class T>
void acc_sigmoid_bwd(T* dst, const T* g, const T* y, std::size_t n) {
    detail::acc_apply2(dst, g, y, n, [](T gv, T yv) { return gv * yv * (T(1) - yv); });
}
// dst += g * (1 - y^2), y = tanh output
template <class T>
void acc_tanh_bwd(T* dst, const T* g, const T* y, std::size_t n) {
    detail::acc_apply2(dst, g, y, n, [](T gv, T yv) { return gv * (T(1) - yv * yv); });
}
// dst += g where x > 0
template <class T>
void acc_relu_bwd(T* dst, const T* g, const T* x, std::size_t n) {
    detail::acc_apply2(dst, g, x, n, [](T gv, T xv) { return xv > T(0) ? gv : T(0); });
}
// dst += g or g*slope by the sign of x
template <class T>
void acc_leaky_relu_bwd(T* dst, const T* g, const T* x, std::size_t n, T slope) {
    detail::acc_apply2(dst, g, x, n,
                       [slope](T gv, T xv) { return xv > T(0) ? gv : gv * slope; });
}
// dst += g / x
template <class T>
void acc_log_bwd(T* dst, const T* g, const T* x, std::size_t n) {
    detail::acc_apply2(dst, g, x, n, [](T gv, T xv) { return gv / xv; });
}
// dst += g * 2x
template <class T>
void acc_square_bwd(T* dst, const T* g, const T* x, std::size_t n) {
    detail::acc_apply2(dst, g, x, n, [](T gv, T xv) { return gv * (T(2) * xv); });
}
// dst += g * 0.5/y, y = sqrt output
template <class T>
void acc_sqrt_bwd(T* dst, const T* g, const T* y, std::size_t n) {
    detail::acc_apply2(dst, g, y, n, [](T gv, T yv) { return gv * (T(0.5) / yv); });
}
// dst += g inside [lo,hi], 0 outside
template <class T>
void acc_clamp_bwd(T* dst, const T* g, const T* x, std::size_t n, T lo, T hi) {
    detail::acc_apply2(dst, g, x, n,
                       [lo, hi](T gv, T xv) { return (xv >= lo && xv <= hi) ? gv : T(0); });
}

} // namespace rfgan::kernels
