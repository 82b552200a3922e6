#include "rfgan/kernels.hpp"

#include <algorithm>
#include <atomic>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace rfgan::kernels {

namespace {

std::atomic<int> g_max_threads{1};

// ---- generic blocked cores (all types; the only path for double) ----------

constexpr std::size_t kColBlock = 64;

template <class T>
void mm_row_generic(const T* a_row, const T* B, T* c_row, std::size_t k, std::size_t n,
                    bool acc) {
    std::size_t j0 = 0;
    while (j0 < n) {
        const std::size_t len = std::min(kColBlock, n - j0);
        T blk[kColBlock];
        if (acc)
            for (std::size_t j = 0; j < len; ++j) blk[j] = c_row[j0 + j];
        else
            for (std::size_t j = 0; j < len; ++j) blk[j] = T(0);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const T a = a_row[kk];
            const T* brow = B + kk * n + j0;
            for (std::size_t j = 0; j < len; ++j) blk[j] += a * brow[j];
        }
        for (std::size_t j = 0; j < len; ++j) c_row[j0 + j] = blk[j];
        j0 += len;
    }
}

template <class T>
void mm_ta_row_generic(const T* A, const T* G, T* c_row, std::size_t m, std::size_t k,
                       std::size_t n, std::size_t kk, bool acc) {
    std::size_t j0 = 0;
    while (j0 < n) {
        const std::size_t len = std::min(kColBlock, n - j0);
        T blk[kColBlock];
        if (acc)
            for (std::size_t j = 0; j < len; ++j) blk[j] = c_row[j0 + j];
        else
            for (std::size_t j = 0; j < len; ++j) blk[j] = T(0);
        for (std::size_t i = 0; i < m; ++i) {
            const T a = A[i * k + kk];
            const T* grow = G + i * n + j0;
            for (std::size_t j = 0; j < len; ++j) blk[j] += a * grow[j];
        }
        for (std::size_t j = 0; j < len; ++j) c_row[j0 + j] = blk[j];
        j0 += len;
    }
}

template <class T>
inline T activate_scalar(T v, Act act, T slope) {
    switch (act) {
        case Act::Linear: return v;
        case Act::Relu: return v > T(0) ? v : T(0);
        case Act::LeakyRelu: return leaky_relu_scalar(v, slope);
        case Act::Sigmoid: return sigmoid_scalar(v);
        case Act::Tanh: return std::tanh(v);
    }
    return v;
}

template <class T>
void bias_act_row_generic(T* out, const T* bias, std::size_t n, Act act, T slope) {
    for (std::size_t j = 0; j < n; ++j) out[j] = activate_scalar(out[j] + bias[j], act, slope);
}

template <class T>
void dense_row_generic(const T* x_row, const T* W, const T* bias, T* out_row, std::size_t k,
                       std::size_t n, Act act, T slope) {
    mm_row_generic(x_row, W, out_row, k, n, /*acc=*/false);
    bias_act_row_generic(out_row, bias, n, act, slope);
}

template <class T>
void transpose_row_impl(const T* B, T* bt_row, std::size_t r, std::size_t cols, std::size_t c) {
    for (std::size_t i = 0; i < r; ++i) bt_row[i] = B[i * cols + c];
}

// ---- vectorized float cores ---------------------------------------------
// A 4-row register tile reuses each slice of B across four output rows, and
// the dual accumulator banks of the single-row core keep the FMA pipes busy
// for remainder rows. Every output element is reduced in ascending index
// order by exactly one core chosen from its absolute row number, so results
// do not depend on how rows are distributed over threads.

#if defined(__AVX512F__)

constexpr std::size_t kLanes = 16;

// c[r][j0..j0+16*nv) (+)= sum_i a(r,i) * S[i*stride + j], four rows at once
template <class LoadA>
inline void f32_tile4_block(LoadA a, const float* S, std::size_t rows, std::size_t stride,
                            std::size_t j0, std::size_t nv, float* c0, float* c1, float* c2,
                            float* c3, bool acc) {
    float* cr[4] = {c0, c1, c2, c3};
    __m512 accv[4][4];
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t t = 0; t < nv; ++t)
            accv[r][t] =
                acc ? _mm512_loadu_ps(cr[r] + j0 + t * kLanes) : _mm512_setzero_ps();
    for (std::size_t i = 0; i < rows; ++i) {
        __m512 s[4];
        const float* srow = S + i * stride + j0;
        for (std::size_t t = 0; t < nv; ++t) s[t] = _mm512_loadu_ps(srow + t * kLanes);
        for (std::size_t r = 0; r < 4; ++r) {
            const __m512 b = _mm512_set1_ps(a(r, i));
            for (std::size_t t = 0; t < nv; ++t)
                accv[r][t] = _mm512_fmadd_ps(b, s[t], accv[r][t]);
        }
    }
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t t = 0; t < nv; ++t)
            _mm512_storeu_ps(cr[r] + j0 + t * kLanes, accv[r][t]);
}

// single row, dual accumulator banks over the reduction
template <class LoadA>
inline void f32_row_block(LoadA a, const float* S, std::size_t rows, std::size_t stride,
                          std::size_t j0, std::size_t nv, float* c, bool acc) {
    __m512 accA[4], accB[4];
    for (std::size_t t = 0; t < nv; ++t) {
        accA[t] = acc ? _mm512_loadu_ps(c + j0 + t * kLanes) : _mm512_setzero_ps();
        accB[t] = _mm512_setzero_ps();
    }
    std::size_t i = 0;
    for (; i + 2 <= rows; i += 2) {
        const __m512 a0 = _mm512_set1_ps(a(i));
        const __m512 a1 = _mm512_set1_ps(a(i + 1));
        const float* s0 = S + i * stride + j0;
        const float* s1 = s0 + stride;
        for (std::size_t t = 0; t < nv; ++t) {
            accA[t] = _mm512_fmadd_ps(a0, _mm512_loadu_ps(s0 + t * kLanes), accA[t]);
            accB[t] = _mm512_fmadd_ps(a1, _mm512_loadu_ps(s1 + t * kLanes), accB[t]);
        }
    }
    if (i < rows) {
        const __m512 a0 = _mm512_set1_ps(a(i));
        const float* s0 = S + i * stride + j0;
        for (std::size_t t = 0; t < nv; ++t)
            accA[t] = _mm512_fmadd_ps(a0, _mm512_loadu_ps(s0 + t * kLanes), accA[t]);
    }
    for (std::size_t t = 0; t < nv; ++t)
        _mm512_storeu_ps(c + j0 + t * kLanes, _mm512_add_ps(accA[t], accB[t]));
}

template <class LoadA>
inline void f32_scalar_cols(LoadA a, const float* S, std::size_t rows, std::size_t stride,
                            std::size_t j0, std::size_t len, float* c, bool acc) {
    for (std::size_t j = 0; j < len; ++j) {
        float s = acc ? c[j0 + j] : 0.0f;
        for (std::size_t i = 0; i < rows; ++i) s += a(i) * S[i * stride + j0 + j];
        c[j0 + j] = s;
    }
}

// one output row across all column blocks
template <class LoadA>
inline void f32_row(LoadA a, const float* S, std::size_t rows, std::size_t stride, std::size_t n,
                    float* c, bool acc) {
    std::size_t j0 = 0;
    for (; j0 + 4 * kLanes <= n; j0 += 4 * kLanes) f32_row_block(a, S, rows, stride, j0, 4, c, acc);
    const std::size_t nv = (n - j0) / kLanes;
    if (nv > 0) {
        f32_row_block(a, S, rows, stride, j0, nv, c, acc);
        j0 += nv * kLanes;
    }
    if (j0 < n) f32_scalar_cols(a, S, rows, stride, j0, n - j0, c, acc);
}

// four output rows across all column blocks; scalar column tail per row
template <class LoadA2>
inline void f32_tile4(LoadA2 a2, const float* S, std::size_t rows, std::size_t stride,
                      std::size_t n, float* c0, float* c1, float* c2, float* c3, bool acc) {
    std::size_t j0 = 0;
    for (; j0 + 4 * kLanes <= n; j0 += 4 * kLanes)
        f32_tile4_block(a2, S, rows, stride, j0, 4, c0, c1, c2, c3, acc);
    const std::size_t nv = (n - j0) / kLanes;
    if (nv > 0) {
        f32_tile4_block(a2, S, rows, stride, j0, nv, c0, c1, c2, c3, acc);
        j0 += nv * kLanes;
    }
    if (j0 < n) {
        float* cr[4] = {c0, c1, c2, c3};
        for (std::size_t r = 0; r < 4; ++r)
            f32_scalar_cols([&](std::size_t i) { return a2(r, i); }, S, rows, stride, j0,
                            n - j0, cr[r], acc);
    }
}

inline void bias_act_row_f32(float* out, const float* bias, std::size_t n, Act act,
                             float slope) {
    std::size_t j = 0;
    switch (act) {
        case Act::Linear:
            for (; j + kLanes <= n; j += kLanes)
                _mm512_storeu_ps(out + j, _mm512_add_ps(_mm512_loadu_ps(out + j),
                                                        _mm512_loadu_ps(bias + j)));
            break;
        case Act::Relu:
            for (; j + kLanes <= n; j += kLanes) {
                const __m512 v =
                    _mm512_add_ps(_mm512_loadu_ps(out + j), _mm512_loadu_ps(bias + j));
                const __mmask16 pos = _mm512_cmp_ps_mask(v, _mm512_setzero_ps(), _CMP_GT_OQ);
                _mm512_storeu_ps(out + j, _mm512_maskz_mov_ps(pos, v));
            }
            break;
        case Act::LeakyRelu: {
            const __m512 sl = _mm512_set1_ps(slope);
            for (; j + kLanes <= n; j += kLanes) {
                const __m512 v =
                    _mm512_add_ps(_mm512_loadu_ps(out + j), _mm512_loadu_ps(bias + j));
                const __mmask16 neg = _mm512_cmp_ps_mask(v, _mm512_setzero_ps(), _CMP_LE_OQ);
                _mm512_storeu_ps(out + j, _mm512_mask_mul_ps(v, neg, sl, v));
            }
            break;
        }
        case Act::Sigmoid:
        case Act::Tanh: break; // scalar path below
    }
    for (; j < n; ++j) out[j] = activate_scalar(out[j] + bias[j], act, slope);
}

#endif // __AVX512F__

// ---- float entry points with tiling and threading --------------------------

void matmul_f32(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
                std::size_t n, bool acc, int threads) {
#if defined(__AVX512F__)
    if (n >= kLanes) {
        const std::int64_t quads = std::int64_t(m / 4);
        const bool par = threads > 1 && detail::parallel_worthwhile(m * k * n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (par)
#endif
        for (std::int64_t q = 0; q < quads; ++q) {
            const std::size_t r = std::size_t(q) * 4;
            f32_tile4([&](std::size_t t, std::size_t i) { return A[(r + t) * k + i]; }, B, k, n,
                      n, C + r * n, C + (r + 1) * n, C + (r + 2) * n, C + (r + 3) * n, acc);
        }
        for (std::size_t r = std::size_t(quads) * 4; r < m; ++r)
            f32_row([&](std::size_t i) { return A[r * k + i]; }, B, k, n, n, C + r * n, acc);
        return;
    }
#endif
    const std::int64_t mi = std::int64_t(m);
    const bool par = threads > 1 && detail::parallel_worthwhile(m * k * n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (par)
#endif
    for (std::int64_t i = 0; i < mi; ++i)
        mm_row_generic(A + std::size_t(i) * k, B, C + std::size_t(i) * n, k, n, acc);
    (void)par;
}

void matmul_ta_f32(const float* A, const float* G, float* C, std::size_t m, std::size_t k,
                   std::size_t n, bool acc, int threads) {
#if defined(__AVX512F__)
    if (n >= kLanes) {
        const std::int64_t quads = std::int64_t(k / 4);
        const bool par = threads > 1 && detail::parallel_worthwhile(m * k * n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (par)
#endif
        for (std::int64_t q = 0; q < quads; ++q) {
            const std::size_t r = std::size_t(q) * 4;
            f32_tile4([&](std::size_t t, std::size_t i) { return A[i * k + r + t]; }, G, m, n, n,
                      C + r * n, C + (r + 1) * n, C + (r + 2) * n, C + (r + 3) * n, acc);
        }
        for (std::size_t r = std::size_t(quads) * 4; r < k; ++r)
            f32_row([&](std::size_t i) { return A[i * k + r]; }, G, m, n, n, C + r * n, acc);
        return;
    }
#endif
    const std::int64_t ki = std::int64_t(k);
    const bool par = threads > 1 && detail::parallel_worthwhile(m * k * n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (par)
#endif
    for (std::int64_t kk = 0; kk < ki; ++kk)
        mm_ta_row_generic(A, G, C + std::size_t(kk) * n, m, k, n, std::size_t(kk), acc);
    (void)par;
}

void dense_fwd_f32(const float* X, const float* W, const float* bias, float* out, std::size_t m,
                   std::size_t k, std::size_t n, Act act, float slope, int threads) {
#if defined(__AVX512F__)
    if (n >= kLanes) {
        const std::int64_t quads = std::int64_t(m / 4);
        const bool par = threads > 1 && detail::parallel_worthwhile(m * k * n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (par)
#endif
        for (std::int64_t q = 0; q < quads; ++q) {
            const std::size_t r = std::size_t(q) * 4;
            f32_tile4([&](std::size_t t, std::size_t i) { return X[(r + t) * k + i]; }, W, k, n,
                      n, out + r * n, out + (r + 1) * n, out + (r + 2) * n, out + (r + 3) * n,
                      /*acc=*/false);
            for (std::size_t t = 0; t < 4; ++t)
                bias_act_row_f32(out + (r + t) * n, bias, n, act, slope);
        }
        for (std::size_t r = std::size_t(quads) * 4; r < m; ++r) {
            f32_row([&](std::size_t i) { return X[r * k + i]; }, W, k, n, n, out + r * n,
                    /*acc=*/false);
            bias_act_row_f32(out + r * n, bias, n, act, slope);
        }
        return;
    }
#endif
    const std::int64_t mi = std::int64_t(m);
    const bool par = threads > 1 && detail::parallel_worthwhile(m * k * n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (par)
#endif
    for (std::int64_t i = 0; i < mi; ++i) {
        mm_row_generic(X + std::size_t(i) * k, W, out + std::size_t(i) * n, k, n, false);
        bias_act_row_generic(out + std::size_t(i) * n, bias, n, act, slope);
    }
    (void)par;
}

} // namespace

int max_threads() { return g_max_threads.load(std::memory_order_relaxed); }

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

namespace detail {

void mm_row(const float* a, const float* B, float* c, std::size_t k, std::size_t n, bool acc) {
#if defined(__AVX512F__)
    if (n >= kLanes) {
        f32_row([&](std::size_t i) { return a[i]; }, B, k, n, n, c, acc);
        return;
    }
#endif
    mm_row_generic(a, B, c, k, n, acc);
}

void mm_row(const double* a, const double* B, double* c, std::size_t k, std::size_t n, bool acc) {
    mm_row_generic(a, B, c, k, n, acc);
}

void mm_ta_row(const float* A, const float* G, float* c, std::size_t m, std::size_t k,
               std::size_t n, std::size_t kk, bool acc) {
#if defined(__AVX512F__)
    if (n >= kLanes) {
        f32_row([&](std::size_t i) { return A[i * k + kk]; }, G, m, n, n, c, acc);
        return;
    }
#endif
    mm_ta_row_generic(A, G, c, m, k, n, kk, acc);
}

void mm_ta_row(const double* A, const double* G, double* c, std::size_t m, std::size_t k,
               std::size_t n, std::size_t kk, bool acc) {
    mm_ta_row_generic(A, G, c, m, k, n, kk, acc);
}

void transpose_row(const float* B, float* bt, std::size_t r, std::size_t cols, std::size_t c) {
    transpose_row_impl(B, bt, r, cols, c);
}
void transpose_row(const double* B, double* bt, std::size_t r, std::size_t cols, std::size_t c) {
    transpose_row_impl(B, bt, r, cols, c);
}

void dense_row(const float* x, const float* W, const float* bias, float* out, std::size_t k,
               std::size_t n, Act act, float slope) {
#if defined(__AVX512F__)
    if (n >= kLanes) {
        f32_row([&](std::size_t i) { return x[i]; }, W, k, n, n, out, /*acc=*/false);
        bias_act_row_f32(out, bias, n, act, slope);
        return;
    }
#endif
    dense_row_generic(x, W, bias, out, k, n, act, slope);
}

void dense_row(const double* x, const double* W, const double* bias, double* out, std::size_t k,
               std::size_t n, Act act, double slope) {
    dense_row_generic(x, W, bias, out, k, n, act, slope);
}

void matmul_dispatch(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
                     std::size_t n, bool acc, int threads) {
    matmul_f32(A, B, C, m, k, n, acc, threads);
}
void matmul_ta_dispatch(const float* A, const float* G, float* C, std::size_t m, std::size_t k,
                        std::size_t n, bool acc, int threads) {
    matmul_ta_f32(A, G, C, m, k, n, acc, threads);
}
void dense_dispatch(const float* X, const float* W, const float* bias, float* out, std::size_t m,
                    std::size_t k, std::size_t n, Act act, float slope, int threads) {
    dense_fwd_f32(X, W, bias, out, m, k, n, act, slope, threads);
}

} // namespace detail

} // namespace rfgan::kernels
