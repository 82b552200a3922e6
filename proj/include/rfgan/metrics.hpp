#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rfgan/kernels.hpp"
#include "rfgan/rng.hpp"
#include "rfgan/tensor.hpp"

namespace rfgan {

// ---- SSIM / MS-SSIM -------------------------------------------------------

struct SsimOptions {
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01; // C1 = (k1*L)^2
    double k2 = 0.03; // C2 = (k2*L)^2
    double in_lo = 0.0; // input pixel range, mapped to [0,1] internally
    double in_hi = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(size));
    const double c = (size - 1) / 2.0;
    double s = 0.0;
    for (int i = 0; i < size; ++i) {
        w[std::size_t(i)] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
        s += w[std::size_t(i)];
    }
    for (double& v : w) v /= s;
    return w;
}

// Separable valid-mode filter: rows then columns.
inline std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h,
                                        std::size_t w, const std::vector<double>& win) {
    const std::size_t k = win.size();
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    std::vector<double> tmp(h * ow);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += win[t] * img[i * w + j + t];
            tmp[i * ow + j] = s;
        }
    std::vector<double> out(oh * ow);
    for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += win[t] * tmp[(i + t) * ow + j];
            out[i * ow + j] = s;
        }
    return out;
}

struct SsimMeans {
    double mssim; // mean of the luminance*contrast-structure map
    double mcs;   // mean of the contrast-structure map alone
};

inline SsimMeans ssim_means(const std::vector<double>& a, const std::vector<double>& b,
                            std::size_t h, std::size_t w, const SsimOptions& o) {
    require(h >= std::size_t(o.window) && w >= std::size_t(o.window),
            "ssim: image smaller than the filter window");
    const auto win = gaussian_window(o.window, o.window_sigma);
    const std::size_t n = h * w;
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu1 = filter_valid(a, h, w, win);
    const auto mu2 = filter_valid(b, h, w, win);
    const auto e_aa = filter_valid(aa, h, w, win);
    const auto e_bb = filter_valid(bb, h, w, win);
    const auto e_ab = filter_valid(ab, h, w, win);
    const double c1 = (o.k1 * 1.0) * (o.k1 * 1.0);
    const double c2 = (o.k2 * 1.0) * (o.k2 * 1.0);
    double sum_ssim = 0.0, sum_cs = 0.0;
    for (std::size_t i = 0; i < mu1.size(); ++i) {
        const double m1 = mu1[i], m2 = mu2[i];
        const double s1 = e_aa[i] - m1 * m1;
        const double s2 = e_bb[i] - m2 * m2;
        const double s12 = e_ab[i] - m1 * m2;
        const double l = (2.0 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
        const double cs = (2.0 * s12 + c2) / (s1 + s2 + c2);
        sum_ssim += l * cs;
        sum_cs += cs;
    }
    return {sum_ssim / double(mu1.size()), sum_cs / double(mu1.size())};
}

template <class T>
std::vector<double> to_unit_range(const Tensor<T>& img, double lo, double hi) {
    require(hi > lo, "ssim: input range hi must be > lo");
    std::vector<double> out(img.size());
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = (double(img[i]) - lo) * inv;
    return out;
}

// 2x2 mean pooling; odd extents replicate the trailing edge first.
inline void downsample2(std::vector<double>& img, std::size_t& h, std::size_t& w) {
    std::size_t ph = h + (h % 2), pw = w + (w % 2);
    if (ph != h || pw != w) {
        std::vector<double> pad(ph * pw);
        for (std::size_t i = 0; i < ph; ++i)
            for (std::size_t j = 0; j < pw; ++j)
                pad[i * pw + j] = img[std::min(i, h - 1) * w + std::min(j, w - 1)];
        img.swap(pad);
    }
    std::size_t oh = ph / 2, ow = pw / 2;
    std::vector<double> out(oh * ow);
    for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j)
            out[i * ow + j] = 0.25 * (img[(2 * i) * pw + 2 * j] + img[(2 * i) * pw + 2 * j + 1] +
                                      img[(2 * i + 1) * pw + 2 * j] +
                                      img[(2 * i + 1) * pw + 2 * j + 1]);
    img.swap(out);
    h = oh;
    w = ow;
}

inline const double kMsSsimWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

} // namespace detail

// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5),
// C1=(0.01L)^2, C2=(0.03L)^2, L=1.
template <class T>
double ssim(const Tensor<T>& a, const Tensor<T>& b, const SsimOptions& o = {}) {
    require(a.rank() == 2 && b.rank() == 2, "ssim: images must be 2-D");
    require(a.shape() == b.shape(), "ssim: image shapes differ");
    const auto av = detail::to_unit_range(a, o.in_lo, o.in_hi);
    const auto bv = detail::to_unit_range(b, o.in_lo, o.in_hi);
    return detail::ssim_means(av, bv, a.rows(), a.cols(), o).mssim;
}

// Largest level count the image size supports (window must fit at the
// coarsest scale), capped at the 5 standard weights.
inline int ms_ssim_max_levels(std::size_t h, std::size_t w, int window = 11) {
    int levels = 0;
    std::size_t m = std::min(h, w);
    while (levels < 5 && m >= std::size_t(window)) {
        ++levels;
        m /= 2;
    }
    return levels;
}

// Multi-scale SSIM: contrast-structure means across 2x2 mean-pooled scales
// weighted by the standard coefficients (renormalized over the first
// `levels`), full SSIM at the coarsest scale. levels=1 reduces to ssim().
template <class T>
double ms_ssim(const Tensor<T>& a, const Tensor<T>& b, int levels = 5,
               const SsimOptions& o = {}) {
    require(a.rank() == 2 && b.rank() == 2, "ms_ssim: images must be 2-D");
    require(a.shape() == b.shape(), "ms_ssim: image shapes differ");
    require(levels >= 1 && levels <= 5, "ms_ssim: levels must be in 1..5");
    require(ms_ssim_max_levels(a.rows(), a.cols(), o.window) >= levels,
            "ms_ssim: image too small for " + std::to_string(levels) + " levels");
    auto av = detail::to_unit_range(a, o.in_lo, o.in_hi);
    auto bv = detail::to_unit_range(b, o.in_lo, o.in_hi);
    std::size_t h = a.rows(), w = a.cols();
    double wsum = 0.0;
    for (int l = 0; l < levels; ++l) wsum += detail::kMsSsimWeights[l];
    double score = 1.0;
    for (int l = 0; l < levels; ++l) {
        const auto m = detail::ssim_means(av, bv, h, w, o);
        const double weight = detail::kMsSsimWeights[l] / wsum;
        // negative contrast-structure values are clamped before the power
        const double base = std::max(l + 1 == levels ? m.mssim : m.mcs, 0.0);
        score *= std::pow(base, weight);
        if (l + 1 < levels) {
            std::size_t hb = h, wb = w;
            detail::downsample2(av, h, w);
            detail::downsample2(bv, hb, wb);
        }
    }
    return score;
}

// Mean MS-SSIM over uniformly drawn unordered sample pairs (no self-pairs).
template <class T>
double pairwise_ms_ssim(const Tensor<T>& samples, int n_pairs, Rng& rng, int levels = 5,
                        const SsimOptions& o = {}) {
    require(samples.rank() == 3, "pairwise_ms_ssim: samples must be [n,H,W]");
    const std::size_t n = samples.dim(0);
    require(n >= 2, "pairwise_ms_ssim: need at least 2 samples");
    require(n_pairs > 0, "pairwise_ms_ssim: n_pairs must be > 0");
    const std::size_t h = samples.dim(1), w = samples.dim(2);
    std::vector<std::pair<std::size_t, std::size_t>> pairs(static_cast<std::size_t>(n_pairs));
    for (auto& pr : pairs) {
        pr.first = std::size_t(rng.below(n));
        pr.second = std::size_t(rng.below(n - 1));
        if (pr.second >= pr.first) ++pr.second;
    }
    // validate once so the parallel loop below cannot throw
    require(ms_ssim_max_levels(h, w, o.window) >= levels && levels >= 1 && levels <= 5,
            "pairwise_ms_ssim: images too small for " + std::to_string(levels) + " levels");
    std::vector<double> scores(pairs.size());
    const std::int64_t np = std::int64_t(pairs.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(kernels::max_threads()) \
    if (kernels::max_threads() > 1 && np > 1)
#endif
    for (std::int64_t p = 0; p < np; ++p) {
        Tensor<T> ia({h, w}), ib({h, w});
        const T* base_a = samples.data() + pairs[std::size_t(p)].first * h * w;
        const T* base_b = samples.data() + pairs[std::size_t(p)].second * h * w;
        for (std::size_t i = 0; i < h * w; ++i) {
            ia[i] = base_a[i];
            ib[i] = base_b[i];
        }
        scores[std::size_t(p)] = ms_ssim(ia, ib, levels, o);
    }
    double s = 0.0;
    for (double v : scores) s += v;
    return s / double(scores.size());
}

// ---- proxy classifier score ------------------------------------------------

// exp(E_x KL(p(y|x) || p(y))) over per-sample class distributions; the
// classifier producing the rows is pluggable. Computed in base 2 so that
// power-of-two class counts evaluate exactly.
inline double proxy_classifier_score(const Tensor<double>& probs) {
    require(probs.rank() == 2, "proxy_classifier_score: expected [n,K] distributions");
    const std::size_t n = probs.rows(), k = probs.cols();
    std::vector<double> marginal(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = probs.at(i, j);
            require(p >= 0.0, "proxy_classifier_score: negative probability");
            row_sum += p;
        }
        require(std::abs(row_sum - 1.0) <= 1e-6,
                "proxy_classifier_score: row " + std::to_string(i) + " sums to " +
                    std::to_string(row_sum));
        for (std::size_t j = 0; j < k; ++j) marginal[j] += probs.at(i, j);
    }
    for (double& m : marginal) m /= double(n);
    double mean_kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double kl = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = probs.at(i, j);
            if (p > 0.0) kl += p * (std::log2(p) - std::log2(marginal[j]));
        }
        mean_kl += kl;
    }
    mean_kl /= double(n);
    return std::exp2(mean_kl);
}

// ---- ring mode coverage ------------------------------------------------------

struct ModeReport {
    std::size_t modes_covered = 0;
    double high_quality_fraction = 0.0;
    std::vector<std::size_t> per_mode; // high-quality samples owned by each mode
};

// A sample is high quality when within 3*sigma (Euclidean) of its nearest
// mean; a mode is covered when it owns at least `threshold` high-quality
// samples (default total/(10*K)).
template <class T>
ModeReport mode_coverage(const Tensor<T>& samples, const Tensor<T>& means, double sigma,
                         double threshold = 0.0) {
    require(samples.rank() == 2 && samples.cols() == 2, "mode_coverage: samples must be [n,2]");
    require(means.rank() == 2 && means.cols() == 2, "mode_coverage: means must be [k,2]");
    require(samples.rows() >= 1, "mode_coverage: empty sample set");
    require(sigma > 0.0, "mode_coverage: sigma must be > 0");
    const std::size_t n = samples.rows(), k = means.rows();
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            require(means.at(a, 0) != means.at(b, 0) || means.at(a, 1) != means.at(b, 1),
                    "mode_coverage: means must be distinct");
    if (threshold <= 0.0) threshold = double(n) / (10.0 * double(k));
    ModeReport rep;
    rep.per_mode.assign(k, 0);
    const double r2 = 9.0 * sigma * sigma; // (3 sigma)^2
    std::size_t hq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = 0.0;
        std::size_t best_k = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const double dx = double(samples.at(i, 0)) - double(means.at(j, 0));
            const double dy = double(samples.at(i, 1)) - double(means.at(j, 1));
            const double d2 = dx * dx + dy * dy;
            if (j == 0 || d2 < best) {
                best = d2;
                best_k = j;
            }
        }
        if (best <= r2) {
            ++hq;
            ++rep.per_mode[best_k];
        }
    }
    rep.high_quality_fraction = double(hq) / double(n);
    for (std::size_t j = 0; j < k; ++j)
        if (double(rep.per_mode[j]) >= threshold) ++rep.modes_covered;
    return rep;
}

} // namespace rfgan
