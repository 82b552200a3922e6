#include <cmath>
#include <vector>

#include "doctest.h"
#include "ms_ssim_reference.hpp"
#include "rfgan/data.hpp"
#include "rfgan/metrics.hpp"
#include "rfgan/rng.hpp"

using namespace rfgan;
using reference::ref_from;
using reference::ref_ms_ssim;
using reference::ref_ssim;

namespace {

Tensor<double> random_image(std::size_t h, std::size_t w, Rng& rng) {
    Tensor<double> img({h, w});
    rng.fill_uniform(img.span(), 0.0, 1.0);
    return img;
}

} // namespace

TEST_CASE("ssim(x,x) is exactly 1") {
    Rng rng(2);
    Tensor<double> img = random_image(24, 24, rng);
    CHECK(std::abs(ssim(img, img) - 1.0) < 1e-9);
}

TEST_CASE("ssim of a checkerboard and its inverse is negative and symmetric") {
    Tensor<double> a({16, 16}), b({16, 16});
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j) {
            a.at(i, j) = double((i + j) % 2);
            b.at(i, j) = 1.0 - a.at(i, j);
        }
    const double s1 = ssim(a, b);
    const double s2 = ssim(b, a);
    CHECK(s1 < 0.0);
    CHECK(s1 == s2);
}

TEST_CASE("ssim matches the brute-force reference on random pairs") {
    Rng rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        Tensor<double> a = random_image(32, 32, rng);
        Tensor<double> b = random_image(32, 32, rng);
        double mssim = 0, mcs = 0;
        ref_ssim(ref_from(a), ref_from(b), mssim, mcs);
        CHECK(std::abs(ssim(a, b) - mssim) < 1e-6);
    }
}

TEST_CASE("ssim rejects mismatched or too-small images") {
    Rng rng(4);
    Tensor<double> a = random_image(16, 16, rng);
    Tensor<double> b = random_image(8, 8, rng);
    CHECK_THROWS_AS(ssim(a, b), Error);
    CHECK_THROWS_AS(ssim(b, b), Error); // 8 < 11-tap window
}

TEST_CASE("ms_ssim identity and degenerate level count") {
    Rng rng(5);
    Tensor<double> a = random_image(64, 64, rng);
    CHECK(std::abs(ms_ssim(a, a, 3) - 1.0) < 1e-9);
    Tensor<double> b = random_image(64, 64, rng);
    CHECK(ms_ssim(a, b, 1) == doctest::Approx(ssim(a, b)).epsilon(1e-12));
}

TEST_CASE("ms_ssim matches the brute-force reference on 64x64 pairs") {
    Rng rng(6);
    for (int rep = 0; rep < 4; ++rep) {
        Tensor<double> a = random_image(64, 64, rng);
        Tensor<double> b = random_image(64, 64, rng);
        const int levels = ms_ssim_max_levels(64, 64);
        CHECK(levels == 3);
        CHECK(std::abs(ms_ssim(a, b, levels) - ref_ms_ssim(a, b, levels)) < 1e-6);
    }
}

TEST_CASE("ms_ssim symmetry invariant") {
    Rng rng(7);
    for (int rep = 0; rep < 4; ++rep) {
        Tensor<double> a = random_image(48, 48, rng);
        Tensor<double> b = random_image(48, 48, rng);
        CHECK(ms_ssim(a, b, 2) == ms_ssim(b, a, 2));
    }
}

TEST_CASE("ms_ssim rejects too-small images for the requested levels") {
    Rng rng(8);
    Tensor<double> a = random_image(64, 64, rng);
    CHECK_THROWS_AS(ms_ssim(a, a, 5), Error); // 64/2^4 = 4 < window
    CHECK_THROWS_AS(ms_ssim(a, a, 0), Error);
}

TEST_CASE("pairwise ms_ssim: identical samples score 1; diversity lowers it") {
    Rng rng(9);
    Tensor<double> base = random_image(32, 32, rng);
    Tensor<double> identical({4, 32, 32});
    Tensor<double> diverse({4, 32, 32});
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t i = 0; i < 32 * 32; ++i) {
            identical[s * 32 * 32 + i] = base[i];
            diverse[s * 32 * 32 + i] = (s % 2 == 0) ? base[i] : 1.0 - base[i];
        }
    Rng r1(10), r2(10);
    const double same = pairwise_ms_ssim(identical, 64, r1, 2);
    const double mixed = pairwise_ms_ssim(diverse, 64, r2, 2);
    CHECK(same == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mixed < same);
}

TEST_CASE("pairwise ms_ssim is deterministic for a fixed rng seed") {
    Rng rng(11);
    Tensor<double> samples({6, 24, 24});
    rng.fill_uniform(samples.span(), 0.0, 1.0);
    Rng r1(21), r2(21);
    CHECK(pairwise_ms_ssim(samples, 40, r1, 2) == pairwise_ms_ssim(samples, 40, r2, 2));
    Rng r3(22);
    CHECK_THROWS_AS(pairwise_ms_ssim(samples, 0, r3, 2), Error);
}

TEST_CASE("proxy classifier score: uniform rows give exactly 1") {
    const std::size_t n = 13, k = 5;
    Tensor<double> probs({n, k});
    probs.fill(1.0 / double(k));
    CHECK(proxy_classifier_score(probs) == 1.0);
}

TEST_CASE("proxy classifier score: balanced one-hot rows give exactly K") {
    const std::size_t k = 8, reps = 3;
    Tensor<double> probs({k * reps, k});
    for (std::size_t i = 0; i < k * reps; ++i) probs.at(i, i % k) = 1.0;
    CHECK(proxy_classifier_score(probs) == 8.0);
}

TEST_CASE("proxy classifier score matches a direct double-loop KL computation") {
    Rng rng(12);
    const std::size_t n = 40, k = 6;
    Tensor<double> probs({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            probs.at(i, j) = rng.uniform(0.01, 1.0);
            row_sum += probs.at(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) probs.at(i, j) /= row_sum;
    }
    std::vector<double> marginal(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) marginal[j] += probs.at(i, j) / double(n);
    double mean_kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j)
            mean_kl += probs.at(i, j) * std::log(probs.at(i, j) / marginal[j]) / double(n);
    CHECK(std::abs(proxy_classifier_score(probs) - std::exp(mean_kl)) < 1e-9);
}

TEST_CASE("proxy classifier score is invariant under class relabeling") {
    Rng rng(13);
    const std::size_t n = 20, k = 4;
    Tensor<double> probs({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            probs.at(i, j) = rng.uniform(0.05, 1.0);
            row_sum += probs.at(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) probs.at(i, j) /= row_sum;
    }
    const std::size_t perm[k] = {2, 0, 3, 1};
    Tensor<double> shuffled({n, k});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) shuffled.at(i, perm[j]) = probs.at(i, j);
    CHECK(proxy_classifier_score(probs) ==
          doctest::Approx(proxy_classifier_score(shuffled)).epsilon(1e-12));
}

TEST_CASE("proxy classifier score rejects invalid distributions") {
    Tensor<double> probs({2, 3});
    probs.fill(0.5); // rows sum to 1.5
    CHECK_THROWS_AS(proxy_classifier_score(probs), Error);
    Tensor<double> neg({1, 2}, {1.5, -0.5});
    CHECK_THROWS_AS(proxy_classifier_score(neg), Error);
}

TEST_CASE("mode coverage: perfect samples, collapse, and the 3-sigma boundary") {
    RingSpec spec;
    Tensor<double> means = ring_means<double>(spec);
    const std::size_t k = 8, per = 10;

    Tensor<double> perfect({k * per, 2});
    for (std::size_t i = 0; i < k * per; ++i) {
        perfect.at(i, 0) = means.at(i % k, 0);
        perfect.at(i, 1) = means.at(i % k, 1);
    }
    ModeReport rep = mode_coverage(perfect, means, spec.sigma);
    CHECK(rep.modes_covered == 8);
    CHECK(rep.high_quality_fraction == 1.0);

    Tensor<double> collapsed({k * per, 2});
    for (std::size_t i = 0; i < k * per; ++i) {
        collapsed.at(i, 0) = means.at(3, 0);
        collapsed.at(i, 1) = means.at(3, 1);
    }
    rep = mode_coverage(collapsed, means, spec.sigma);
    CHECK(rep.modes_covered == 1);
    CHECK(rep.per_mode[3] == k * per);

    // a sample 4 sigma away from every mean counts as low quality
    Tensor<double> outlier({1, 2});
    outlier.at(0, 0) = means.at(0, 0) + 4.0 * spec.sigma;
    outlier.at(0, 1) = means.at(0, 1);
    rep = mode_coverage(outlier, means, spec.sigma, 1.0);
    CHECK(rep.high_quality_fraction == 0.0);
    CHECK(rep.modes_covered == 0);
}

TEST_CASE("mode coverage is invariant under a global rotation") {
    RingSpec spec;
    Rng rng(14);
    Tensor<double> means = ring_means<double>(spec);
    Tensor<double> samples = sample_ring<double>(spec, 2000, rng);
    ModeReport before = mode_coverage(samples, means, spec.sigma);

    const double a = 0.7;
    auto rotate = [a](Tensor<double>& t) {
        for (std::size_t i = 0; i < t.rows(); ++i) {
            const double x = t.at(i, 0), y = t.at(i, 1);
            t.at(i, 0) = std::cos(a) * x - std::sin(a) * y;
            t.at(i, 1) = std::sin(a) * x + std::cos(a) * y;
        }
    };
    rotate(samples);
    rotate(means);
    ModeReport after = mode_coverage(samples, means, spec.sigma);
    CHECK(before.modes_covered == after.modes_covered);
    CHECK(before.high_quality_fraction == after.high_quality_fraction);
}

TEST_CASE("mode coverage input contracts") {
    RingSpec spec;
    Tensor<double> means = ring_means<double>(spec);
    Tensor<double> ok({1, 2});
    CHECK_THROWS_AS(mode_coverage(ok, means, 0.0), Error);
    Tensor<double> dup({2, 2}); // identical means
    CHECK_THROWS_AS(mode_coverage(ok, dup, 0.1), Error);
}
