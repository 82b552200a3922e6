#include <cmath>
#include <vector>

#include "doctest.h"
#include "rfgan/kernels.hpp"
#include "rfgan/rng.hpp"
#include "rfgan/tensor.hpp"

using namespace rfgan;

namespace {

// independent textbook triple loop, deliberately different loop order
template <class T>
void naive_matmul(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < a.cols(); ++k)
                s += double(a.at(i, k)) * double(b.at(k, j));
            c.at(i, j) = T(s);
        }
}

struct ThreadGuard {
    int saved = kernels::max_threads();
    ~ThreadGuard() { kernels::set_max_threads(saved); }
};

} // namespace

TEST_CASE("tensor shape/data invariants") {
    TensorD t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.rank() == 2);
    CHECK_THROWS_AS(TensorD({2, 0}), Error);
    CHECK_THROWS_AS(TensorD({2, 3}, std::vector<double>(5)), Error);
    TensorD s = TensorD::scalar(4.0);
    CHECK(s.rank() == 0);
    CHECK(s.value() == 4.0);
    t[0] = std::nan("");
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("matmul agrees with a naive reference") {
    Rng rng(11);
    for (auto [m, k, n] : {std::array<std::size_t, 3>{1, 1, 1}, {3, 4, 5}, {17, 9, 23}}) {
        TensorD a({m, k}), b({k, n}), c({m, n}), ref({m, n});
        rng.fill_gaussian(a.span());
        rng.fill_gaussian(b.span());
        kernels::matmul(a.data(), b.data(), c.data(), m, k, n);
        naive_matmul(a, b, ref);
        for (std::size_t i = 0; i < c.size(); ++i)
            CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("identity matmul returns its argument") {
    Rng rng(3);
    TensorD eye({3, 3});
    for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    TensorD a({3, 3}), out({3, 3});
    rng.fill_gaussian(a.span());
    kernels::matmul(eye.data(), a.data(), out.data(), 3, 3, 3);
    for (std::size_t i = 0; i < 9; ++i) CHECK(out[i] == a[i]);
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    ThreadGuard guard;
    Rng rng(21);
    const std::size_t m = 61, k = 47, n = 53;
    Tensor<float> a({m, k}), b({k, n}), g({m, n});
    rng.fill_gaussian(a.span());
    rng.fill_gaussian(b.span());
    rng.fill_gaussian(g.span());

    Tensor<float> c_serial({m, n}), c_par({m, n});
    kernels::serial::matmul(a.data(), b.data(), c_serial.data(), m, k, n);
    Tensor<float> ta_serial({k, n}), ta_par({k, n});
    kernels::serial::matmul_ta(a.data(), g.data(), ta_serial.data(), m, k, n);
    Tensor<float> tr_serial({k, m}), tr_par({k, m});
    kernels::serial::transpose(a.data(), tr_serial.data(), m, k);

    for (int threads : {1, 2, 4}) {
        kernels::set_max_threads(threads);
        kernels::matmul(a.data(), b.data(), c_par.data(), m, k, n);
        kernels::matmul_ta(a.data(), g.data(), ta_par.data(), m, k, n);
        kernels::transpose(a.data(), tr_par.data(), m, k);
        for (std::size_t i = 0; i < c_par.size(); ++i) CHECK(c_par[i] == c_serial[i]);
        for (std::size_t i = 0; i < ta_par.size(); ++i) CHECK(ta_par[i] == ta_serial[i]);
        for (std::size_t i = 0; i < tr_par.size(); ++i) CHECK(tr_par[i] == tr_serial[i]);
    }
}

TEST_CASE("matmul_ta equals transpose-then-matmul") {
    Rng rng(31);
    const std::size_t m = 12, k = 7, n = 9;
    TensorD a({m, k}), g({m, n});
    rng.fill_gaussian(a.span());
    rng.fill_gaussian(g.span());
    TensorD at({k, m});
    kernels::transpose(a.data(), at.data(), m, k);
    TensorD want({k, n}), got({k, n});
    kernels::matmul(at.data(), g.data(), want.data(), k, m, n);
    kernels::matmul_ta(a.data(), g.data(), got.data(), m, k, n);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("accumulating kernel variants add on top") {
    Rng rng(41);
    const std::size_t m = 4, k = 5, n = 6;
    TensorD a({m, k}), b({k, n});
    rng.fill_gaussian(a.span());
    rng.fill_gaussian(b.span());
    TensorD c0({m, n}), c1 = TensorD::filled({m, n}, 2.0);
    kernels::matmul(a.data(), b.data(), c0.data(), m, k, n);
    kernels::matmul(a.data(), b.data(), c1.data(), m, k, n, /*acc=*/true);
    for (std::size_t i = 0; i < c0.size(); ++i)
        CHECK(c1[i] == doctest::Approx(c0[i] + 2.0).epsilon(1e-12));
}

TEST_CASE("col_sum and add_bias_rows") {
    TensorD x({2, 3}, {1, 2, 3, 4, 5, 6});
    TensorD s({3});
    kernels::col_sum(x.data(), s.data(), 2, 3);
    CHECK(s[0] == 5.0);
    CHECK(s[1] == 7.0);
    CHECK(s[2] == 9.0);
    TensorD bias({3}, {10, 20, 30});
    TensorD out({2, 3});
    kernels::add_bias_rows(x.data(), bias.data(), out.data(), 2, 3);
    CHECK(out.at(1, 2) == 36.0);
}

TEST_CASE("sigmoid scalar hits the analytic anchors") {
    CHECK(kernels::sigmoid_scalar(0.0) == 0.5);
    CHECK(kernels::sigmoid_scalar(100.0) == doctest::Approx(1.0));
    CHECK(kernels::sigmoid_scalar(-100.0) == doctest::Approx(0.0));
}
