#include <cmath>

#include "doctest.h"
#include "rfgan/optim.hpp"

using namespace rfgan;

TEST_CASE("adam: zero gradient with a fresh state leaves the value unchanged") {
    auto p = make_param<double>("p", Tensor<double>({4}, {1.0, -2.0, 3.5, 0.0}));
    AdamState<double> s(p->value.shape());
    const Tensor<double> before = p->value;
    adam_step(*p, s);
    for (std::size_t i = 0; i < 4; ++i) CHECK(p->value[i] == before[i]);
    CHECK(s.t == 1);
}

TEST_CASE("adam: bias-corrected first step moves by about lr") {
    auto p = make_param<double>("p", Tensor<double>({1}, {0.0}));
    AdamHyper<double> h;
    h.lr = 0.1;
    AdamState<double> s(p->value.shape(), h);
    p->grad[0] = 1.0;
    adam_step(*p, s);
    // m_hat = v_hat = 1 after bias correction, so the step is lr/(1+eps)
    CHECK(p->value[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam: hand-computed two-step recurrence") {
    auto p = make_param<double>("p", Tensor<double>({1}, {0.5}));
    AdamHyper<double> h; // lr 2e-4, beta1 0.5, beta2 0.999
    AdamState<double> s(p->value.shape(), h);

    double m = 0, v = 0, w = 0.5;
    auto reference_step = [&](double g, int t) {
        m = h.beta1 * m + (1 - h.beta1) * g;
        v = h.beta2 * v + (1 - h.beta2) * g * g;
        const double mhat = m / (1 - std::pow(h.beta1, t));
        const double vhat = v / (1 - std::pow(h.beta2, t));
        w -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    };

    p->grad[0] = 0.3;
    adam_step(*p, s);
    reference_step(0.3, 1);
    CHECK(p->value[0] == doctest::Approx(w).epsilon(1e-12));

    p->grad[0] = -0.7;
    adam_step(*p, s);
    reference_step(-0.7, 2);
    CHECK(p->value[0] == doctest::Approx(w).epsilon(1e-12));
    CHECK(s.t == 2);
}

TEST_CASE("adam: frozen parameter is a no-op") {
    auto p = make_param<double>("p", Tensor<double>({2}, {1.0, 2.0}), /*trainable=*/false);
    AdamState<double> s(p->value.shape());
    p->grad[0] = 5.0;
    p->grad[1] = -5.0;
    adam_step(*p, s);
    CHECK(p->value[0] == 1.0);
    CHECK(p->value[1] == 2.0);
    CHECK(s.t == 0);
}

TEST_CASE("adam: non-finite gradient raises") {
    auto p = make_param<double>("p", Tensor<double>({1}, {0.0}));
    AdamState<double> s(p->value.shape());
    p->grad[0] = std::nan("");
    CHECK_THROWS_AS(adam_step(*p, s), Error);
}

TEST_CASE("adam: zero learning rate keeps parameters bit-identical") {
    auto p = make_param<float>("p", Tensor<float>({3}, {0.25f, -1.5f, 3.0f}));
    AdamHyper<float> h;
    h.lr = 0.0f;
    AdamState<float> s(p->value.shape(), h);
    const Tensor<float> before = p->value;
    for (int i = 0; i < 10; ++i) {
        p->grad.fill(float(i) - 4.5f);
        adam_step(*p, s);
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(p->value[i] == before[i]);
}
