#pragma once

#include <cmath>
#include <span>
#include <string>

#include "rfgan/graph.hpp"
#include "rfgan/networks.hpp"
#include "rfgan/rng.hpp"

namespace rfgan {

enum class LossKind : std::uint8_t { Minimax, NonSaturating, LeastSquares, Wasserstein };
enum class PenaltyKind : std::uint8_t { None, WganGp, Dragan };

// Numerical clamp for the log losses.
constexpr double kLogEps = 1e-7;

inline bool sigmoid_head_for(LossKind k) {
    return k == LossKind::Minimax || k == LossKind::NonSaturating;
}

struct LossSpec {
    LossKind kind = LossKind::NonSaturating;
    PenaltyKind penalty = PenaltyKind::None;
    double lambda = 10.0;

    void validate() const {
        if (penalty != PenaltyKind::None)
            require(lambda > 0.0, "LossSpec: penalty coefficient lambda must be > 0");
    }
};

namespace detail {

template <class T>
void check_log_outputs(std::span<const T> y) {
    for (T v : y)
        require(v >= T(0) && v <= T(1),
                "loss: output " + std::to_string(double(v)) + " outside [0,1] for a log loss");
}

template <class T>
T mean_of(std::span<const T> y) {
    T s = T(0);
    for (T v : y) s += v;
    return s / T(y.size());
}

// The pure loss functions below mirror the graph-built losses operation for
// operation so both routes produce bit-identical values.
template <class T, class F>
T mean_map(std::span<const T> y, F f) {
    T s = T(0);
    for (T v : y) s += f(v);
    return s / T(y.size());
}

} // namespace detail

// Discriminator objective (to be minimized), mean over the batch.
// Minimax/NonSaturating expect post-sigmoid outputs; LeastSquares and
// Wasserstein expect raw head outputs.
template <class T>
T d_loss(LossKind kind, std::span<const T> d_real, std::span<const T> d_fake) {
    require(!d_real.empty() && !d_fake.empty(), "d_loss: empty batch");
    const T eps = T(kLogEps);
    switch (kind) {
        case LossKind::Minimax:
        case LossKind::NonSaturating: {
            detail::check_log_outputs(d_real);
            detail::check_log_outputs(d_fake);
            T a = detail::mean_map(d_real, [eps](T y) {
                return -std::log(kernels::clamp_scalar(y, eps, T(1) - eps));
            });
            T b = detail::mean_map(d_fake, [eps](T y) {
                return -std::log(kernels::clamp_scalar(T(1) - y, eps, T(1) - eps));
            });
            return a + b;
        }
        case LossKind::LeastSquares: {
            T a = detail::mean_map(d_real, [](T y) { return (y + T(-1)) * (y + T(-1)); });
            T b = detail::mean_map(d_fake, [](T y) { return y * y; });
            return a * T(0.5) + b * T(0.5);
        }
        case LossKind::Wasserstein:
            return detail::mean_of(d_fake) - detail::mean_of(d_real);
    }
    fail("d_loss: unknown loss kind");
}

// Generator objective (to be minimized).
template <class T>
T g_loss(LossKind kind, std::span<const T> d_fake) {
    require(!d_fake.empty(), "g_loss: empty batch");
    const T eps = T(kLogEps);
    switch (kind) {
        case LossKind::Minimax:
            detail::check_log_outputs(d_fake);
            return detail::mean_map(d_fake, [eps](T y) {
                return std::log(kernels::clamp_scalar(T(1) - y, eps, T(1) - eps));
            });
        case LossKind::NonSaturating:
            detail::check_log_outputs(d_fake);
            // the 1/2 factor is kept; it only rescales the effective step size
            return detail::mean_map(d_fake, [eps](T y) {
                       return -std::log(kernels::clamp_scalar(y, eps, T(1) - eps));
                   }) *
                   T(0.5);
        case LossKind::LeastSquares:
            return detail::mean_map(d_fake, [](T y) { return (y + T(-1)) * (y + T(-1)); }) *
                   T(0.5);
        case LossKind::Wasserstein:
            return -detail::mean_of(d_fake);
    }
    fail("g_loss: unknown loss kind");
}

// ---- graph-side builders (same formulas, node by node) -------------------

template <class T>
typename Graph<T>::Id append_d_loss(Graph<T>& g, LossKind kind, typename Graph<T>::Id y_real,
                                    typename Graph<T>::Id y_fake) {
    const T eps = T(kLogEps);
    switch (kind) {
        case LossKind::Minimax:
        case LossKind::NonSaturating: {
            auto a = g.mean(g.neg(g.log_(g.clamp(y_real, eps, T(1) - eps))));
            auto b = g.mean(g.neg(g.log_(g.clamp(g.rsub_scalar(T(1), y_fake), eps, T(1) - eps))));
            return g.add(a, b);
        }
        case LossKind::LeastSquares: {
            auto a = g.mean(g.square(g.add_scalar(y_real, T(-1))));
            auto b = g.mean(g.square(y_fake));
            return g.add(g.mul_scalar(a, T(0.5)), g.mul_scalar(b, T(0.5)));
        }
        case LossKind::Wasserstein:
            return g.sub(g.mean(y_fake), g.mean(y_real));
    }
    fail("append_d_loss: unknown loss kind");
}

template <class T>
typename Graph<T>::Id append_g_loss(Graph<T>& g, LossKind kind, typename Graph<T>::Id y_fake) {
    const T eps = T(kLogEps);
    switch (kind) {
        case LossKind::Minimax:
            return g.mean(g.log_(g.clamp(g.rsub_scalar(T(1), y_fake), eps, T(1) - eps)));
        case LossKind::NonSaturating:
            return g.mul_scalar(g.mean(g.neg(g.log_(g.clamp(y_fake, eps, T(1) - eps)))), T(0.5));
        case LossKind::LeastSquares:
            return g.mul_scalar(g.mean(g.square(g.add_scalar(y_fake, T(-1)))), T(0.5));
        case LossKind::Wasserstein:
            return g.neg(g.mean(y_fake));
    }
    fail("append_g_loss: unknown loss kind");
}

// Penalty evaluation points. WGAN-GP interpolates real and fake pairs with
// per-sample epsilon ~ U(0,1); DRAGAN perturbs real samples by
// 0.5 * std(real) * u with u ~ U(-1,1) elementwise.
template <class T>
Tensor<T> penalty_points(PenaltyKind kind, const Tensor<T>& real, const Tensor<T>& fake,
                         Rng& rng) {
    require(kind != PenaltyKind::None, "penalty_points: penalty kind is None");
    require(real.rank() == 2 && real.size() > 0, "penalty_points: zero-size batch");
    Tensor<T> out(real.shape());
    const std::size_t m = real.rows(), n = real.cols();
    if (kind == PenaltyKind::WganGp) {
        require(real.shape() == fake.shape(), "penalty_points: real/fake batch shapes differ");
        for (std::size_t i = 0; i < m; ++i) {
            const T e = T(rng.uniform());
            for (std::size_t j = 0; j < n; ++j)
                out.at(i, j) = e * real.at(i, j) + (T(1) - e) * fake.at(i, j);
        }
    } else {
        // batch std over all elements
        double mean = 0.0;
        for (std::size_t i = 0; i < real.size(); ++i) mean += double(real[i]);
        mean /= double(real.size());
        double var = 0.0;
        for (std::size_t i = 0; i < real.size(); ++i) {
            const double d = double(real[i]) - mean;
            var += d * d;
        }
        const T scale = T(0.5 * std::sqrt(var / double(real.size())));
        for (std::size_t i = 0; i < real.size(); ++i)
            out[i] = real[i] + scale * T(rng.uniform(-1.0, 1.0));
    }
    return out;
}

// lambda * mean((||grad_x D(x_hat)||_2 - 1)^2), taken through the full head
// including the frozen encoder path. x_hat is an input node carrying the
// evaluation points.
template <class T>
typename Graph<T>::Id append_gradient_penalty(Graph<T>& g, const RFDiscriminator<T>& d,
                                              typename Graph<T>::Id x_hat, double lambda) {
    auto fwd = d.apply(g, x_hat);
    auto gx = d.append_input_gradient_nodes(g, fwd);
    auto norms = g.sqrt_(g.sum_rows(g.square(gx)));
    return g.mul_scalar(g.mean(g.square(g.add_scalar(norms, T(-1)))), T(lambda));
}

// Standalone penalty value for a given discriminator and batches.
template <class T>
T gradient_penalty(PenaltyKind kind, double lambda, const RFDiscriminator<T>& d,
                   const Tensor<T>& real, const Tensor<T>& fake, Rng& rng) {
    require(kind != PenaltyKind::None, "gradient_penalty: penalty kind is None");
    require(lambda > 0.0, "gradient_penalty: lambda must be > 0");
    Tensor<T> points = penalty_points(kind, real, fake, rng);
    Graph<T> g;
    auto x = g.input("x_hat", points.shape());
    auto pen = append_gradient_penalty(g, d, x, lambda);
    g.set_input("x_hat", points);
    g.forward();
    return g.value(pen).value();
}

} // namespace rfgan
