#pragma once

// Hand-rolled plain GAN trainer used as the baseline-equivalence reference.
// The chain rule is written out manually, layer by layer; only the primitive
// compute kernels, the RNG protocol, the Adam update, and the pure loss
// functions are shared with the production path. Matching the production
// trainer bit-for-bit is the point: any divergence in the graph engine's
// forward/backward orchestration shows up as a loss mismatch.

#include <optional>
#include <vector>

#include "rfgan/data.hpp"
#include "rfgan/kernels.hpp"
#include "rfgan/losses.hpp"
#include "rfgan/networks.hpp"
#include "rfgan/optim.hpp"
#include "rfgan/rng.hpp"
#include "rfgan/training.hpp"

namespace rfgan::reference {

template <class T>
struct RefDense {
    Tensor<T> W, b;
    Tensor<T> gW, gb;
    AdamState<T> sW, sb;
    Activation act = Activation::Linear;
};

template <class T>
struct RefMlp {
    std::vector<RefDense<T>> layers;

    static RefMlp init(const NetworkSpec& spec, Rng& rng, const AdamHyper<T>& adam) {
        RefMlp net;
        for (const LayerSpec& ls : spec.layers) {
            RefDense<T> l;
            l.W = Tensor<T>({ls.in, ls.out});
            const bool rectified = ls.act == Activation::Relu || ls.act == Activation::LeakyRelu;
            const double stddev =
                rectified ? std::sqrt(2.0 / double(ls.in)) : std::sqrt(1.0 / double(ls.in));
            rng.fill_gaussian(l.W.span(), 0.0, stddev);
            l.b = Tensor<T>({ls.out});
            l.gW = Tensor<T>({ls.in, ls.out});
            l.gb = Tensor<T>({ls.out});
            l.sW = AdamState<T>(l.W.shape(), adam);
            l.sb = AdamState<T>(l.b.shape(), adam);
            l.act = ls.act;
            net.layers.push_back(std::move(l));
        }
        return net;
    }

    struct Cache {
        Tensor<T> input;
        std::vector<Tensor<T>> post; // fused layer outputs
    };

    Tensor<T> forward(const Tensor<T>& x, Cache& cache) const {
        cache.input = x;
        cache.post.clear();
        Tensor<T> cur = x;
        for (const RefDense<T>& l : layers) {
            const std::size_t m = cur.rows(), k = cur.cols(), n = l.W.cols();
            Tensor<T> post({m, n});
            kernels::dense_fwd(cur.data(), l.W.data(), l.b.data(), post.data(), m, k, n, l.act,
                               T(kLeakySlope));
            cache.post.push_back(post);
            cur = post;
        }
        return cur;
    }

    // dout is d(loss)/d(output); accumulates weight grads when requested and
    // returns d(loss)/d(input) when requested. Rectifier gates come from the
    // post-activation sign, which equals the pre-activation sign.
    Tensor<T> backward(const Cache& cache, const Tensor<T>& dout, bool weight_grads,
                       bool need_dx) {
        Tensor<T> dpost = dout;
        for (std::size_t li = layers.size(); li-- > 0;) {
            RefDense<T>& l = layers[li];
            const Tensor<T>& post = cache.post[li];
            Tensor<T> dpre(post.shape());
            kernels::dense_act_bwd(dpost.data(), post.data(), dpre.data(), dpre.size(), l.act,
                                   T(kLeakySlope));
            const Tensor<T>& below = li == 0 ? cache.input : cache.post[li - 1];
            if (weight_grads) {
                kernels::matmul_ta(below.data(), dpre.data(), l.gW.data(), below.rows(),
                                   below.cols(), dpre.cols(), /*acc=*/true);
                kernels::col_sum(dpre.data(), l.gb.data(), dpre.rows(), dpre.cols(), /*acc=*/true);
            }
            if (li == 0 && !need_dx) return Tensor<T>({1, 1});
            Tensor<T> wt({l.W.cols(), l.W.rows()});
            kernels::transpose(l.W.data(), wt.data(), l.W.rows(), l.W.cols());
            Tensor<T> dx({dpre.rows(), l.W.rows()});
            kernels::matmul(dpre.data(), wt.data(), dx.data(), dpre.rows(), dpre.cols(), wt.cols());
            dpost = dx;
        }
        return dpost;
    }

    void zero_grads() {
        for (RefDense<T>& l : layers) {
            l.gW.fill(T(0));
            l.gb.fill(T(0));
        }
    }

    // Copies the current grads out and zeroes the buffers.
    std::vector<std::pair<Tensor<T>, Tensor<T>>> take_grads() {
        std::vector<std::pair<Tensor<T>, Tensor<T>>> out;
        for (RefDense<T>& l : layers) {
            out.emplace_back(l.gW, l.gb);
            l.gW.fill(T(0));
            l.gb.fill(T(0));
        }
        return out;
    }

    // grad := (0 + first) + current, the exact order the graph engine uses
    // when a parameter is touched by two branches.
    void combine_grads(const std::vector<std::pair<Tensor<T>, Tensor<T>>>& first) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            RefDense<T>& l = layers[i];
            Tensor<T> secondW = l.gW, secondB = l.gb;
            l.gW.fill(T(0));
            l.gb.fill(T(0));
            kernels::acc_add(l.gW.data(), first[i].first.data(), l.gW.size());
            kernels::acc_add(l.gW.data(), secondW.data(), l.gW.size());
            kernels::acc_add(l.gb.data(), first[i].second.data(), l.gb.size());
            kernels::acc_add(l.gb.data(), secondB.data(), l.gb.size());
        }
    }

    void adam_all() {
        for (RefDense<T>& l : layers) {
            Param<T> pw("w", l.W);
            pw.grad = l.gW;
            adam_step(pw, l.sW);
            l.W = pw.value;
            Param<T> pb("b", l.b);
            pb.grad = l.gb;
            adam_step(pb, l.sb);
            l.b = pb.value;
        }
    }
};

template <class T>
struct RefGanResult {
    std::vector<double> d_losses; // last discriminator step of each cycle
    std::vector<double> g_losses; // last generator step of each cycle
};

// Plain GAN (no representative features, no penalty), non-saturating loss.
// Mirrors the production trainer's RNG protocol and update order exactly.
template <class T>
RefGanResult<T> run_reference_gan(std::uint64_t seed, const TrainSchedule& schedule,
                                  const RingSpec& ring, std::size_t z_dim,
                                  const std::vector<std::size_t>& g_hidden,
                                  const std::vector<std::size_t>& d_hidden, std::size_t d2,
                                  const AdamHyper<T>& adam) {
    Rng root(seed);
    Rng rng_init_g = root.derive("init.G");
    Rng rng_init_d = root.derive("init.D");
    Rng rng_data = root.derive("data");
    Rng rng_z = root.derive("z");

    RefMlp<T> gen = RefMlp<T>::init(make_generator_spec(z_dim, g_hidden, 2, false), rng_init_g,
                                    adam);
    RefMlp<T> body =
        RefMlp<T>::init(make_discriminator_body_spec(2, d_hidden, d2), rng_init_d, adam);
    Tensor<T> w2({d2, 1});
    rng_init_d.fill_gaussian(w2.span(), 0.0, std::sqrt(1.0 / double(d2)));
    Tensor<T> bias({1});
    Tensor<T> g_w2({d2, 1}), g_bias({1});
    AdamState<T> s_w2(w2.shape(), adam), s_bias(bias.shape(), adam);

    DataSource<T> data = DataSource<T>::ring(ring);
    const std::size_t b = std::size_t(schedule.batch);
    const T eps = T(kLogEps);

    // head forward: y = sigmoid(h2*w2 + bias)
    auto head_forward = [&](const Tensor<T>& h2, Tensor<T>& logit, Tensor<T>& y) {
        const std::size_t m = h2.rows();
        Tensor<T> lin({m, 1});
        kernels::matmul(h2.data(), w2.data(), lin.data(), m, h2.cols(), 1);
        logit = Tensor<T>({m, 1});
        kernels::add_bias_rows(lin.data(), bias.data(), logit.data(), m, 1);
        y = Tensor<T>({m, 1});
        kernels::sigmoid_fwd(logit.data(), y.data(), m);
    };

    // d(y chain start) given d/d(y) seed, through sigmoid
    auto sigmoid_back = [&](const Tensor<T>& dy, const Tensor<T>& y) {
        Tensor<T> dlogit(dy.shape());
        kernels::acc_sigmoid_bwd(dlogit.data(), dy.data(), y.data(), dy.size());
        return dlogit;
    };

    // head backward: accumulates g_w2/g_bias when asked, returns dh2
    auto head_backward = [&](const Tensor<T>& dlogit, const Tensor<T>& h2, bool weight_grads) {
        if (weight_grads) {
            kernels::matmul_ta(h2.data(), dlogit.data(), g_w2.data(), h2.rows(), h2.cols(), 1,
                               /*acc=*/true);
            kernels::col_sum(dlogit.data(), g_bias.data(), dlogit.rows(), 1, /*acc=*/true);
        }
        Tensor<T> w2t({1, w2.rows()});
        kernels::transpose(w2.data(), w2t.data(), w2.rows(), 1);
        Tensor<T> dh2({dlogit.rows(), w2.rows()});
        kernels::matmul(dlogit.data(), w2t.data(), dh2.data(), dlogit.rows(), 1, w2t.cols());
        return dh2;
    };

    RefGanResult<T> out;
    for (long cycle = 1; cycle <= schedule.cycles; ++cycle) {
        double last_d = 0, last_g = 0;
        for (int s = 0; s < schedule.d_steps; ++s) {
            Tensor<T> z = draw_latent<T>(b, z_dim, rng_z);
            typename RefMlp<T>::Cache gen_cache;
            Tensor<T> fake = gen.forward(z, gen_cache);
            Tensor<T> real = data.next_batch(b, rng_data);

            typename RefMlp<T>::Cache cr, cf;
            Tensor<T> h2r = body.forward(real, cr);
            Tensor<T> h2f = body.forward(fake, cf);
            Tensor<T> logit_r, y_r, logit_f, y_f;
            head_forward(h2r, logit_r, y_r);
            head_forward(h2f, logit_f, y_f);
            last_d = double(d_loss<T>(LossKind::NonSaturating, y_r.span(), y_f.span()));

            body.zero_grads();
            g_w2.fill(T(0));
            g_bias.fill(T(0));

            // real branch: d/dy of mean(-log(clamp(y))) is (0 - 1/m) / clamp(y),
            // gated to zero where the clamp is saturated
            const T ginv = T(1) / T(b);
            Tensor<T> dy_r({b, 1});
            for (std::size_t i = 0; i < b; ++i) {
                const T c = kernels::clamp_scalar(y_r[i], eps, T(1) - eps);
                const bool in_range = y_r[i] >= eps && y_r[i] <= T(1) - eps;
                dy_r[i] = in_range ? (T(0) - ginv) / c : T(0);
            }
            Tensor<T> dlogit_r = sigmoid_back(dy_r, y_r);
            Tensor<T> dh2_r = head_backward(dlogit_r, h2r, /*weight_grads=*/true);
            body.backward(cr, dh2_r, /*weight_grads=*/true, /*need_dx=*/false);
            auto real_body = body.take_grads();
            Tensor<T> real_w2 = g_w2, real_bias = g_bias;
            g_w2.fill(T(0));
            g_bias.fill(T(0));

            // fake branch: through 1-y, so the sign flips back to +
            Tensor<T> dy_f({b, 1});
            for (std::size_t i = 0; i < b; ++i) {
                const T om = T(1) - y_f[i];
                const T c = kernels::clamp_scalar(om, eps, T(1) - eps);
                const bool in_range = om >= eps && om <= T(1) - eps;
                dy_f[i] = in_range ? T(0) - ((T(0) - ginv) / c) : T(0);
            }
            Tensor<T> dlogit_f = sigmoid_back(dy_f, y_f);
            Tensor<T> dh2_f = head_backward(dlogit_f, h2f, /*weight_grads=*/true);
            body.backward(cf, dh2_f, /*weight_grads=*/true, /*need_dx=*/false);

            // per-branch sums combine exactly as the graph accumulates them
            body.combine_grads(real_body);
            {
                Tensor<T> fake_w2 = g_w2, fake_bias = g_bias;
                g_w2.fill(T(0));
                g_bias.fill(T(0));
                kernels::acc_add(g_w2.data(), real_w2.data(), g_w2.size());
                kernels::acc_add(g_w2.data(), fake_w2.data(), g_w2.size());
                kernels::acc_add(g_bias.data(), real_bias.data(), g_bias.size());
                kernels::acc_add(g_bias.data(), fake_bias.data(), g_bias.size());
            }

            body.adam_all();
            {
                Param<T> pw("head.w2", w2);
                pw.grad = g_w2;
                adam_step(pw, s_w2);
                w2 = pw.value;
                Param<T> pb("head.b", bias);
                pb.grad = g_bias;
                adam_step(pb, s_bias);
                bias = pb.value;
            }
        }
        for (int s = 0; s < schedule.g_steps; ++s) {
            Tensor<T> z = draw_latent<T>(b, z_dim, rng_z);
            typename RefMlp<T>::Cache gen_cache, body_cache;
            Tensor<T> xg = gen.forward(z, gen_cache);
            Tensor<T> h2 = body.forward(xg, body_cache);
            Tensor<T> logit, y;
            head_forward(h2, logit, y);
            last_g = double(g_loss<T>(LossKind::NonSaturating, y.span()));

            gen.zero_grads();
            // d/dy of 0.5*mean(-log(clamp(y))): scale 0.5 through the mean
            const T gm = T(0.5) / T(b);
            Tensor<T> dy({b, 1});
            for (std::size_t i = 0; i < b; ++i) {
                const T c = kernels::clamp_scalar(y[i], eps, T(1) - eps);
                const bool in_range = y[i] >= eps && y[i] <= T(1) - eps;
                dy[i] = in_range ? (T(0) - gm) / c : T(0);
            }
            Tensor<T> dlogit = sigmoid_back(dy, y);
            Tensor<T> dh2 = head_backward(dlogit, h2, /*weight_grads=*/false);
            Tensor<T> dxg = body.backward(body_cache, dh2, /*weight_grads=*/false,
                                          /*need_dx=*/true);
            gen.backward(gen_cache, dxg, /*weight_grads=*/true, /*need_dx=*/false);
            gen.adam_all();
        }
        out.d_losses.push_back(last_d);
        out.g_losses.push_back(last_g);
    }
    return out;
}

} // namespace rfgan::reference
