#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rfgan/checkpoint.hpp"
#include "rfgan/data.hpp"
#include "rfgan/losses.hpp"
#include "rfgan/metric_log.hpp"
#include "rfgan/metrics.hpp"
#include "rfgan/networks.hpp"
#include "rfgan/optim.hpp"
#include "rfgan/sha256.hpp"

namespace rfgan {

struct TrainSchedule {
    int g_steps = 2; // generator updates per cycle
    int d_steps = 1; // discriminator updates per cycle
    long cycles = 25000;
    int batch = 256;

    void validate() const {
        require(g_steps >= 1 && d_steps >= 1, "TrainSchedule: step counts must be positive");
        require(cycles >= 1, "TrainSchedule: cycles must be positive");
        require(batch >= 1, "TrainSchedule: batch size must be positive");
    }

    static TrainSchedule wgan_gp_preset() {
        TrainSchedule s;
        s.g_steps = 1;
        s.d_steps = 5;
        return s;
    }
};

// Latent draws are uniform in [-1,1]^z_dim.
template <class T>
Tensor<T> draw_latent(std::size_t n, std::size_t z_dim, Rng& rng) {
    Tensor<T> z({n, z_dim});
    rng.fill_uniform(z.span(), -1.0, 1.0);
    return z;
}

// SHA-256 over the raw value bytes of a parameter list, in order.
template <class T>
std::string params_sha256(const std::vector<ParamPtr<T>>& params) {
    Sha256 h;
    for (const auto& p : params)
        h.update(p->value.data(), p->value.size() * sizeof(T));
    return h.hex();
}

// ---- denoising autoencoder pretraining -----------------------------------

template <class T>
struct AeConfig {
    NetworkSpec encoder;
    NetworkSpec decoder;
    int epochs = 20;
    double noise_std = 0.1;
    int batch = 256;
    int steps_per_epoch = 0; // 0: one pass for tables, 256 batches for ring data
    AdamHyper<T> adam;
    std::uint64_t seed = 0;
    std::size_t eval_samples = 4096;

    void validate() const {
        require(epochs >= 1, "AeConfig: epochs must be positive");
        require(noise_std >= 0.0, "AeConfig: noise_std must be >= 0");
        require(batch >= 1, "AeConfig: batch must be positive");
    }
};

template <class T>
struct AeResult {
    Mlp<T> encoder; // frozen (trainable=false)
    Mlp<T> decoder;
    MetricLog log;
    double final_mse = 0.0;         // recon MSE on a held-out draw
    double mean_baseline_mse = 0.0; // MSE of predicting the per-column mean
};

// Minimizes mean squared error between decode(encode(corrupt(x))) and the
// clean x. The returned encoder is frozen.
template <class T>
AeResult<T> pretrain_autoencoder(const AeConfig<T>& cfg, DataSource<T>& data) {
    cfg.validate();
    auto [enc_spec, dec_spec] = build_autoencoder(cfg.encoder, cfg.decoder);
    require(enc_spec.in_dim() == data.dim(), "pretrain_autoencoder: encoder input dim " +
                                                 std::to_string(enc_spec.in_dim()) +
                                                 " != data dim " + std::to_string(data.dim()));
    require(dec_spec.out_dim() == data.dim(),
            "pretrain_autoencoder: decoder output dim does not match data dim");

    Rng root(cfg.seed);
    Rng rng_init_e = root.derive("init.E");
    Rng rng_init_dec = root.derive("init.Dec");
    Rng rng_data = root.derive("data");
    Rng rng_noise = root.derive("noise");
    Rng rng_eval = root.derive("eval");

    AeResult<T> out;
    out.encoder = Mlp<T>::init(enc_spec, "E", rng_init_e);
    out.decoder = Mlp<T>::init(dec_spec, "Dec", rng_init_dec);

    const std::size_t b = std::size_t(cfg.batch);
    const std::size_t d = data.dim();
    Graph<T> g;
    auto x_noisy = g.input("x_noisy", {b, d});
    auto x_clean = g.input("x_clean", {b, d});
    auto code = out.encoder.apply(g, x_noisy);
    auto recon = out.decoder.apply(g, code.out);
    auto loss = g.mean(g.square(g.sub(recon.out, x_clean)));

    std::vector<ParamPtr<T>> params = out.encoder.params();
    for (auto& p : out.decoder.params()) params.push_back(p);
    g.prepare_backward(loss, params);
    std::vector<AdamState<T>> states;
    for (const auto& p : params) states.emplace_back(p->value.shape(), cfg.adam);

    int steps = cfg.steps_per_epoch;
    if (steps <= 0)
        steps = data.is_ring() ? 256
                               : int((data.table_rows() + b - 1) / b);

    long global_step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int s = 0; s < steps; ++s) {
            Tensor<T> clean = data.next_batch(b, rng_data);
            Tensor<T> noisy = corrupt(clean, cfg.noise_std, rng_noise);
            g.set_input("x_noisy", noisy);
            g.set_input("x_clean", clean);
            g.forward();
            const double lv = double(g.value(loss).value());
            require(std::isfinite(lv), "pretrain_autoencoder: training diverged (non-finite "
                                       "loss) at epoch " +
                                           std::to_string(epoch));
            for (auto& p : params) p->zero_grad();
            g.backward();
            for (std::size_t i = 0; i < params.size(); ++i) adam_step(*params[i], states[i]);
            epoch_loss += lv;
            ++global_step;
        }
        out.log.push(global_step, "recon_mse", epoch_loss / double(steps));
    }

    // held-out reconstruction error vs the mean-predictor baseline
    Tensor<T> eval_clean = data.next_batch(cfg.eval_samples, rng_eval);
    Tensor<T> eval_noisy = corrupt(eval_clean, cfg.noise_std, rng_noise);
    Tensor<T> eval_recon = out.decoder.infer(out.encoder.infer(eval_noisy));
    double mse = 0.0;
    for (std::size_t i = 0; i < eval_clean.size(); ++i) {
        const double diff = double(eval_recon[i]) - double(eval_clean[i]);
        mse += diff * diff;
    }
    out.final_mse = mse / double(eval_clean.size());

    std::vector<double> col_mean(d, 0.0);
    for (std::size_t i = 0; i < eval_clean.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) col_mean[j] += double(eval_clean.at(i, j));
    for (double& v : col_mean) v /= double(eval_clean.rows());
    double base = 0.0;
    for (std::size_t i = 0; i < eval_clean.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = double(eval_clean.at(i, j)) - col_mean[j];
            base += diff * diff;
        }
    out.mean_baseline_mse = base / double(eval_clean.size());

    out.log.push(global_step, "final_recon_mse", out.final_mse);
    out.log.push(global_step, "baseline_mse", out.mean_baseline_mse);

    out.encoder.set_trainable(false);
    return out;
}

// ---- GAN training ----------------------------------------------------------

template <class T>
struct GanConfig {
    LossSpec loss;
    TrainSchedule schedule;
    AdamHyper<T> adam;
    std::size_t z_dim = 2;
    std::vector<std::size_t> g_hidden{128, 128};
    std::vector<std::size_t> d_hidden{128, 128};
    std::size_t d2 = 128;
    std::size_t out_dim = 2;
    bool g_tanh_out = false;
    std::uint64_t seed = 0;
    long metric_every = 500;
    long checkpoint_every = 0; // 0: no periodic checkpoints
    std::string out_dir;       // empty: no files written
    std::optional<RingSpec> coverage; // log ring mode coverage during training
    std::size_t coverage_samples = 2560;
};

template <class T>
struct GanResult {
    Mlp<T> generator;
    RFDiscriminator<T> discriminator;
    MetricLog log;
    long g_updates = 0;
    long d_updates = 0;
};

struct HeadBalance {
    double repr_margin = 0.0;   // mean(h1.w1 | real) - mean(h1.w1 | fake)
    double disc_margin = 0.0;   // mean(h2.w2 | real) - mean(h2.w2 | fake)
    double repr_mean_abs = 0.0; // mean |h1.w1| over both batches
    double disc_mean_abs = 0.0;
};

// Quantifies how discriminative each feature head currently is.
template <class T>
HeadBalance head_balance_diagnostic(const RFDiscriminator<T>& d, const Tensor<T>& real,
                                    const Tensor<T>& fake) {
    auto contribution = [&](const Mlp<T>& net, const ParamPtr<T>& w, const Tensor<T>& x,
                            double& mean, double& mean_abs) {
        Tensor<T> h = net.infer(x);
        const std::size_t m = h.rows(), k = h.cols();
        Tensor<T> s({m, 1});
        kernels::matmul(h.data(), w->value.data(), s.data(), m, k, 1);
        mean = 0.0;
        mean_abs = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            mean += double(s[i]);
            mean_abs += std::abs(double(s[i]));
        }
        mean /= double(m);
        mean_abs /= double(m);
    };

    HeadBalance hb;
    double mr = 0, mf = 0, ar = 0, af = 0;
    contribution(d.body, d.w2, real, mr, ar);
    contribution(d.body, d.w2, fake, mf, af);
    hb.disc_margin = mr - mf;
    hb.disc_mean_abs = 0.5 * (ar + af);
    if (d.encoder) {
        contribution(*d.encoder, d.w1, real, mr, ar);
        contribution(*d.encoder, d.w1, fake, mf, af);
        hb.repr_margin = mr - mf;
        hb.repr_mean_abs = 0.5 * (ar + af);
    }
    return hb;
}

namespace detail {

template <class T>
NamedTensors snapshot_params(const Mlp<T>& gen, const RFDiscriminator<T>& d) {
    NamedTensors out;
    append_params(out, gen.params());
    append_params(out, d.body.params());
    if (d.w1) out.emplace_back(d.w1->name, d.w1->value.template cast<float>());
    out.emplace_back(d.w2->name, d.w2->value.template cast<float>());
    out.emplace_back(d.bias->name, d.bias->value.template cast<float>());
    if (d.encoder) append_params(out, d.encoder->params());
    return out;
}

inline std::string checkpoint_name(long cycle) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_%06ld.rfgn", cycle);
    return buf;
}

} // namespace detail

// Alternating GAN training. When an encoder is supplied its features feed
// the discriminator head and the encoder itself stays frozen; without one
// this is the plain baseline GAN.
template <class T>
GanResult<T> train_gan(const GanConfig<T>& cfg, DataSource<T>& data,
                       std::optional<Mlp<T>> encoder) {
    cfg.schedule.validate();
    cfg.loss.validate();
    require(cfg.out_dim == data.dim(), "train_gan: generator output dim " +
                                           std::to_string(cfg.out_dim) + " != data dim " +
                                           std::to_string(data.dim()));
    if (encoder)
        require(encoder->in_dim() == data.dim(),
                "train_gan: encoder input dim does not match data dim");

    Rng root(cfg.seed);
    Rng rng_init_g = root.derive("init.G");
    Rng rng_init_d = root.derive("init.D");
    Rng rng_data = root.derive("data");
    Rng rng_z = root.derive("z");
    Rng rng_pen = root.derive("penalty");
    Rng rng_eval = root.derive("eval");

    const bool sigmoid_head = sigmoid_head_for(cfg.loss.kind);
    const std::size_t b = std::size_t(cfg.schedule.batch);
    const std::size_t d_in = data.dim();

    GanResult<T> out;
    out.generator = Mlp<T>::init(make_generator_spec(cfg.z_dim, cfg.g_hidden, cfg.out_dim,
                                                     cfg.g_tanh_out),
                                 "G", rng_init_g);
    out.discriminator = RFDiscriminator<T>::init(
        make_discriminator_body_spec(d_in, cfg.d_hidden, cfg.d2), std::move(encoder),
        sigmoid_head, rng_init_d);
    Mlp<T>& gen = out.generator;
    RFDiscriminator<T>& disc = out.discriminator;

    // generator-only graph: produces fake batches for discriminator steps
    Graph<T> gen_graph;
    auto gz = gen_graph.input("z", {b, cfg.z_dim});
    auto gen_out = gen.apply(gen_graph, gz).out;

    // discriminator step graph (fakes arrive as a detached input)
    Graph<T> d_graph;
    auto dx_real = d_graph.input("x_real", {b, d_in});
    auto dx_fake = d_graph.input("x_fake", {b, d_in});
    auto fwd_real = disc.apply(d_graph, dx_real);
    auto fwd_fake = disc.apply(d_graph, dx_fake);
    auto d_loss_id = append_d_loss(d_graph, cfg.loss.kind, fwd_real.y, fwd_fake.y);
    typename Graph<T>::Id x_hat = -1;
    if (cfg.loss.penalty != PenaltyKind::None) {
        x_hat = d_graph.input("x_hat", {b, d_in});
        d_loss_id = d_graph.add(d_loss_id,
                                append_gradient_penalty(d_graph, disc, x_hat, cfg.loss.lambda));
    }
    auto d_params = disc.trainable_params();
    d_graph.prepare_backward(d_loss_id, d_params);

    // generator step graph: loss flows through the full head
    Graph<T> g_graph;
    auto gz2 = g_graph.input("z", {b, cfg.z_dim});
    auto g_sample = gen.apply(g_graph, gz2).out;
    auto fwd_g = disc.apply(g_graph, g_sample);
    auto g_loss_id = append_g_loss(g_graph, cfg.loss.kind, fwd_g.y);
    auto g_params = gen.params();
    g_graph.prepare_backward(g_loss_id, g_params);

    std::vector<AdamState<T>> d_states, g_states;
    for (const auto& p : d_params) d_states.emplace_back(p->value.shape(), cfg.adam);
    for (const auto& p : g_params) g_states.emplace_back(p->value.shape(), cfg.adam);

    Tensor<T> last_real({b, d_in}), last_fake({b, d_in});
    double last_d_loss = 0.0, last_g_loss = 0.0;
    Tensor<T> eval_means;
    if (cfg.coverage) eval_means = ring_means<T>(*cfg.coverage);

    for (long cycle = 1; cycle <= cfg.schedule.cycles; ++cycle) {
        for (int s = 0; s < cfg.schedule.d_steps; ++s) {
            Tensor<T> z = draw_latent<T>(b, cfg.z_dim, rng_z);
            gen_graph.set_input("z", z);
            gen_graph.forward();
            last_fake = gen_graph.value(gen_out);
            last_real = data.next_batch(b, rng_data);
            d_graph.set_input("x_real", last_real);
            d_graph.set_input("x_fake", last_fake);
            if (x_hat >= 0)
                d_graph.set_input("x_hat", penalty_points(cfg.loss.penalty, last_real,
                                                          last_fake, rng_pen));
            d_graph.forward();
            last_d_loss = double(d_graph.value(d_loss_id).value());
            require(std::isfinite(last_d_loss),
                    "train_gan: non-finite discriminator loss at cycle " + std::to_string(cycle));
            for (auto& p : d_params) p->zero_grad();
            d_graph.backward();
            for (std::size_t i = 0; i < d_params.size(); ++i)
                adam_step(*d_params[i], d_states[i]);
            ++out.d_updates;
        }
        for (int s = 0; s < cfg.schedule.g_steps; ++s) {
            Tensor<T> z = draw_latent<T>(b, cfg.z_dim, rng_z);
            g_graph.set_input("z", z);
            g_graph.forward();
            last_g_loss = double(g_graph.value(g_loss_id).value());
            require(std::isfinite(last_g_loss),
                    "train_gan: non-finite generator loss at cycle " + std::to_string(cycle));
            for (auto& p : g_params) p->zero_grad();
            g_graph.backward();
            for (std::size_t i = 0; i < g_params.size(); ++i)
                adam_step(*g_params[i], g_states[i]);
            ++out.g_updates;
        }

        if (cfg.metric_every > 0 && cycle % cfg.metric_every == 0) {
            out.log.push(cycle, "d_loss", last_d_loss);
            out.log.push(cycle, "g_loss", last_g_loss);
            const Tensor<T>& yr = d_graph.value(fwd_real.y);
            const Tensor<T>& yf = d_graph.value(fwd_fake.y);
            out.log.push(cycle, "y_real_mean",
                         double(kernels::sum(yr.data(), yr.size())) / double(yr.size()));
            out.log.push(cycle, "y_fake_mean",
                         double(kernels::sum(yf.data(), yf.size())) / double(yf.size()));
            HeadBalance hb = head_balance_diagnostic(disc, last_real, last_fake);
            out.log.push(cycle, "repr_margin", hb.repr_margin);
            out.log.push(cycle, "disc_margin", hb.disc_margin);
            out.log.push(cycle, "repr_mean_abs", hb.repr_mean_abs);
            out.log.push(cycle, "disc_mean_abs", hb.disc_mean_abs);
            if (cfg.coverage) {
                Tensor<T> zs = draw_latent<T>(cfg.coverage_samples, cfg.z_dim, rng_eval);
                Tensor<T> samples = gen.infer(zs);
                ModeReport rep = mode_coverage(samples, eval_means, cfg.coverage->sigma);
                out.log.push(cycle, "modes_covered", double(rep.modes_covered));
                out.log.push(cycle, "high_quality_fraction", rep.high_quality_fraction);
            }
        }
        if (cfg.checkpoint_every > 0 && !cfg.out_dir.empty() &&
            cycle % cfg.checkpoint_every == 0)
            save_checkpoint(cfg.out_dir + "/" + detail::checkpoint_name(cycle),
                            detail::snapshot_params(gen, disc));
    }

    if (!cfg.out_dir.empty())
        save_checkpoint(cfg.out_dir + "/ckpt_final.rfgn", detail::snapshot_params(gen, disc));
    return out;
}

} // namespace rfgan
