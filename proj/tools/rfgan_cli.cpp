// Experiment driver: pretrain-ae / train / eval / interpolate / plot.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "rfgan/checkpoint.hpp"
#include "rfgan/config.hpp"
#include "rfgan/data.hpp"
#include "rfgan/metrics.hpp"
#include "rfgan/networks.hpp"
#include "rfgan/svg.hpp"
#include "rfgan/training.hpp"

namespace fs = std::filesystem;
using namespace rfgan;

namespace {

using Real = float; // training precision

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
};

ExperimentConfig load_config(const CommonArgs& args) {
    require(!args.config_path.empty(), "--config is required");
    ExperimentConfig cfg = parse_config(args.config_path);
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;
    if (args.seed_override >= 0) cfg.seed = std::uint64_t(args.seed_override);
    fs::create_directories(cfg.out_dir);
    return cfg;
}

// Image rows are flattened and normalized to [-1,1].
struct LoadedData {
    DataSource<Real> source;
    std::size_t img_h = 0, img_w = 0; // zero for the ring track
};

Tensor<Real> flatten_images(const TensorF& imgs, double lo, double hi) {
    const std::size_t n = imgs.dim(0), h = imgs.dim(1), w = imgs.dim(2);
    TensorF flat({n, h * w});
    for (std::size_t i = 0; i < imgs.size(); ++i) flat[i] = imgs[i];
    return normalize_unit_range(flat, lo, hi);
}

LoadedData open_data(const ExperimentConfig& cfg, bool materialize_ring, Rng dataset_rng) {
    if (cfg.data.kind == ExperimentConfig::Data::Kind::Ring) {
        if (materialize_ring) {
            Tensor<Real> table =
                sample_ring<Real>(cfg.data.ring, cfg.data.train_size, dataset_rng);
            return {DataSource<Real>::table(std::move(table))};
        }
        return {DataSource<Real>::ring(cfg.data.ring)};
    }
    TensorF imgs = load_idx(cfg.data.idx_path);
    LoadedData out{DataSource<Real>::table(
                       flatten_images(imgs, cfg.data.normalize_lo, cfg.data.normalize_hi)),
                   imgs.dim(1), imgs.dim(2)};
    return out;
}

NetworkSpec encoder_spec_of(const ExperimentConfig& cfg, std::size_t data_dim) {
    return make_encoder_spec(data_dim, cfg.model.d_hidden, cfg.model.d1);
}

Mlp<Real> load_generator(const ExperimentConfig& cfg, std::size_t data_dim,
                         const std::string& ckpt_path) {
    NamedTensors ckpt = load_checkpoint(ckpt_path);
    return mlp_from_checkpoint<Real>(
        make_generator_spec(cfg.model.z_dim, cfg.model.g_hidden, data_dim, cfg.model.g_tanh_out),
        "G", ckpt);
}

int cmd_pretrain(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    Rng root(cfg.seed);
    LoadedData data = open_data(cfg, /*materialize_ring=*/true, root.derive("dataset"));
    const std::size_t dim = data.source.dim();

    AeConfig<Real> ae;
    ae.encoder = encoder_spec_of(cfg, dim);
    ae.decoder = make_decoder_spec(cfg.model.d1, cfg.model.g_hidden, dim, cfg.model.g_tanh_out);
    ae.epochs = cfg.ae.epochs;
    ae.noise_std = cfg.ae.noise_std;
    ae.batch = cfg.ae.batch;
    ae.steps_per_epoch = cfg.ae.steps_per_epoch;
    ae.seed = cfg.seed;

    AeResult<Real> res = pretrain_autoencoder(ae, data.source);

    NamedTensors enc;
    append_params(enc, res.encoder.params());
    save_checkpoint(cfg.out_dir + "/encoder.rfgn", enc);
    NamedTensors dec;
    append_params(dec, res.decoder.params());
    save_checkpoint(cfg.out_dir + "/decoder.rfgn", dec);
    res.log.write_csv(cfg.out_dir + "/metrics.csv");

    std::cout << "pretrain-ae: recon_mse=" << res.final_mse
              << " mean_baseline_mse=" << res.mean_baseline_mse << "\n";
    std::cout << "wrote " << cfg.out_dir << "/encoder.rfgn\n";
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& encoder_flag) {
    ExperimentConfig cfg = load_config(args);
    Rng root(cfg.seed);
    LoadedData data = open_data(cfg, /*materialize_ring=*/false, root.derive("dataset"));
    const std::size_t dim = data.source.dim();

    std::optional<Mlp<Real>> encoder;
    if (cfg.model.rf) {
        std::string path = encoder_flag.empty() ? cfg.model.encoder_checkpoint : encoder_flag;
        require(!path.empty(),
                "encoder checkpoint required: pass --encoder or set model.encoder_checkpoint "
                "(run pretrain-ae first), or set model.rf=false");
        NamedTensors ckpt = load_checkpoint(path);
        encoder = mlp_from_checkpoint<Real>(encoder_spec_of(cfg, dim), "E", ckpt);
        encoder->set_trainable(false);
    }

    GanConfig<Real> gc;
    gc.loss = cfg.loss;
    gc.schedule = cfg.schedule.sched;
    gc.z_dim = cfg.model.z_dim;
    gc.g_hidden = cfg.model.g_hidden;
    gc.d_hidden = cfg.model.d_hidden;
    gc.d2 = cfg.model.d2;
    gc.out_dim = dim;
    gc.g_tanh_out = cfg.model.g_tanh_out;
    gc.seed = cfg.seed;
    gc.metric_every = cfg.schedule.metric_every;
    gc.checkpoint_every = cfg.schedule.checkpoint_every;
    gc.out_dir = cfg.out_dir;
    if (cfg.data.kind == ExperimentConfig::Data::Kind::Ring) gc.coverage = cfg.data.ring;

    GanResult<Real> res = train_gan(gc, data.source, std::move(encoder));
    res.log.write_csv(cfg.out_dir + "/metrics.csv");

    std::cout << "train: " << res.g_updates << " generator updates, " << res.d_updates
              << " discriminator updates\n";
    if (res.log.has("modes_covered"))
        std::cout << "train: final modes_covered=" << res.log.last("modes_covered") << "\n";
    std::cout << "wrote " << cfg.out_dir << "/ckpt_final.rfgn\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path) {
    ExperimentConfig cfg = load_config(args);
    require(!ckpt_path.empty(), "--checkpoint is required for eval");
    Rng root(cfg.seed);
    Rng rng_z = root.derive("eval.z");
    Rng rng_pairs = root.derive("eval.pairs");

    nlohmann::ordered_json summary;
    summary["ms_ssim_mean"] = nullptr;
    summary["modes_covered"] = nullptr;
    summary["high_quality_fraction"] = nullptr;
    summary["proxy_score"] = nullptr;

    if (cfg.data.kind == ExperimentConfig::Data::Kind::Ring) {
        Mlp<Real> gen = load_generator(cfg, 2, ckpt_path);
        Tensor<Real> z = draw_latent<Real>(cfg.eval.samples, cfg.model.z_dim, rng_z);
        Tensor<Real> samples = gen.infer(z);
        ModeReport rep = mode_coverage(samples, ring_means<Real>(cfg.data.ring),
                                       cfg.data.ring.sigma, cfg.eval.coverage_threshold);
        summary["modes_covered"] = rep.modes_covered;
        summary["high_quality_fraction"] = rep.high_quality_fraction;
        std::cout << "eval: modes_covered=" << rep.modes_covered
                  << " high_quality_fraction=" << rep.high_quality_fraction << "\n";
    } else {
        TensorF probe = load_idx(cfg.data.idx_path);
        const std::size_t h = probe.dim(1), w = probe.dim(2);
        Mlp<Real> gen = load_generator(cfg, h * w, ckpt_path);
        Tensor<Real> z = draw_latent<Real>(cfg.eval.samples, cfg.model.z_dim, rng_z);
        Tensor<Real> flat = gen.infer(z);
        Tensor<Real> imgs({cfg.eval.samples, h, w});
        for (std::size_t i = 0; i < flat.size(); ++i) imgs[i] = flat[i];
        int levels = cfg.eval.ms_ssim_levels;
        if (levels == 0) levels = ms_ssim_max_levels(h, w);
        require(levels >= 1, "eval: images too small for MS-SSIM");
        SsimOptions opt;
        opt.in_lo = -1.0; // generator emits [-1,1]
        opt.in_hi = 1.0;
        const double mean =
            pairwise_ms_ssim(imgs, cfg.eval.pairs, rng_pairs, levels, opt);
        summary["ms_ssim_mean"] = mean;
        std::cout << "eval: ms_ssim_mean=" << mean << " (levels=" << levels << ")\n";
    }

    std::ofstream os(cfg.out_dir + "/eval.json", std::ios::binary | std::ios::trunc);
    require(bool(os), "eval: cannot write eval.json");
    os << summary.dump(2) << "\n";
    std::cout << "wrote " << cfg.out_dir << "/eval.json\n";
    return 0;
}

std::vector<Real> parse_vector(const std::string& csv) {
    std::vector<Real> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        const std::string item = csv.substr(pos, next - pos);
        require(!item.empty(), "could not parse vector component in '" + csv + "'");
        out.push_back(Real(std::stod(item)));
        pos = next + 1;
    }
    return out;
}

int cmd_interpolate(const CommonArgs& args, const std::string& ckpt_path, int steps,
                    const std::string& z0_text, const std::string& z1_text) {
    ExperimentConfig cfg = load_config(args);
    require(!ckpt_path.empty(), "--checkpoint is required for interpolate");
    require(steps >= 2, "interpolate: steps must be >= 2");
    std::size_t dim = 2;
    if (cfg.data.kind == ExperimentConfig::Data::Kind::Idx) {
        TensorF probe = load_idx(cfg.data.idx_path);
        dim = probe.dim(1) * probe.dim(2);
    }
    Mlp<Real> gen = load_generator(cfg, dim, ckpt_path);

    Rng root(cfg.seed);
    Rng rng = root.derive("interpolate");
    const std::size_t zd = cfg.model.z_dim;
    std::vector<Real> z0, z1;
    if (!z0_text.empty()) z0 = parse_vector(z0_text);
    else {
        z0.resize(zd);
        rng.fill_uniform(std::span<Real>(z0), -1.0, 1.0);
    }
    if (!z1_text.empty()) z1 = parse_vector(z1_text);
    else {
        z1.resize(zd);
        rng.fill_uniform(std::span<Real>(z1), -1.0, 1.0);
    }
    require(z0.size() == zd && z1.size() == zd,
            "interpolate: z dim mismatch (expected " + std::to_string(zd) + " components)");

    Tensor<Real> z({std::size_t(steps), zd});
    for (int i = 0; i < steps; ++i) {
        const Real a = Real(i) / Real(steps - 1);
        for (std::size_t j = 0; j < zd; ++j)
            z.at(std::size_t(i), j) = (Real(1) - a) * z0[j] + a * z1[j];
    }
    Tensor<Real> out = gen.infer(z);

    const std::string path = cfg.out_dir + "/interpolation.csv";
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(bool(os), "interpolate: cannot write '" + path + "'");
    char buf[40];
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g", double(out.at(i, j)));
            os << (j ? "," : "") << buf;
        }
        os << "\n";
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_plot(const CommonArgs& args, const std::string& ckpt_path, long n_samples) {
    ExperimentConfig cfg = load_config(args);
    require(cfg.data.kind == ExperimentConfig::Data::Kind::Ring,
            "plot: only the ring track has a 2-D scatter plot");
    require(n_samples >= 0, "plot: sample count must be >= 0");
    Rng root(cfg.seed);
    Tensor<Real> samples({1, 2});
    std::vector<Point2> pts;
    if (n_samples > 0) {
        if (!ckpt_path.empty()) {
            Mlp<Real> gen = load_generator(cfg, 2, ckpt_path);
            Rng rng_z = root.derive("plot.z");
            samples = gen.infer(draw_latent<Real>(std::size_t(n_samples), cfg.model.z_dim, rng_z));
        } else {
            Rng rng_d = root.derive("plot.data");
            samples = sample_ring<Real>(cfg.data.ring, std::size_t(n_samples), rng_d);
        }
        pts = to_points(samples);
    }
    const std::string path = cfg.out_dir + "/scatter.svg";
    emit_scatter_svg(pts, to_points(ring_means<Real>(cfg.data.ring)), path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("RFGAN_THREADS")) {
        const int n = std::atoi(env);
        kernels::set_max_threads(n < 1 ? 1 : (n > 256 ? 256 : n));
    } else {
        kernels::set_max_threads(1);
    }

    CLI::App app{"Representative-feature GAN training laboratory"};
    app.require_subcommand(1);

    CommonArgs common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", common.out_override, "output directory (overrides config)");
        sub->add_option("--seed", common.seed_override, "seed (overrides config)");
    };

    auto* pre = app.add_subcommand("pretrain-ae", "pretrain the denoising autoencoder");
    add_common(pre);

    auto* train = app.add_subcommand("train", "adversarial training");
    add_common(train);
    std::string encoder_flag;
    train->add_option("--encoder", encoder_flag, "encoder checkpoint (overrides config)");

    auto* ev = app.add_subcommand("eval", "evaluate a trained generator checkpoint");
    add_common(ev);
    std::string ckpt;
    ev->add_option("--checkpoint", ckpt, "RFGN checkpoint with G.* tensors")->required();

    auto* interp = app.add_subcommand("interpolate", "latent-space interpolation");
    add_common(interp);
    std::string ickpt, z0_text, z1_text;
    int steps = 9;
    interp->add_option("--checkpoint", ickpt, "RFGN checkpoint with G.* tensors")->required();
    interp->add_option("--steps", steps, "number of interpolation points (>= 2)");
    interp->add_option("--z0", z0_text, "first latent, comma-separated");
    interp->add_option("--z1", z1_text, "second latent, comma-separated");

    auto* plot = app.add_subcommand("plot", "scatter plot of samples over the ring means");
    add_common(plot);
    std::string pckpt;
    long n_samples = 2560;
    plot->add_option("--checkpoint", pckpt, "plot generator samples instead of data samples");
    plot->add_option("--samples", n_samples, "number of points to draw");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) return cmd_pretrain(common);
        if (train->parsed()) return cmd_train(common, encoder_flag);
        if (ev->parsed()) return cmd_eval(common, ckpt);
        if (interp->parsed()) return cmd_interpolate(common, ickpt, steps, z0_text, z1_text);
        if (plot->parsed()) return cmd_plot(common, pckpt, n_samples);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
