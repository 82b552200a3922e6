#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfgan/data.hpp"
#include "rfgan/losses.hpp"
#include "rfgan/training.hpp"

namespace rfgan {

// Full experiment description loaded from a JSON document. Unknown keys are
// rejected (with a nearest-key suggestion); numeric constraints are checked
// on load.
struct ExperimentConfig {
    struct Data {
        enum class Kind { Ring, Idx } kind = Kind::Ring;
        RingSpec ring;
        std::size_t train_size = 65536; // materialized dataset size for AE pretraining
        std::string idx_path;
        double normalize_lo = 0.0;
        double normalize_hi = 255.0;
    };
    struct Model {
        std::size_t z_dim = 2;
        std::vector<std::size_t> g_hidden{128, 128};
        std::vector<std::size_t> d_hidden{128, 128};
        std::size_t d1 = 64;
        std::size_t d2 = 128;
        bool rf = true;
        std::string encoder_checkpoint; // input for `train` when rf
        bool g_tanh_out = false;
    };
    struct Schedule {
        TrainSchedule sched;
        long metric_every = 500;
        long checkpoint_every = 5000;
        bool explicit_steps = false; // g_steps/d_steps given by the user
    };
    struct Ae {
        int epochs = 20;
        double noise_std = 0.1;
        int batch = 256;
        int steps_per_epoch = 0;
    };
    struct Eval {
        std::size_t samples = 10000;
        int pairs = 10000;
        int ms_ssim_levels = 0; // 0: largest level count the images support
        double coverage_threshold = 0.0;
    };

    std::string name;
    std::uint64_t seed = 0;
    std::string out_dir; // defaults to runs/<name>
    Data data;
    Model model;
    LossSpec loss;
    Schedule schedule;
    Ae ae;
    Eval eval;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

} // namespace rfgan
