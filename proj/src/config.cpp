#include "rfgan/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rfgan {

namespace {

using nlohmann::json;

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) {
            std::string best;
            std::size_t best_d = SIZE_MAX;
            for (const char* k : allowed) {
                const std::size_t d = levenshtein(it.key(), k);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            std::string msg = "config: unknown key '" + it.key() + "' in " + where;
            if (!best.empty() && best_d <= 3) msg += " (did you mean '" + best + "'?)";
            fail(msg);
        }
    }
}

template <class U>
U num(const json& obj, const char* key, U fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    require(v.is_number(), "config: field '" + where + "." + key + "' must be a number");
    return v.get<U>();
}

bool flag(const json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    require(v.is_boolean(), "config: field '" + where + "." + key + "' must be a boolean");
    return v.get<bool>();
}

std::string text(const json& obj, const char* key, const std::string& fallback,
                 const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    require(v.is_string(), "config: field '" + where + "." + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<std::size_t> widths(const json& obj, const char* key,
                                std::vector<std::size_t> fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    require(v.is_array() && !v.empty(),
            "config: field '" + where + "." + key + "' must be a non-empty array");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
        require(e.is_number_unsigned() && e.get<std::uint64_t>() >= 1,
                "config: entries of '" + where + "." + key + "' must be positive integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

LossKind parse_loss_kind(const std::string& s) {
    if (s == "minimax") return LossKind::Minimax;
    if (s == "non_saturating") return LossKind::NonSaturating;
    if (s == "least_squares") return LossKind::LeastSquares;
    if (s == "wasserstein") return LossKind::Wasserstein;
    fail("config: loss.kind '" + s +
         "' is not one of minimax, non_saturating, least_squares, wasserstein");
}

PenaltyKind parse_penalty_kind(const std::string& s) {
    if (s == "none") return PenaltyKind::None;
    if (s == "wgan_gp") return PenaltyKind::WganGp;
    if (s == "dragan") return PenaltyKind::Dragan;
    fail("config: loss.penalty '" + s + "' is not one of none, wgan_gp, dragan");
}

void line_of(const std::string& src, std::size_t byte, std::size_t& line, std::size_t& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < src.size(); ++i) {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

} // namespace

ExperimentConfig parse_config_text(const std::string& src, const std::string& origin) {
    json root;
    try {
        root = json::parse(src);
    } catch (const json::parse_error& e) {
        std::size_t line = 0, col = 0;
        line_of(src, e.byte, line, col);
        fail("config: parse error in " + origin + " at line " + std::to_string(line) +
             ", column " + std::to_string(col) + ": " + e.what());
    }
    require(root.is_object(), "config: top-level JSON value must be an object");
    check_keys(root, "the top level",
               {"name", "seed", "out_dir", "data", "model", "loss", "schedule", "ae", "eval"});

    ExperimentConfig c;
    require(root.contains("name") && root.at("name").is_string() &&
                !root.at("name").get<std::string>().empty(),
            "config: a non-empty 'name' is required");
    c.name = root.at("name").get<std::string>();
    c.seed = num<std::uint64_t>(root, "seed", 0, "");
    c.out_dir = text(root, "out_dir", "runs/" + c.name, "");

    if (root.contains("data")) {
        const json& d = root.at("data");
        require(d.is_object(), "config: 'data' must be an object");
        check_keys(d, "'data'",
                   {"kind", "modes", "radius", "sigma", "train_size", "path", "normalize"});
        const std::string kind = text(d, "kind", "ring", "data");
        if (kind == "ring") {
            c.data.kind = ExperimentConfig::Data::Kind::Ring;
            c.data.ring.modes = num<std::size_t>(d, "modes", 8, "data");
            c.data.ring.radius = num<double>(d, "radius", 2.0, "data");
            c.data.ring.sigma = num<double>(d, "sigma", 0.1, "data");
            c.data.ring.validate();
            c.data.train_size = num<std::size_t>(d, "train_size", 65536, "data");
            require(c.data.train_size >= 1, "config: data.train_size must be >= 1");
        } else if (kind == "idx") {
            c.data.kind = ExperimentConfig::Data::Kind::Idx;
            c.data.idx_path = text(d, "path", "", "data");
            require(!c.data.idx_path.empty(), "config: data.path is required for kind 'idx'");
            if (d.contains("normalize")) {
                const json& nr = d.at("normalize");
                require(nr.is_array() && nr.size() == 2 && nr[0].is_number() && nr[1].is_number(),
                        "config: data.normalize must be [lo, hi]");
                c.data.normalize_lo = nr[0].get<double>();
                c.data.normalize_hi = nr[1].get<double>();
                require(c.data.normalize_hi > c.data.normalize_lo,
                        "config: data.normalize hi must be > lo");
            }
        } else {
            fail("config: data.kind '" + kind + "' is not one of ring, idx");
        }
    }

    if (root.contains("model")) {
        const json& m = root.at("model");
        require(m.is_object(), "config: 'model' must be an object");
        check_keys(m, "'model'",
                   {"z_dim", "g_hidden", "d_hidden", "d1", "d2", "rf", "encoder_checkpoint",
                    "g_tanh_out"});
        c.model.z_dim = num<std::size_t>(m, "z_dim", 2, "model");
        require(c.model.z_dim >= 1, "config: model.z_dim must be >= 1");
        c.model.g_hidden = widths(m, "g_hidden", {128, 128}, "model");
        c.model.d_hidden = widths(m, "d_hidden", {128, 128}, "model");
        c.model.d1 = num<std::size_t>(m, "d1", 64, "model");
        c.model.d2 = num<std::size_t>(m, "d2", 128, "model");
        require(c.model.d1 >= 1 && c.model.d2 >= 1, "config: model.d1/d2 must be >= 1");
        c.model.rf = flag(m, "rf", true, "model");
        c.model.encoder_checkpoint = text(m, "encoder_checkpoint", "", "model");
        c.model.g_tanh_out = flag(m, "g_tanh_out", false, "model");
    }

    if (root.contains("loss")) {
        const json& l = root.at("loss");
        require(l.is_object(), "config: 'loss' must be an object");
        check_keys(l, "'loss'", {"kind", "penalty", "lambda"});
        c.loss.kind = parse_loss_kind(text(l, "kind", "non_saturating", "loss"));
        c.loss.penalty = parse_penalty_kind(text(l, "penalty", "none", "loss"));
        c.loss.lambda = num<double>(l, "lambda", 10.0, "loss");
        if (c.loss.penalty != PenaltyKind::None)
            require(c.loss.lambda > 0.0, "config: loss.lambda must be > 0 when a penalty is active");
    }

    // schedule defaults follow the loss kind: 2 generator / 1 discriminator
    // updates per cycle, or 1/5 for Wasserstein runs
    if (c.loss.kind == LossKind::Wasserstein) c.schedule.sched = TrainSchedule::wgan_gp_preset();
    if (root.contains("schedule")) {
        const json& s = root.at("schedule");
        require(s.is_object(), "config: 'schedule' must be an object");
        check_keys(s, "'schedule'",
                   {"g_steps", "d_steps", "cycles", "batch", "metric_every", "checkpoint_every"});
        c.schedule.explicit_steps = s.contains("g_steps") || s.contains("d_steps");
        c.schedule.sched.g_steps = num<int>(s, "g_steps", c.schedule.sched.g_steps, "schedule");
        c.schedule.sched.d_steps = num<int>(s, "d_steps", c.schedule.sched.d_steps, "schedule");
        c.schedule.sched.cycles = num<long>(s, "cycles", c.schedule.sched.cycles, "schedule");
        c.schedule.sched.batch = num<int>(s, "batch", c.schedule.sched.batch, "schedule");
        c.schedule.metric_every = num<long>(s, "metric_every", 500, "schedule");
        c.schedule.checkpoint_every = num<long>(s, "checkpoint_every", 5000, "schedule");
        require(c.schedule.metric_every >= 1, "config: schedule.metric_every must be >= 1");
        require(c.schedule.checkpoint_every >= 0,
                "config: schedule.checkpoint_every must be >= 0");
    }
    c.schedule.sched.validate();

    if (root.contains("ae")) {
        const json& a = root.at("ae");
        require(a.is_object(), "config: 'ae' must be an object");
        check_keys(a, "'ae'", {"epochs", "noise_std", "batch", "steps_per_epoch"});
        c.ae.epochs = num<int>(a, "epochs", 20, "ae");
        c.ae.noise_std = num<double>(a, "noise_std", 0.1, "ae");
        c.ae.batch = num<int>(a, "batch", 256, "ae");
        c.ae.steps_per_epoch = num<int>(a, "steps_per_epoch", 0, "ae");
        require(c.ae.epochs >= 1, "config: ae.epochs must be >= 1");
        require(c.ae.noise_std >= 0.0, "config: ae.noise_std must be >= 0");
        require(c.ae.batch >= 1, "config: ae.batch must be >= 1");
        require(c.ae.steps_per_epoch >= 0, "config: ae.steps_per_epoch must be >= 0");
    }

    if (root.contains("eval")) {
        const json& e = root.at("eval");
        require(e.is_object(), "config: 'eval' must be an object");
        check_keys(e, "'eval'", {"samples", "pairs", "ms_ssim_levels", "coverage_threshold"});
        c.eval.samples = num<std::size_t>(e, "samples", 10000, "eval");
        c.eval.pairs = num<int>(e, "pairs", 10000, "eval");
        c.eval.ms_ssim_levels = num<int>(e, "ms_ssim_levels", 0, "eval");
        c.eval.coverage_threshold = num<double>(e, "coverage_threshold", 0.0, "eval");
        require(c.eval.samples >= 2, "config: eval.samples must be >= 2");
        require(c.eval.pairs >= 1, "config: eval.pairs must be >= 1");
        require(c.eval.ms_ssim_levels >= 0 && c.eval.ms_ssim_levels <= 5,
                "config: eval.ms_ssim_levels must be in 0..5");
        require(c.eval.coverage_threshold >= 0.0,
                "config: eval.coverage_threshold must be >= 0");
    }

    c.loss.validate();
    return c;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), "config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), "'" + path + "'");
}

} // namespace rfgan
