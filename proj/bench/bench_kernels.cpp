// Serial-vs-OpenMP kernel benchmark at training-relevant shapes, plus an
// end-to-end cycles/second probe of the ring configuration.
#include <chrono>
#include <cstdio>
#include <thread>
#include <vector>

#include "rfgan/data.hpp"
#include "rfgan/kernels.hpp"
#include "rfgan/rng.hpp"
#include "rfgan/training.hpp"

using namespace rfgan;
using Clock = std::chrono::steady_clock;

namespace {

int hw_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : int(hw);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
double time_loop(F f, int reps) {
    f(); // warm up
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) f();
    return seconds_since(t0) / reps;
}

void bench_matmul(std::size_t m, std::size_t k, std::size_t n, int reps) {
    Rng rng(42);
    TensorF a({m, k}), b({k, n}), c({m, n});
    rng.fill_gaussian(a.span());
    rng.fill_gaussian(b.span());
    const double flops = 2.0 * double(m) * double(k) * double(n);

    kernels::set_max_threads(1);
    const double ts = time_loop(
        [&] { kernels::serial::matmul(a.data(), b.data(), c.data(), m, k, n); }, reps);
    float serial_probe = c[0];

    kernels::set_max_threads(hw_threads());
    const double tp =
        time_loop([&] { kernels::matmul(a.data(), b.data(), c.data(), m, k, n); }, reps);
    bool exact = (serial_probe == c[0]);

    std::printf("matmul %4zux%4zux%4zu  serial %8.3f us (%6.2f GF/s)  omp %8.3f us (%6.2f GF/s)"
                "  speedup %.2fx  bitwise %s\n",
                m, k, n, ts * 1e6, flops / ts / 1e9, tp * 1e6, flops / tp / 1e9, ts / tp,
                exact ? "ok" : "DIFF");
}

void bench_training_cycle() {
    GanConfig<float> cfg;
    cfg.schedule.cycles = 30;
    cfg.metric_every = 0;
    cfg.seed = 7;
    auto run = [&](int threads) {
        kernels::set_max_threads(threads);
        DataSource<float> data = DataSource<float>::ring(RingSpec{});
        Rng enc_rng(1);
        auto encoder = Mlp<float>::init(make_encoder_spec(2, {128, 128}, 64), "E", enc_rng);
        encoder.set_trainable(false);
        auto t0 = Clock::now();
        train_gan(cfg, data, std::make_optional(std::move(encoder)));
        return seconds_since(t0) / double(cfg.schedule.cycles);
    };
    const double serial = run(1);
    const double par = run(hw_threads());
    std::printf("ring training cycle     serial %8.3f ms              omp %8.3f ms"
                "              speedup %.2fx\n",
                serial * 1e3, par * 1e3, serial / par);
}

} // namespace

int main() {
    std::printf("hardware threads: %d\n", hw_threads());
    bench_matmul(256, 2, 128, 400);
    bench_matmul(256, 128, 128, 200);
    bench_matmul(256, 128, 2, 400);
    bench_matmul(128, 256, 128, 200);
    bench_training_cycle();
    return 0;
}
