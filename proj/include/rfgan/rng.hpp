#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

#include "rfgan/common.hpp"

namespace rfgan {

// Counter-based generator: the i-th output is a pure function of (key, i),
// so streams are reproducible, cheap to fork, and hold no global state.
// The mixer is the splitmix64 finalizer over key + i * golden-gamma.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ 0x6a09e667f3bcc908ull) ^ mix64(stream * 0x9e3779b97f4a7c15ull + 1)) {}

    // Independent stream named by a tag; counter starts at zero.
    Rng derive(std::string_view tag) const {
        std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (unsigned char c : tag) h = (h ^ c) * 0x100000001b3ull;
        Rng r(0);
        r.key_ = mix64(key_ ^ mix64(h));
        r.ctr_ = 0;
        r.have_spare_ = false;
        return r;
    }

    std::uint64_t next_u64() { return mix64(key_ + ctr_++ * 0x9e3779b97f4a7c15ull); }

    // [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0,n) without modulo bias (Lemire multiply-shift)
    std::uint64_t below(std::uint64_t n) {
        require(n > 0, "Rng::below: n must be positive");
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0,1], keeps log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    template <class T>
    void fill_gaussian(std::span<T> out, double mean = 0.0, double stddev = 1.0) {
        for (T& v : out) v = static_cast<T>(mean + stddev * gaussian());
    }

    template <class T>
    void fill_uniform(std::span<T> out, double lo, double hi) {
        for (T& v : out) v = static_cast<T>(uniform(lo, hi));
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rfgan
