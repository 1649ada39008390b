#pragma once

#include <cmath>
#include <cstdint>

namespace lfgnn {

// Counter-based splittable generator. The integer stream is a pure function
// of (key, counter), so streams can be derived for sub-tasks (per pair, per
// window, per fold) and results do not depend on evaluation order.
//
// Constants are the SplitMix64 finalizer (Steele et al.) with the golden
// ratio increment 0x9E3779B97F4A7C15.
class Rng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    explicit Rng(std::uint64_t seed) : key_(mix(seed + kGamma)) {}

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix(key_ + counter_ * kGamma);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_open_double() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    // tiny relative to 2^64 so the bias is far below statistical noise.
    std::uint64_t next_index(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller. The partner value is discarded so a
    // draw always consumes exactly two counter steps.
    double next_gaussian() {
        const double u1 = next_open_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Child generator for an independent stream. Derivation only hashes
    // integers, so split(a).split(b) is reproducible on any platform.
    Rng split(std::uint64_t stream) const {
        Rng child(0);
        child.key_ = mix(key_ ^ mix(stream * kGamma + 0x632BE59BD9B4E019ull));
        child.counter_ = 0;
        return child;
    }

    Rng split(std::uint64_t a, std::uint64_t b) const { return split(a).split(b); }
    Rng split(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return split(a).split(b).split(c);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace lfgnn
