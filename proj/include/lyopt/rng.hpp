#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lyopt {

/// SplitMix64 generator. The output sequence is fully specified by the
/// algorithm itself, so seeded runs reproduce bit-for-bit across platforms
/// and standard-library versions, which the calibration and data-generation
/// determinism contracts rely on. Not cryptographic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent stream from one master seed, so every consumer
    /// of randomness hangs off a single CLI --seed flag.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
        r.next_u64();
        return r;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Modulo bias is irrelevant at the sizes used here.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal deviate, Box-Muller with the second value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        have_spare_ = true;
        return r * std::cos(angle);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lyopt
