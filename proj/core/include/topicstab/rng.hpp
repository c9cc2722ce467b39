#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace topicstab {

// splitmix64 finalizer; used both as a bit mixer and for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Domain tags keep the sample-selection stream and the per-(k, run)
// factorization streams disjoint for any master seed.
namespace seed_domain {
inline constexpr std::uint64_t sampling = 0x53414d504c45ULL;      // "SAMPLE"
inline constexpr std::uint64_t factorization = 0x464143544f52ULL; // "FACTOR"
inline constexpr std::uint64_t synthetic = 0x53594e5448ULL;       // "SYNTH"
} // namespace seed_domain

// Splittable derivation: adding k values or samples to a scan never perturbs
// the seeds of existing runs.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain,
                                    std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = mix64(master ^ mix64(domain));
    h = mix64(h ^ mix64(a));
    h = mix64(h ^ mix64(b));
    return h;
}

// mt19937_64 with portable open-interval doubles and unbiased bounded draws.
// The std:: distributions are implementation-defined, so draws are derived
// from raw engine output only.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in the open interval (0,1).
    double next_open01() {
        const std::uint64_t x = engine_() >> 11; // 53 bits
        return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound), bound >= 1. Masked rejection sampling.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1 | 1);
        for (;;) {
            const std::uint64_t x = engine_() & mask;
            if (x < bound) return x;
        }
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace topicstab
