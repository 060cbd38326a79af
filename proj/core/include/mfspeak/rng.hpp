#ifndef MFSPEAK_RNG_HPP
#define MFSPEAK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mfspeak {

/// Deterministic PRNG used everywhere randomness is needed.
///
/// Algorithm: SplitMix64 (Steele, Lea & Flood's mixing constants).
/// The generator is fixed on purpose: seeded runs must reproduce
/// bit-identical streams on every platform, which the standard
/// library distributions do not guarantee.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw via the Box-Muller transform.
    /// Pairs are generated together; the second value is cached.
    double next_gaussian() noexcept {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // u1 in (0, 1] so log(u1) is finite.
        double u1 = 1.0 - next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// SplitMix64 finalizer, used on its own as a 64-bit mixing function.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives a per-stage subseed from a base seed and two stream indices.
/// One top-level seed fans out to every randomized stage through this
/// function, so a single --seed flag reproduces an entire run.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0) noexcept {
    return mix64(base ^ mix64(a ^ mix64(b)));
}

}  // namespace mfspeak

#endif  // MFSPEAK_RNG_HPP
