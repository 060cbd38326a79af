#ifndef MFSPEAK_TIME_SERIES_HPP
#define MFSPEAK_TIME_SERIES_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mfspeak {

/// A sampled signal. Samples are finite reals, the rate is in
/// samples/second, and source_id records where the data came from
/// (a file path or a generator tag).
struct TimeSeries {
    std::vector<double> samples;
    double sample_rate = 1.0;
    std::string source_id;

    std::size_t size() const noexcept { return samples.size(); }
    double duration_seconds() const noexcept {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

/// Throws InvalidArgument unless the series has >= 2 finite samples
/// and a positive sample rate.
void validate(const TimeSeries& ts);

/// Contiguous sub-series [start_s, start_s + duration_s). Sample
/// indices derive from seconds by round-half-up, which is stable
/// against floating-point drift at typical audio rates. The returned
/// source_id is annotated with the window.
TimeSeries segment(const TimeSeries& ts, double start_s, double duration_s);

/// Parameters of the deterministic binomial multiplicative cascade.
/// The produced series has exactly 2^levels strictly positive values.
struct CascadeSpec {
    int levels = 14;
    double multiplier = 0.75;  // must lie in (0.5, 1)
};

/// Deterministic binomial cascade:
///   x_k = a^{n(k-1)} * (1-a)^{levels - n(k-1)},  k = 1..2^levels,
/// where n(j) counts set bits in the binary representation of j.
/// The values sum to 1. Used as a ground-truth multifractal signal:
/// its generalized Hurst exponents have a closed form.
TimeSeries gen_binomial_cascade(const CascadeSpec& spec);

/// n seeded standard-normal draws (SplitMix64 + Box-Muller, see rng.hpp).
/// Same seed, same series, on every platform.
TimeSeries gen_white_noise(std::size_t n, std::uint64_t seed);

}  // namespace mfspeak

#endif  // MFSPEAK_TIME_SERIES_HPP
