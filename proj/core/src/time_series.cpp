#include "mfspeak/time_series.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "mfspeak/errors.hpp"
#include "mfspeak/rng.hpp"

namespace mfspeak {

void validate(const TimeSeries& ts) {
    if (ts.samples.size() < 2) {
        throw InvalidArgument("time series needs at least 2 samples, got " +
                              std::to_string(ts.samples.size()));
    }
    if (!(ts.sample_rate > 0.0)) {
        throw InvalidArgument("sample rate must be positive");
    }
    for (double v : ts.samples) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("time series contains a non-finite sample");
        }
    }
}

namespace {

std::size_t seconds_to_index(double seconds, double rate) {
    // round-half-up keeps indices stable under tiny floating-point
    // drift in start/duration values
    return static_cast<std::size_t>(std::floor(seconds * rate + 0.5));
}

}  // namespace

TimeSeries segment(const TimeSeries& ts, double start_s, double duration_s) {
    validate(ts);
    if (start_s < 0.0 || duration_s <= 0.0) {
        throw InvalidArgument("segment window must have start >= 0 and duration > 0");
    }
    std::size_t begin = seconds_to_index(start_s, ts.sample_rate);
    std::size_t count = seconds_to_index(duration_s, ts.sample_rate);
    if (begin + count > ts.samples.size()) {
        std::ostringstream msg;
        msg << "segment [" << start_s << "s, " << start_s + duration_s
            << "s) needs " << begin + count << " samples but the series has "
            << ts.samples.size();
        throw InvalidArgument(msg.str());
    }
    TimeSeries out;
    out.samples.assign(ts.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       ts.samples.begin() + static_cast<std::ptrdiff_t>(begin + count));
    out.sample_rate = ts.sample_rate;
    std::ostringstream id;
    id << ts.source_id << "[" << start_s << "s+" << duration_s << "s]";
    out.source_id = id.str();
    return out;
}

TimeSeries gen_binomial_cascade(const CascadeSpec& spec) {
    if (spec.levels < 1 || spec.levels > 26) {
        throw InvalidArgument("cascade levels must be in [1, 26], got " +
                              std::to_string(spec.levels));
    }
    if (!(spec.multiplier > 0.5 && spec.multiplier < 1.0)) {
        throw InvalidArgument("cascade multiplier must lie in (0.5, 1)");
    }
    const double a = spec.multiplier;
    const double b = 1.0 - a;
    const std::size_t n = std::size_t{1} << spec.levels;

    // Precompute a^k and (1-a)^(levels-k) for k = 0..levels; each value
    // is then a table lookup on the popcount of the index.
    std::vector<double> pow_a(static_cast<std::size_t>(spec.levels) + 1);
    std::vector<double> pow_b(static_cast<std::size_t>(spec.levels) + 1);
    pow_a[0] = 1.0;
    pow_b[0] = 1.0;
    for (int k = 1; k <= spec.levels; ++k) {
        pow_a[static_cast<std::size_t>(k)] = pow_a[static_cast<std::size_t>(k - 1)] * a;
        pow_b[static_cast<std::size_t>(k)] = pow_b[static_cast<std::size_t>(k - 1)] * b;
    }

    TimeSeries out;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        int ones = std::popcount(static_cast<std::uint64_t>(k));
        out.samples[k] = pow_a[static_cast<std::size_t>(ones)] *
                         pow_b[static_cast<std::size_t>(spec.levels - ones)];
    }
    out.sample_rate = 1.0;
    std::ostringstream id;
    id << "cascade:levels=" << spec.levels << ",a=" << a;
    out.source_id = id.str();
    return out;
}

TimeSeries gen_white_noise(std::size_t n, std::uint64_t seed) {
    if (n < 2) {
        throw InvalidArgument("white noise length must be >= 2, got " +
                              std::to_string(n));
    }
    SplitMix64 rng(seed);
    TimeSeries out;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.samples[i] = rng.next_gaussian();
    }
    out.sample_rate = 1.0;
    out.source_id = "white:n=" + std::to_string(n) + ",seed=" + std::to_string(seed);
    return out;
}

}  // namespace mfspeak
