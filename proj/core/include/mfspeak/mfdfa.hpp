#ifndef MFSPEAK_MFDFA_HPP
#define MFSPEAK_MFDFA_HPP

#include <cstddef>
#include <vector>

#include "mfspeak/time_series.hpp"

namespace mfspeak {

/// Configuration of the multifractal detrended fluctuation analysis.
///
/// scale_max = 0 and scale_count = 0 select the automatic grid:
/// dyadic scales (powers of two) from max(scale_min, N/2048) up to
/// N/4. Dyadic scales sample signals with discrete scale invariance
/// at a constant phase, which keeps the log-log regression free of
/// log-periodic wobble; the N-dependent lower bound keeps the
/// small-scale detrending transient out of the fit for long inputs.
/// When scale_max and scale_count are both set explicitly the grid is
/// scale_count log-spaced integers between scale_min and scale_max,
/// deduplicated.
struct MfdfaConfig {
    std::vector<double> q_grid;   // strictly increasing; may include 0
    long scale_min = 16;
    long scale_max = 0;           // 0 = auto (N/4, dyadic)
    long scale_count = 0;         // 0 = auto (one scale per octave)
    int detrend_order = 1;        // polynomial order m >= 0
    bool use_both_ends = true;    // add windows counted from the tail
};

/// q from -5 to +5 in steps of 1/4, 0 included.
std::vector<double> default_q_grid();

/// The concrete integer scales the config resolves to for a series of
/// length n. Throws InvalidArgument if the invariants cannot be met
/// (fewer than 4 distinct scales, scale_min too small for the
/// detrend order, scale_max above n/4, ...).
std::vector<long> resolve_scales(const MfdfaConfig& cfg, std::size_t n);

/// Cumulative sum of the mean-removed signal. The last value
/// telescopes to zero up to rounding.
struct Profile {
    std::vector<double> values;
};

Profile compute_profile(const TimeSeries& ts);

/// Per-window squared detrended fluctuations F^2(s, v) at one scale.
/// The series is split into floor(N/s) non-overlapping windows from
/// the start; with use_both_ends another floor(N/s) windows are taken
/// from the end. Within each window a least-squares polynomial of
/// degree m over the sample index is removed.
std::vector<double> local_fluctuations(const Profile& profile, long scale,
                                       int detrend_order, bool use_both_ends);

/// q-order overall RMS variation over the per-window fluctuations:
///   q != 0:  { mean_v (F^2)^{q/2} }^{1/q}
///   q == 0:  exp( (1/2) mean_v ln F^2 )   (logarithmic limit)
/// Throws DegenerateWindowError when some F^2 is zero and q <= 0.
double fluctuation_function(const std::vector<double>& f2, double q,
                            long scale_for_error = 0);

/// F_q(s) over the full (q, scale) grid.
struct FluctuationTable {
    std::vector<long> scales;
    std::vector<double> q_grid;
    std::vector<std::vector<double>> values;  // values[qi][si] > 0
    std::vector<std::size_t> window_counts;   // windows used per scale
};

FluctuationTable fluctuation_table(const Profile& profile,
                                   const MfdfaConfig& cfg, std::size_t n);

/// Per-q slope of ln F_q(s) against ln s (ordinary least squares),
/// with intercept and coefficient of determination.
struct HurstCurve {
    std::vector<double> q_grid;
    std::vector<double> h;
    std::vector<double> intercept;
    std::vector<double> r2;
};

HurstCurve hurst_exponents(const FluctuationTable& table);

/// tau(q) = q h(q) - 1, pointwise.
std::vector<std::pair<double, double>> scaling_exponents(const HurstCurve& hc);

/// Legendre-transform pair: alpha = h + q h', f = q (alpha - h) + 1.
/// h'(q) is estimated by central differences on the q grid (one-sided
/// at the ends). Points are ordered by the q that produced them.
struct SingularitySpectrum {
    std::vector<double> q_of_point;
    std::vector<double> alpha;
    std::vector<double> f_alpha;
};

SingularitySpectrum singularity_spectrum(const HurstCurve& hc);

/// Least-squares parabola f = A (alpha - alpha0)^2 + B (alpha - alpha0) + C
/// around the peak, and the width between its two zero crossings.
struct QuadraticFit {
    double a = 0.0;         // curvature, expected < 0
    double b = 0.0;         // asymmetry, 0 for a symmetric spectrum
    double c = 0.0;         // peak value, near 1 on well-behaved spectra
    double alpha0 = 0.0;    // alpha of the maximum observed f
    double width = 0.0;     // distance between the parabola's real roots
    double endpoint_width = 0.0;  // max alpha - min alpha, diagnostic
};

/// Throws WidthUndefinedError when the fit is not concave or has no
/// real roots. A spectrum whose alpha values all coincide (the exact
/// monofractal collapse) short-circuits to width 0 without fitting.
QuadraticFit fit_spectrum(const SingularitySpectrum& spec);

struct MfdfaResult {
    FluctuationTable table;
    HurstCurve hurst;
    SingularitySpectrum spectrum;
    QuadraticFit fit;
};

/// The full chain: profile, windowed fluctuations, F_q(s), h(q),
/// singularity spectrum, quadratic fit. Deterministic for fixed input
/// and config; failures are reported with the stage that produced them.
MfdfaResult run_mfdfa(const TimeSeries& ts, const MfdfaConfig& cfg);

}  // namespace mfspeak

#endif  // MFSPEAK_MFDFA_HPP
