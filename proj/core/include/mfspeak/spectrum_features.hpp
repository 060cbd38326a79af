#ifndef MFSPEAK_SPECTRUM_FEATURES_HPP
#define MFSPEAK_SPECTRUM_FEATURES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "mfspeak/mfdfa.hpp"

namespace mfspeak {

/// The singularity spectrum turned into a probability mass function
/// over alpha: negative f values are floored to zero, the rest are
/// scaled to sum to 1. Entries are sorted by ascending alpha.
struct NormalizedSpectrum {
    std::vector<double> alphas;
    std::vector<double> masses;
};

/// Throws NormalizationError when no f value is positive after
/// flooring.
NormalizedSpectrum normalize_spectrum(const SingularitySpectrum& spec);

/// Feature 1: weighted median of alpha minus the mode of alpha.
/// The median is the smallest alpha whose cumulative mass reaches 1/2;
/// argmax ties break toward the smallest alpha.
double feature_median_minus_mode(const NormalizedSpectrum& ns);

/// Feature 2: skewness of alpha under the mass function, the third
/// standardized moment E[((alpha - mu)/sigma)^3]. Throws
/// InvalidArgument when sigma is zero (single-point spectrum).
double feature_skewness(const NormalizedSpectrum& ns);

/// Per-clip classification features.
struct FeatureVector {
    std::string clip_id;
    std::string speaker_label;
    double feature1 = 0.0;   // median - mode of alpha
    double feature2 = 0.0;   // skewness
    double aux_width = 0.0;  // spectrum width, diagnostic; excluded from
                             // classification unless explicitly requested
};

/// Interpolates every spectrum onto one common alpha grid spanning the
/// union of all alpha ranges; f is linear between a spectrum's own
/// knots and 0 outside its support. Needed because spectra from
/// different clips have different supports and point counts, and the
/// Pearson correlation wants aligned equal-length vectors.
std::vector<std::vector<double>> resample_to_common_grid(
    const std::vector<SingularitySpectrum>& specs, std::size_t grid_size);

/// Pearson correlation matrix of the aligned vectors. Symmetric with a
/// unit diagonal; throws InvalidArgument naming the offending vector
/// when one has zero variance.
struct CorrelationMatrix {
    std::size_t n = 0;
    std::vector<double> values;  // row-major n*n

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

CorrelationMatrix cross_correlation_matrix(
    const std::vector<std::vector<double>>& aligned);

}  // namespace mfspeak

#endif  // MFSPEAK_SPECTRUM_FEATURES_HPP
