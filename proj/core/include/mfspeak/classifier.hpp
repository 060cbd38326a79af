#ifndef MFSPEAK_CLASSIFIER_HPP
#define MFSPEAK_CLASSIFIER_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfspeak/time_series.hpp"

namespace mfspeak {

/// One labeled sample in feature space.
struct LabeledPoint {
    std::vector<double> x;
    std::string label;
    std::string clip_id;
};

struct SvmParams {
    double c = 10.0;          // box constraint
    double gamma = 4.0;       // RBF width; 0 = "auto" = 1/(d * mean variance)
                              // of the standardized training features
    double tolerance = 1e-3;  // KKT tolerance
    long max_passes = 10000;  // bound on full SMO sweeps
    std::uint64_t seed = 1;   // working-pair selection stream
};

/// RBF kernel exp(-gamma * ||x - y||^2).
double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                  double gamma);

/// One binary machine of the one-vs-one ensemble, in standardized
/// feature space.
struct BinarySvm {
    std::size_t class_a = 0;  // votes +1
    std::size_t class_b = 0;  // votes -1
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coeffs;  // alpha_i * y_i
    double bias = 0.0;
};

/// Multi-class RBF-SVM: per-dimension standardization fitted on the
/// training set, one binary machine per unordered class pair,
/// majority vote at prediction time.
struct SvmModel {
    std::vector<std::string> classes;  // sorted label set
    std::vector<double> feature_mean;
    std::vector<double> feature_std;
    std::vector<BinarySvm> machines;
    SvmParams params;                  // with gamma resolved
    bool converged = true;

    std::size_t dimension() const noexcept { return feature_mean.size(); }
};

/// Trains by sequential minimal optimization on the standard dual.
/// Deterministic for a fixed seed. A machine that still violates the
/// KKT conditions after max_passes sweeps sets converged = false
/// instead of failing.
SvmModel train_svm(const std::vector<LabeledPoint>& train,
                   const SvmParams& params);

std::string predict(const SvmModel& model, const std::vector<double>& x);

/// Dual objective of one trained binary machine against its training
/// set, sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j).
/// Exposed for verification against an independent QP solver.
double dual_objective(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y,
                      const std::vector<double>& alpha, double gamma);

struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::size_t> counts;  // row-major: counts[actual][predicted]
    std::size_t total = 0;

    std::size_t at(std::size_t actual, std::size_t predicted) const {
        return counts[actual * classes.size() + predicted];
    }
    double accuracy() const;
    double recall(std::size_t class_index) const;     // row margin
    double precision(std::size_t class_index) const;  // column margin
};

ConfusionMatrix evaluate(const SvmModel& model,
                         const std::vector<LabeledPoint>& test);

/// Tallies a confusion matrix directly from label pairs. evaluate()
/// uses this after predicting; it is also the reporting path for
/// fixtures.
ConfusionMatrix tally_confusion(const std::vector<std::string>& actual,
                                const std::vector<std::string>& predicted);

struct HoldoutSplit {
    std::vector<LabeledPoint> train;
    std::vector<LabeledPoint> test;
};

/// Seeded stratified split: per class, round(ratio * class size)
/// samples go to the test set via a Fisher-Yates shuffle. With
/// stratified = false the shuffle and rounding are applied to the
/// whole set at once. Throws InvalidArgument when a class would end
/// up with an empty train or test side.
HoldoutSplit stratified_holdout(const std::vector<LabeledPoint>& dataset,
                                double holdout_ratio, std::uint64_t seed,
                                bool stratified = true);

/// Plain-text model persistence (versioned schema). Doubles are
/// written in shortest round-trip form, so a reloaded model predicts
/// bit-identically.
void save_model(std::ostream& out, const SvmModel& model);
SvmModel load_model(std::istream& in);
void save_model_file(const std::string& path, const SvmModel& model);
SvmModel load_model_file(const std::string& path);

struct LabeledSeries {
    TimeSeries series;
    std::string label;
    std::string clip_id;
};

/// Surrogate corpus: class k uses a binomial cascade with multiplier
/// a_k from {0.60, 0.65, 0.70, 0.75, 0.80} (levels = 14); each clip
/// adds seeded Gaussian noise at noise_amplitude x the series'
/// standard deviation so clips within a class differ. Deterministic
/// per seed.
std::vector<LabeledSeries> make_synthetic_corpus(std::size_t n_classes,
                                                 std::size_t clips_per_class,
                                                 std::uint64_t seed,
                                                 double noise_amplitude = 0.05);

/// The cascade multipliers make_synthetic_corpus draws from.
const std::vector<double>& corpus_multipliers();

}  // namespace mfspeak

#endif  // MFSPEAK_CLASSIFIER_HPP
