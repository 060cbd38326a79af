#ifndef MFSPEAK_PIPELINE_HPP
#define MFSPEAK_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfspeak/classifier.hpp"
#include "mfspeak/mfdfa.hpp"
#include "mfspeak/spectrum_features.hpp"

namespace mfspeak {

/// One corpus clip: an id, where the samples come from, and a label.
/// source is either a file path (*.wav, *.mfraw) or a generator spec:
///   cascade:levels=14,a=0.75[,noise=0.05,seed=N]
///   white:n=65536,seed=N
struct ManifestEntry {
    std::string clip_id;
    std::string source;
    std::string speaker_label;
    std::optional<double> window_start_s;
    std::optional<double> window_duration_s;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;
};

CorpusManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const CorpusManifest& manifest);

/// Loads one entry's samples (file or generator, then the optional
/// segment window).
TimeSeries load_entry(const ManifestEntry& entry);

/// Every knob of a run, in one flat struct. The same keys appear in
/// the config file and as CLI flags; snapshot() renders the canonical
/// key = value form that also feeds the config hash.
struct PipelineConfig {
    double q_min = -5.0;
    double q_max = 5.0;
    double q_step = 0.25;
    long scale_min = 16;
    long scale_max = 0;    // 0 = auto
    long scale_count = 0;  // 0 = auto
    int detrend_order = 1;
    bool use_both_ends = true;  // --strict-paper turns this off
    std::size_t grid_size = 128;
    double svm_c = 10.0;
    double svm_gamma = 4.0;  // 0 = auto (1/(d * var))
    double svm_tolerance = 1e-3;
    long svm_max_passes = 10000;
    double holdout_ratio = 0.25;
    bool stratified = true;
    bool use_width_feature = false;
    std::uint64_t seed = 1;
    int threads = 1;

    MfdfaConfig mfdfa() const;
    SvmParams svm() const;
    std::string snapshot() const;
    std::string config_hash() const;
};

/// Parses the key = value config file ('#' starts a comment). Unknown
/// keys are rejected.
PipelineConfig load_config_file(const std::string& path,
                                PipelineConfig base = {});

struct ClipFailure {
    std::string clip_id;
    std::string message;
};

struct AnalyzeResult {
    std::string features_csv;
    std::string spectra_dir;
    std::vector<ClipFailure> failures;
};

/// signal_io -> mfdfa -> features for every manifest entry. Clips are
/// independent and may run on config.threads workers; outputs are
/// written in manifest order so results do not depend on scheduling.
/// Per-clip failures are collected, not fatal.
AnalyzeResult analyze(const CorpusManifest& manifest,
                      const PipelineConfig& config,
                      const std::string& out_dir);

struct CorrMatrixResult {
    std::string matrix_csv;
    std::string legend_csv;
    CorrelationMatrix matrix;
};

/// Reads the per-clip spectrum CSVs emitted by analyze(), resamples
/// them onto a common alpha grid and writes the Pearson matrix plus
/// an index legend in manifest order.
CorrMatrixResult corrmatrix(const CorpusManifest& manifest,
                            const std::string& spectra_dir,
                            std::size_t grid_size,
                            const std::string& out_dir);

struct TrainEvalResult {
    std::string model_path;
    std::string confusion_csv;
    std::string confusion_txt;
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    bool converged = true;
};

/// Stratified split, SMO training, confusion-matrix evaluation, model
/// persistence.
TrainEvalResult train_eval(const std::string& features_csv,
                           const PipelineConfig& config,
                           const std::string& out_dir);

struct SynthResult {
    std::string manifest_path;
    std::vector<std::string> files;
};

/// Writes a synthetic corpus (make_synthetic_corpus) as .mfraw files
/// (or 16-bit WAV with as_wav, which quantizes) plus a manifest
/// referencing them.
SynthResult synth_corpus(std::size_t n_classes, std::size_t clips_per_class,
                         std::uint64_t seed, const std::string& out_dir,
                         bool as_wav = false);

struct RunReport {
    std::string report_path;
    AnalyzeResult analyze;
    CorrMatrixResult corr;
    TrainEvalResult eval;
};

/// analyze + corrmatrix + train_eval over one manifest, then a JSON
/// run report with artifact paths, the accuracy, the confusion
/// counts, and the full config snapshot (which reproduces the run).
RunReport report(const CorpusManifest& manifest, const PipelineConfig& config,
                 const std::string& manifest_path, const std::string& out_dir);

/// Feature CSV I/O shared by analyze and train_eval.
void write_features_csv(const std::string& path,
                        const std::vector<FeatureVector>& rows,
                        const std::string& config_hash);
std::vector<FeatureVector> read_features_csv(const std::string& path);

/// Spectrum CSV: one row per q (q, h, r2, tau, alpha, f_alpha), then a
/// fit summary row (A, B, C, alpha0, W, endpoint width).
void write_spectrum_csv(const std::string& path, const MfdfaResult& result);
SingularitySpectrum read_spectrum_csv(const std::string& path);

}  // namespace mfspeak

#endif  // MFSPEAK_PIPELINE_HPP
