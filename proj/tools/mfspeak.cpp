// mfspeak: multifractal spectrum features for speaker identification.
//
// Subcommands: synth, analyze, corrmatrix, train-eval, report.
// Every stage reads/writes schema-versioned CSV/text files, so stages
// can be run and inspected independently; a single --seed reproduces a
// whole run byte-for-byte.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfspeak/csv.hpp"
#include "mfspeak/errors.hpp"
#include "mfspeak/pipeline.hpp"
#include "mfspeak/time_series.hpp"
#include "mfspeak/version.hpp"
#include "mfspeak/wav.hpp"

namespace {

using mfspeak::PipelineConfig;

struct ConfigFlags {
    std::string config_file;
    std::optional<double> q_min, q_max, q_step;
    std::optional<long> scale_min, scale_max, scale_count;
    std::optional<int> detrend_order;
    bool strict_paper = false;
    std::optional<std::size_t> grid_size;
    std::optional<double> svm_c;
    std::optional<std::string> svm_gamma;
    std::optional<double> svm_tolerance;
    std::optional<long> svm_max_passes;
    std::optional<double> ratio;
    bool unstratified = false;
    bool with_width = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("--config", f.config_file, "key = value config file; flags override it");
    cmd->add_option("--q-min", f.q_min, "smallest q (default -5)");
    cmd->add_option("--q-max", f.q_max, "largest q (default 5)");
    cmd->add_option("--q-step", f.q_step, "q grid step (default 0.25)");
    cmd->add_option("--scale-min", f.scale_min, "smallest window scale (default 16)");
    cmd->add_option("--scale-max", f.scale_max,
                    "largest window scale; 0 = automatic dyadic grid up to n/4 (default 0)");
    cmd->add_option("--scale-count", f.scale_count,
                    "number of log-spaced scales; 0 = automatic (default 0)");
    cmd->add_option("--detrend-order", f.detrend_order,
                    "polynomial detrending order m (default 1)");
    cmd->add_flag("--strict-paper", f.strict_paper,
                  "forward-only windows (skip the extra windows counted from the end)");
    cmd->add_option("--grid-size", f.grid_size,
                    "alpha grid size for spectrum resampling (default 128)");
    cmd->add_option("--svm-c", f.svm_c, "SVM box constraint C (default 10)");
    cmd->add_option("--svm-gamma", f.svm_gamma, "RBF gamma, a number or 'auto' (default 4)");
    cmd->add_option("--svm-tol", f.svm_tolerance, "SMO KKT tolerance (default 1e-3)");
    cmd->add_option("--svm-max-passes", f.svm_max_passes,
                    "SMO sweep bound (default 10000)");
    cmd->add_option("--ratio", f.ratio, "hold-out ratio (default 0.25)");
    cmd->add_flag("--unstratified", f.unstratified,
                  "split the whole set at once instead of per class");
    cmd->add_flag("--with-width", f.with_width,
                  "append the spectrum width as a third classification feature");
    cmd->add_option("--seed", f.seed, "master seed; all stage seeds derive from it (default 1)");
    cmd->add_option("--threads", f.threads,
                    "worker threads for analyze (outputs do not depend on this)");
}

PipelineConfig resolve_config(const ConfigFlags& f) {
    PipelineConfig cfg;
    if (!f.config_file.empty()) cfg = mfspeak::load_config_file(f.config_file, cfg);
    if (f.q_min) cfg.q_min = *f.q_min;
    if (f.q_max) cfg.q_max = *f.q_max;
    if (f.q_step) cfg.q_step = *f.q_step;
    if (f.scale_min) cfg.scale_min = *f.scale_min;
    if (f.scale_max) cfg.scale_max = *f.scale_max;
    if (f.scale_count) cfg.scale_count = *f.scale_count;
    if (f.detrend_order) cfg.detrend_order = *f.detrend_order;
    if (f.strict_paper) cfg.use_both_ends = false;
    if (f.grid_size) cfg.grid_size = *f.grid_size;
    if (f.svm_c) cfg.svm_c = *f.svm_c;
    if (f.svm_gamma) {
        cfg.svm_gamma = *f.svm_gamma == "auto" ? 0.0 : mfspeak::parse_double(*f.svm_gamma);
    }
    if (f.svm_tolerance) cfg.svm_tolerance = *f.svm_tolerance;
    if (f.svm_max_passes) cfg.svm_max_passes = *f.svm_max_passes;
    if (f.ratio) cfg.holdout_ratio = *f.ratio;
    if (f.unstratified) cfg.stratified = false;
    if (f.with_width) cfg.use_width_feature = true;
    if (f.seed) cfg.seed = *f.seed;
    if (f.threads) cfg.threads = *f.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multifractal spectrum features for text-independent speaker identification"};
    app.set_version_flag("--version", std::string("mfspeak ") + mfspeak::kVersion);
    app.require_subcommand(1);

    // ---- synth
    auto* synth = app.add_subcommand(
        "synth", "generate synthetic signals or a labeled synthetic corpus");
    std::size_t classes = 0, per_class = 20;
    std::uint64_t synth_seed = 1;
    std::string outdir = "out";
    bool as_wav = false;
    long cascade_levels = 0;
    double multiplier = 0.75;
    long white_n = 0;
    std::string out_file;
    synth->add_option("--classes", classes, "corpus mode: number of speaker classes (max 5)");
    synth->add_option("--per-class", per_class, "corpus mode: clips per class (default 20)");
    synth->add_option("--cascade-levels", cascade_levels,
                      "single-signal mode: binomial cascade with 2^levels samples");
    synth->add_option("--multiplier", multiplier, "cascade multiplier a in (0.5, 1)");
    synth->add_option("--white-noise", white_n, "single-signal mode: n Gaussian samples");
    synth->add_option("--seed", synth_seed, "seed (default 1)");
    synth->add_option("--outdir", outdir, "corpus output directory (default out)");
    synth->add_option("--out", out_file, "single-signal output file (.mfraw or .wav)");
    synth->add_flag("--wav", as_wav, "write 16-bit WAV instead of lossless .mfraw");

    // ---- analyze
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "run MFDFA and feature extraction over a corpus manifest");
    std::string manifest_path;
    ConfigFlags analyze_flags;
    analyze_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
    analyze_cmd->add_option("--outdir", outdir, "output directory")->required();
    add_config_flags(analyze_cmd, analyze_flags);

    // ---- corrmatrix
    auto* corr_cmd = app.add_subcommand(
        "corrmatrix", "cross-correlation matrix of per-clip singularity spectra");
    std::string spectra_dir;
    ConfigFlags corr_flags;
    corr_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
    corr_cmd->add_option("--spectra", spectra_dir, "directory of spectrum CSVs")->required();
    corr_cmd->add_option("--outdir", outdir, "output directory")->required();
    add_config_flags(corr_cmd, corr_flags);

    // ---- train-eval
    auto* train_cmd = app.add_subcommand(
        "train-eval", "hold-out split, RBF-SVM training and confusion-matrix evaluation");
    std::string features_path;
    ConfigFlags train_flags;
    train_cmd->add_option("--features", features_path, "feature CSV")->required();
    train_cmd->add_option("--outdir", outdir, "output directory")->required();
    add_config_flags(train_cmd, train_flags);

    // ---- report
    auto* report_cmd = app.add_subcommand(
        "report", "full pipeline: analyze + corrmatrix + train-eval + JSON run report");
    ConfigFlags report_flags;
    report_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
    report_cmd->add_option("--outdir", outdir, "output directory")->required();
    add_config_flags(report_cmd, report_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (classes > 0) {
                auto result = mfspeak::synth_corpus(classes, per_class, synth_seed, outdir, as_wav);
                std::cout << "wrote " << result.files.size() << " clips and "
                          << result.manifest_path << "\n";
            } else if (cascade_levels > 0) {
                mfspeak::CascadeSpec spec{static_cast<int>(cascade_levels), multiplier};
                auto ts = mfspeak::gen_binomial_cascade(spec);
                if (out_file.empty()) out_file = as_wav ? "cascade.wav" : "cascade.mfraw";
                if (as_wav) mfspeak::write_wav16(out_file, ts);
                else mfspeak::write_raw(out_file, ts);
                std::cout << "wrote " << out_file << " (" << ts.size() << " samples)\n";
            } else if (white_n > 0) {
                auto ts = mfspeak::gen_white_noise(static_cast<std::size_t>(white_n), synth_seed);
                if (out_file.empty()) out_file = as_wav ? "white.wav" : "white.mfraw";
                if (as_wav) mfspeak::write_wav16(out_file, ts);
                else mfspeak::write_raw(out_file, ts);
                std::cout << "wrote " << out_file << " (" << ts.size() << " samples)\n";
            } else {
                std::cerr << "synth: pass --classes, --cascade-levels, or --white-noise\n";
                return 1;
            }
        } else if (analyze_cmd->parsed()) {
            auto cfg = resolve_config(analyze_flags);
            auto manifest = mfspeak::load_manifest(manifest_path);
            auto result = mfspeak::analyze(manifest, cfg, outdir);
            std::cout << "features: " << result.features_csv << "\n";
            std::cout << "spectra:  " << result.spectra_dir << "\n";
            if (!result.failures.empty()) {
                for (const auto& f : result.failures) {
                    std::cerr << "clip " << f.clip_id << " failed: " << f.message << "\n";
                }
                std::cerr << result.failures.size() << " clip(s) failed\n";
                return 1;
            }
        } else if (corr_cmd->parsed()) {
            auto cfg = resolve_config(corr_flags);
            auto manifest = mfspeak::load_manifest(manifest_path);
            auto result = mfspeak::corrmatrix(manifest, spectra_dir, cfg.grid_size, outdir);
            std::cout << "matrix: " << result.matrix_csv << "\n";
            std::cout << "legend: " << result.legend_csv << "\n";
        } else if (train_cmd->parsed()) {
            auto cfg = resolve_config(train_flags);
            auto result = mfspeak::train_eval(features_path, cfg, outdir);
            std::cout << "model:     " << result.model_path << "\n";
            std::cout << "confusion: " << result.confusion_csv << "\n";
            std::cout << "accuracy:  " << mfspeak::format_double(result.accuracy) << "\n";
            if (!result.converged) {
                std::cerr << "warning: SMO hit the sweep bound before meeting the KKT tolerance\n";
            }
        } else if (report_cmd->parsed()) {
            auto cfg = resolve_config(report_flags);
            auto manifest = mfspeak::load_manifest(manifest_path);
            auto rep = mfspeak::report(manifest, cfg, manifest_path, outdir);
            std::cout << "report:   " << rep.report_path << "\n";
            std::cout << "accuracy: " << mfspeak::format_double(rep.eval.accuracy) << "\n";
            if (!rep.analyze.failures.empty()) {
                std::cerr << rep.analyze.failures.size() << " clip(s) failed\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
