#include "mfspeak/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfspeak/csv.hpp"
#include "mfspeak/errors.hpp"
#include "mfspeak/rng.hpp"
#include "mfspeak/version.hpp"
#include "mfspeak/wav.hpp"

namespace fs = std::filesystem;

namespace mfspeak {

// --- manifest ---------------------------------------------------------------

CorpusManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open manifest");
    expect_schema(in, "manifest");

    CorpusManifest manifest;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3 && fields.size() != 5) {
            throw IoError(path + ": manifest line needs 3 or 5 tab-separated fields: " + line);
        }
        ManifestEntry entry;
        entry.clip_id = fields[0];
        entry.source = fields[1];
        entry.speaker_label = fields[2];
        if (fields.size() == 5) {
            entry.window_start_s = parse_double(fields[3]);
            entry.window_duration_s = parse_double(fields[4]);
        }
        if (entry.clip_id.empty() || entry.source.empty() || entry.speaker_label.empty()) {
            throw IoError(path + ": manifest fields must be nonempty: " + line);
        }
        manifest.entries.push_back(std::move(entry));
    }

    std::vector<std::string> ids;
    for (const auto& e : manifest.entries) ids.push_back(e.clip_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw IoError(path + ": duplicate clip_id in manifest");
    }
    return manifest;
}

void save_manifest(const std::string& path, const CorpusManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << schema_header("manifest") << "\n";
    out << "# clip_id<TAB>source<TAB>speaker_label[<TAB>start_s<TAB>duration_s]\n";
    for (const auto& e : manifest.entries) {
        out << e.clip_id << "\t" << e.source << "\t" << e.speaker_label;
        if (e.window_start_s && e.window_duration_s) {
            out << "\t" << format_double(*e.window_start_s) << "\t"
                << format_double(*e.window_duration_s);
        }
        out << "\n";
    }
    if (!out) throw IoError(path + ": write failed");
}

namespace {

std::map<std::string, std::string> parse_kv_list(const std::string& body,
                                                 const std::string& context) {
    std::map<std::string, std::string> kv;
    for (const auto& item : split(body, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument(context + ": expected key=value, got '" + item + "'");
        }
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

TimeSeries load_source(const std::string& source) {
    if (source.rfind("cascade:", 0) == 0) {
        auto kv = parse_kv_list(source.substr(8), source);
        CascadeSpec spec;
        spec.levels = static_cast<int>(parse_long(kv.at("levels")));
        spec.multiplier = parse_double(kv.at("a"));
        TimeSeries ts = gen_binomial_cascade(spec);
        double noise = kv.count("noise") ? parse_double(kv.at("noise")) : 0.0;
        if (noise > 0.0) {
            auto seed = static_cast<std::uint64_t>(
                kv.count("seed") ? parse_long(kv.at("seed")) : 0);
            double mean = 0.0;
            for (double v : ts.samples) mean += v;
            mean /= static_cast<double>(ts.samples.size());
            double var = 0.0;
            for (double v : ts.samples) var += (v - mean) * (v - mean);
            double sd = std::sqrt(var / static_cast<double>(ts.samples.size()));
            SplitMix64 rng(seed);
            for (double& v : ts.samples) v += noise * sd * rng.next_gaussian();
            ts.source_id = source;
        }
        return ts;
    }
    if (source.rfind("white:", 0) == 0) {
        auto kv = parse_kv_list(source.substr(6), source);
        auto n = static_cast<std::size_t>(parse_long(kv.at("n")));
        auto seed = static_cast<std::uint64_t>(kv.count("seed") ? parse_long(kv.at("seed")) : 0);
        return gen_white_noise(n, seed);
    }
    if (source.size() >= 4 && source.substr(source.size() - 4) == ".wav") {
        return load_wav(source);
    }
    if (source.size() >= 6 && source.substr(source.size() - 6) == ".mfraw") {
        return load_raw(source);
    }
    throw InvalidArgument("unrecognized source '" + source +
                          "' (expected *.wav, *.mfraw, cascade:..., or white:...)");
}

}  // namespace

TimeSeries load_entry(const ManifestEntry& entry) {
    TimeSeries ts = load_source(entry.source);
    if (entry.window_start_s && entry.window_duration_s) {
        ts = segment(ts, *entry.window_start_s, *entry.window_duration_s);
    }
    return ts;
}

// --- configuration ----------------------------------------------------------

MfdfaConfig PipelineConfig::mfdfa() const {
    if (!(q_step > 0.0)) throw InvalidArgument("q_step must be positive");
    if (!(q_max > q_min)) throw InvalidArgument("q_max must exceed q_min");
    MfdfaConfig cfg;
    auto count = static_cast<long>(std::floor((q_max - q_min) / q_step + 0.5)) + 1;
    cfg.q_grid.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        double q = q_min + static_cast<double>(i) * q_step;
        if (std::abs(q) < 1e-12) q = 0.0;  // the q = 0 limit is handled specially
        cfg.q_grid.push_back(q);
    }
    cfg.scale_min = scale_min;
    cfg.scale_max = scale_max;
    cfg.scale_count = scale_count;
    cfg.detrend_order = detrend_order;
    cfg.use_both_ends = use_both_ends;
    return cfg;
}

SvmParams PipelineConfig::svm() const {
    SvmParams params;
    params.c = svm_c;
    params.gamma = svm_gamma;
    params.tolerance = svm_tolerance;
    params.max_passes = svm_max_passes;
    params.seed = derive_seed(seed, 0x5u, 0xCu);
    return params;
}

std::string PipelineConfig::snapshot() const {
    // canonical key order; threads is execution detail, not config,
    // and must not influence the hash (outputs are thread-invariant)
    std::ostringstream out;
    out << "q_min = " << format_double(q_min) << "\n";
    out << "q_max = " << format_double(q_max) << "\n";
    out << "q_step = " << format_double(q_step) << "\n";
    out << "scale_min = " << scale_min << "\n";
    out << "scale_max = " << scale_max << "\n";
    out << "scale_count = " << scale_count << "\n";
    out << "detrend_order = " << detrend_order << "\n";
    out << "use_both_ends = " << (use_both_ends ? "true" : "false") << "\n";
    out << "grid_size = " << grid_size << "\n";
    out << "svm_c = " << format_double(svm_c) << "\n";
    out << "svm_gamma = " << (svm_gamma == 0.0 ? std::string("auto") : format_double(svm_gamma))
        << "\n";
    out << "svm_tolerance = " << format_double(svm_tolerance) << "\n";
    out << "svm_max_passes = " << svm_max_passes << "\n";
    out << "holdout_ratio = " << format_double(holdout_ratio) << "\n";
    out << "stratified = " << (stratified ? "true" : "false") << "\n";
    out << "use_width_feature = " << (use_width_feature ? "true" : "false") << "\n";
    out << "seed = " << seed << "\n";
    return out.str();
}

std::string PipelineConfig::config_hash() const { return fnv1a_hex(snapshot()); }

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open config file");

    auto parse_bool = [&](const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw IoError(path + ": expected true/false, got '" + v + "'");
    };

    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path + ": expected key = value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "q_min") base.q_min = parse_double(value);
        else if (key == "q_max") base.q_max = parse_double(value);
        else if (key == "q_step") base.q_step = parse_double(value);
        else if (key == "scale_min") base.scale_min = parse_long(value);
        else if (key == "scale_max") base.scale_max = parse_long(value);
        else if (key == "scale_count") base.scale_count = parse_long(value);
        else if (key == "detrend_order") base.detrend_order = static_cast<int>(parse_long(value));
        else if (key == "use_both_ends") base.use_both_ends = parse_bool(value);
        else if (key == "grid_size") base.grid_size = static_cast<std::size_t>(parse_long(value));
        else if (key == "svm_c") base.svm_c = parse_double(value);
        else if (key == "svm_gamma") base.svm_gamma = value == "auto" ? 0.0 : parse_double(value);
        else if (key == "svm_tolerance") base.svm_tolerance = parse_double(value);
        else if (key == "svm_max_passes") base.svm_max_passes = parse_long(value);
        else if (key == "holdout_ratio") base.holdout_ratio = parse_double(value);
        else if (key == "stratified") base.stratified = parse_bool(value);
        else if (key == "use_width_feature") base.use_width_feature = parse_bool(value);
        else if (key == "seed") base.seed = parse_u64(value);
        else if (key == "threads") base.threads = static_cast<int>(parse_long(value));
        else throw IoError(path + ": unknown config key '" + key + "'");
    }
    return base;
}

// --- spectrum / feature CSV -------------------------------------------------

void write_spectrum_csv(const std::string& path, const MfdfaResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << schema_header("spectrum-csv") << "\n";
    out << "q,h,r2,tau,alpha,f_alpha\n";
    const auto& hc = result.hurst;
    for (std::size_t i = 0; i < hc.q_grid.size(); ++i) {
        double tau = hc.q_grid[i] * hc.h[i] - 1.0;
        out << format_double(hc.q_grid[i]) << "," << format_double(hc.h[i]) << ","
            << format_double(hc.r2[i]) << "," << format_double(tau) << ","
            << format_double(result.spectrum.alpha[i]) << ","
            << format_double(result.spectrum.f_alpha[i]) << "\n";
    }
    out << "fit," << format_double(result.fit.a) << "," << format_double(result.fit.b)
        << "," << format_double(result.fit.c) << "," << format_double(result.fit.alpha0)
        << "," << format_double(result.fit.width) << ","
        << format_double(result.fit.endpoint_width) << "\n";
    if (!out) throw IoError(path + ": write failed");
}

SingularitySpectrum read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    expect_schema(in, "spectrum-csv");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": missing column header");

    SingularitySpectrum spec;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields[0] == "fit") break;
        if (fields.size() != 6) throw IoError(path + ": bad spectrum row: " + line);
        spec.q_of_point.push_back(parse_double(fields[0]));
        spec.alpha.push_back(parse_double(fields[4]));
        spec.f_alpha.push_back(parse_double(fields[5]));
    }
    if (spec.alpha.size() < 3) throw IoError(path + ": spectrum has fewer than 3 points");
    return spec;
}

void write_features_csv(const std::string& path, const std::vector<FeatureVector>& rows,
                        const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << schema_header("feature-csv") << "\n";
    out << "clip_id,speaker_label,feature1,feature2,width,config_hash\n";
    for (const auto& row : rows) {
        out << row.clip_id << "," << row.speaker_label << ","
            << format_double(row.feature1) << "," << format_double(row.feature2) << ","
            << format_double(row.aux_width) << "," << config_hash << "\n";
    }
    if (!out) throw IoError(path + ": write failed");
}

std::vector<FeatureVector> read_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    expect_schema(in, "feature-csv");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": missing column header");

    std::vector<FeatureVector> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 6) throw IoError(path + ": bad feature row: " + line);
        FeatureVector fv;
        fv.clip_id = fields[0];
        fv.speaker_label = fields[1];
        fv.feature1 = parse_double(fields[2]);
        fv.feature2 = parse_double(fields[3]);
        fv.aux_width = parse_double(fields[4]);
        rows.push_back(std::move(fv));
    }
    return rows;
}

// --- analyze ----------------------------------------------------------------

AnalyzeResult analyze(const CorpusManifest& manifest, const PipelineConfig& config,
                      const std::string& out_dir) {
    if (manifest.entries.empty()) {
        throw InvalidArgument("manifest is empty; nothing to analyze");
    }
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "spectra");

    const MfdfaConfig mfdfa_cfg = config.mfdfa();
    const std::size_t n = manifest.entries.size();

    struct ClipOutput {
        bool ok = false;
        FeatureVector features;
        std::string spectrum_csv_path;
        std::string error;
    };
    std::vector<ClipOutput> outputs(n);

    auto process_clip = [&](std::size_t i) {
        const auto& entry = manifest.entries[i];
        ClipOutput& out = outputs[i];
        try {
            TimeSeries ts = load_entry(entry);
            MfdfaResult result = run_mfdfa(ts, mfdfa_cfg);
            NormalizedSpectrum ns = normalize_spectrum(result.spectrum);
            out.features.clip_id = entry.clip_id;
            out.features.speaker_label = entry.speaker_label;
            out.features.feature1 = feature_median_minus_mode(ns);
            out.features.feature2 = feature_skewness(ns);
            out.features.aux_width = result.fit.width;
            out.spectrum_csv_path =
                (fs::path(out_dir) / "spectra" / (entry.clip_id + ".spectrum.csv")).string();
            write_spectrum_csv(out.spectrum_csv_path, result);
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    };

    int threads = std::max(1, config.threads);
    if (threads == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) process_clip(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                process_clip(i);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(threads, static_cast<int>(n)); ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) t.join();
    }

    AnalyzeResult result;
    result.spectra_dir = (fs::path(out_dir) / "spectra").string();
    result.features_csv = (fs::path(out_dir) / "features.csv").string();
    std::vector<FeatureVector> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (outputs[i].ok) {
            rows.push_back(outputs[i].features);
        } else {
            result.failures.push_back({manifest.entries[i].clip_id, outputs[i].error});
        }
    }
    write_features_csv(result.features_csv, rows, config.config_hash());
    return result;
}

// --- corrmatrix ---------------------------------------------------------

CorrMatrixResult corrmatrix(const CorpusManifest& manifest, const std::string& spectra_dir,
                            std::size_t grid_size, const std::string& out_dir) {
    if (manifest.entries.size() < 2) {
        throw InvalidArgument("correlation matrix needs at least 2 clips");
    }
    fs::create_directories(out_dir);

    std::vector<SingularitySpectrum> specs;
    specs.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        auto path = fs::path(spectra_dir) / (entry.clip_id + ".spectrum.csv");
        specs.push_back(read_spectrum_csv(path.string()));
    }
    auto aligned = resample_to_common_grid(specs, grid_size);

    CorrMatrixResult result;
    try {
        result.matrix = cross_correlation_matrix(aligned);
    } catch (const InvalidArgument& e) {
        throw StageError("corrmatrix", e.what());
    }

    result.matrix_csv = (fs::path(out_dir) / "corr_matrix.csv").string();
    {
        std::ofstream out(result.matrix_csv);
        if (!out) throw IoError(result.matrix_csv + ": cannot open for writing");
        out << schema_header("corr-csv") << "\n";
        for (std::size_t i = 0; i < result.matrix.n; ++i) {
            for (std::size_t j = 0; j < result.matrix.n; ++j) {
                if (j) out << ",";
                out << format_double(result.matrix.at(i, j));
            }
            out << "\n";
        }
    }
    result.legend_csv = (fs::path(out_dir) / "corr_legend.csv").string();
    {
        std::ofstream out(result.legend_csv);
        if (!out) throw IoError(result.legend_csv + ": cannot open for writing");
        out << schema_header("corr-legend") << "\n";
        out << "index,clip_id,speaker_label\n";
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            out << i << "," << manifest.entries[i].clip_id << ","
                << manifest.entries[i].speaker_label << "\n";
        }
    }
    return result;
}

// --- train/eval ---------------------------------------------------------

namespace {

std::string percent(double fraction) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << fraction * 100.0 << "%";
    return out.str();
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << schema_header("confusion-csv") << "\n";
    out << "actual\\predicted";
    for (const auto& c : cm.classes) out << "," << c;
    out << ",recall\n";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        out << cm.classes[i];
        for (std::size_t j = 0; j < cm.classes.size(); ++j) out << "," << cm.at(i, j);
        out << "," << format_double(cm.recall(i)) << "\n";
    }
    out << "precision";
    for (std::size_t j = 0; j < cm.classes.size(); ++j) {
        out << "," << format_double(cm.precision(j));
    }
    out << "," << format_double(cm.accuracy()) << "\n";
}

void write_confusion_table(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    std::size_t w = 10;
    for (const auto& c : cm.classes) w = std::max(w, c.size() + 2);

    auto cell = [&](const std::string& s) {
        out << s;
        for (std::size_t i = s.size(); i < w; ++i) out << ' ';
    };
    out << "Classifier prediction\n";
    cell("actual");
    for (const auto& c : cm.classes) cell(c);
    cell("Total");
    out << "\n";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        cell(cm.classes[i]);
        for (std::size_t j = 0; j < cm.classes.size(); ++j) cell(std::to_string(cm.at(i, j)));
        cell(percent(cm.recall(i)));
        out << "\n";
    }
    cell("Total");
    for (std::size_t j = 0; j < cm.classes.size(); ++j) cell(percent(cm.precision(j)));
    cell(percent(cm.accuracy()));
    out << "\n";
}

}  // namespace

TrainEvalResult train_eval(const std::string& features_csv, const PipelineConfig& config,
                           const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto rows = read_features_csv(features_csv);
    if (rows.empty()) throw InvalidArgument(features_csv + ": no feature rows");

    std::vector<LabeledPoint> dataset;
    dataset.reserve(rows.size());
    for (const auto& row : rows) {
        LabeledPoint p;
        p.x = {row.feature1, row.feature2};
        if (config.use_width_feature) p.x.push_back(row.aux_width);
        p.label = row.speaker_label;
        p.clip_id = row.clip_id;
        dataset.push_back(std::move(p));
    }

    HoldoutSplit split;
    try {
        split = stratified_holdout(dataset, config.holdout_ratio,
                                   derive_seed(config.seed, 0x5u, 0x11u), config.stratified);
    } catch (const Error& e) {
        throw StageError("holdout", e.what());
    }

    TrainEvalResult result;
    SvmModel model;
    try {
        model = train_svm(split.train, config.svm());
    } catch (const Error& e) {
        throw StageError("train", e.what());
    }
    result.converged = model.converged;
    try {
        result.confusion = evaluate(model, split.test);
    } catch (const Error& e) {
        throw StageError("evaluate", e.what());
    }
    result.accuracy = result.confusion.accuracy();

    result.model_path = (fs::path(out_dir) / "model.txt").string();
    save_model_file(result.model_path, model);
    result.confusion_csv = (fs::path(out_dir) / "confusion.csv").string();
    write_confusion_csv(result.confusion_csv, result.confusion);
    result.confusion_txt = (fs::path(out_dir) / "confusion.txt").string();
    write_confusion_table(result.confusion_txt, result.confusion);
    return result;
}

// --- synth --------------------------------------------------------------

SynthResult synth_corpus(std::size_t n_classes, std::size_t clips_per_class,
                         std::uint64_t seed, const std::string& out_dir, bool as_wav) {
    fs::create_directories(out_dir);
    auto corpus = make_synthetic_corpus(n_classes, clips_per_class, seed);

    SynthResult result;
    CorpusManifest manifest;
    for (const auto& clip : corpus) {
        std::string name = clip.clip_id + (as_wav ? ".wav" : ".mfraw");
        std::string path = (fs::path(out_dir) / name).string();
        if (as_wav) {
            write_wav16(path, clip.series);
        } else {
            write_raw(path, clip.series);
        }
        result.files.push_back(path);
        manifest.entries.push_back({clip.clip_id, path, clip.label, {}, {}});
    }
    result.manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
    save_manifest(result.manifest_path, manifest);
    return result;
}

// --- report ---------------------------------------------------------------

RunReport report(const CorpusManifest& manifest, const PipelineConfig& config,
                 const std::string& manifest_path, const std::string& out_dir) {
    RunReport rep;
    rep.analyze = analyze(manifest, config, out_dir);
    if (!rep.analyze.failures.empty()) {
        // the matrix and legend index the full manifest; a clean corpus
        // is required for the one-shot report path
        std::string ids;
        for (const auto& f : rep.analyze.failures) ids += f.clip_id + " ";
        throw StageError("analyze", std::to_string(rep.analyze.failures.size()) +
                                        " clip(s) failed: " + ids);
    }
    rep.corr = corrmatrix(manifest, rep.analyze.spectra_dir, config.grid_size, out_dir);
    rep.eval = train_eval(rep.analyze.features_csv, config, out_dir);

    nlohmann::ordered_json j;
    j["tool"] = "mfspeak";
    j["version"] = kVersion;
    j["manifest"] = manifest_path;
    j["seed"] = config.seed;
    j["config_hash"] = config.config_hash();
    nlohmann::ordered_json cfg;
    for (const auto& line : split(config.snapshot(), '\n')) {
        if (line.empty()) continue;
        auto eq = line.find(" = ");
        cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["config"] = cfg;
    j["artifacts"] = {{"features_csv", rep.analyze.features_csv},
                      {"spectra_dir", rep.analyze.spectra_dir},
                      {"corr_matrix_csv", rep.corr.matrix_csv},
                      {"corr_legend_csv", rep.corr.legend_csv},
                      {"model", rep.eval.model_path},
                      {"confusion_csv", rep.eval.confusion_csv},
                      {"confusion_txt", rep.eval.confusion_txt}};
    j["accuracy"] = rep.eval.accuracy;
    j["svm_converged"] = rep.eval.converged;
    nlohmann::ordered_json confusion;
    confusion["classes"] = rep.eval.confusion.classes;
    std::vector<std::vector<std::size_t>> counts;
    for (std::size_t i = 0; i < rep.eval.confusion.classes.size(); ++i) {
        std::vector<std::size_t> row;
        for (std::size_t jj = 0; jj < rep.eval.confusion.classes.size(); ++jj) {
            row.push_back(rep.eval.confusion.at(i, jj));
        }
        counts.push_back(std::move(row));
    }
    confusion["counts"] = counts;
    j["confusion"] = confusion;
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    for (const auto& f : rep.analyze.failures) {
        failures.push_back({{"clip_id", f.clip_id}, {"message", f.message}});
    }
    j["clip_failures"] = failures;

    rep.report_path = (fs::path(out_dir) / "run_report.json").string();
    std::ofstream out(rep.report_path);
    if (!out) throw IoError(rep.report_path + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError(rep.report_path + ": write failed");
    return rep;
}

}  // namespace mfspeak
