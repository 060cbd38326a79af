#include "mfspeak/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mfspeak/csv.hpp"
#include "mfspeak/errors.hpp"
#include "mfspeak/rng.hpp"

namespace mfspeak {

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                  double gamma) {
    if (x.size() != y.size()) throw InvalidArgument("kernel inputs differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    bool converged = true;
};

/// Sequential minimal optimization on the standard SVM dual for one
/// binary problem. Pair selection uses the largest |E_i - E_j|
/// heuristic with a seeded random fallback, so training is
/// deterministic for a fixed seed.
SmoResult smo_train(const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y, double c, double gamma,
                    double tol, long max_passes, std::uint64_t seed) {
    const std::size_t n = x.size();
    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double k = rbf_kernel(x[i], x[j], gamma);
            kmat[i * n + j] = k;
            kmat[j * n + i] = k;
        }
    }

    SmoResult res;
    res.alpha.assign(n, 0.0);
    SplitMix64 rng(seed);

    auto decision = [&](std::size_t i) {
        double acc = res.bias;
        for (std::size_t j = 0; j < n; ++j) {
            if (res.alpha[j] != 0.0) acc += res.alpha[j] * y[j] * kmat[j * n + i];
        }
        return acc;
    };

    // One analytic pair update; returns false when the pair cannot move
    // (clipped range empty, flat direction, or step below noise).
    auto try_pair = [&](std::size_t i, std::size_t j, double ei) {
        if (i == j) return false;
        double ej = decision(j) - y[j];
        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, res.alpha[j] - res.alpha[i]);
            hi = std::min(c, c + res.alpha[j] - res.alpha[i]);
        } else {
            lo = std::max(0.0, res.alpha[i] + res.alpha[j] - c);
            hi = std::min(c, res.alpha[i] + res.alpha[j]);
        }
        if (lo >= hi) return false;

        double eta = 2.0 * kmat[i * n + j] - kmat[i * n + i] - kmat[j * n + j];
        if (eta >= 0.0) return false;  // duplicate points make the pair flat

        double aj_old = res.alpha[j];
        double ai_old = res.alpha[i];
        double aj = std::clamp(aj_old - y[j] * (ei - ej) / eta, lo, hi);
        if (std::abs(aj - aj_old) < 1e-12) return false;
        double ai = ai_old + y[i] * y[j] * (aj_old - aj);

        double b1 = res.bias - ei - y[i] * (ai - ai_old) * kmat[i * n + i] -
                    y[j] * (aj - aj_old) * kmat[i * n + j];
        double b2 = res.bias - ej - y[i] * (ai - ai_old) * kmat[i * n + j] -
                    y[j] * (aj - aj_old) * kmat[j * n + j];
        res.alpha[i] = ai;
        res.alpha[j] = aj;
        if (ai > 0.0 && ai < c) {
            res.bias = b1;
        } else if (aj > 0.0 && aj < c) {
            res.bias = b2;
        } else {
            res.bias = 0.5 * (b1 + b2);
        }
        return true;
    };

    long pass = 0;
    for (; pass < max_passes; ++pass) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double ei = decision(i) - y[i];
            double r = y[i] * ei;
            bool violates = (r < -tol && res.alpha[i] < c) || (r > tol && res.alpha[i] > 0.0);
            if (!violates) continue;

            // second-choice heuristic: largest |E_i - E_j| first, then
            // every other j from a seeded offset, so a single bad pair
            // cannot stall the sweep below the optimum
            std::size_t heuristic = n;
            double best_gap = -1.0;
            for (std::size_t cand = 0; cand < n; ++cand) {
                if (cand == i) continue;
                double gap = std::abs(ei - (decision(cand) - y[cand]));
                if (gap > best_gap) {
                    best_gap = gap;
                    heuristic = cand;
                }
            }
            bool moved = heuristic != n && try_pair(i, heuristic, ei);
            if (!moved) {
                std::size_t offset = static_cast<std::size_t>(rng.next_u64() % n);
                for (std::size_t step = 0; step < n && !moved; ++step) {
                    moved = try_pair(i, (offset + step) % n, ei);
                }
            }
            if (moved) ++changed;
        }
        if (changed == 0) break;  // every multiplier satisfies KKT within tol
    }
    res.converged = pass < max_passes;
    return res;
}

std::vector<std::string> sorted_classes(const std::vector<LabeledPoint>& data) {
    std::vector<std::string> classes;
    for (const auto& p : data) classes.push_back(p.label);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

std::vector<double> standardize(const SvmModel& model, const std::vector<double>& x) {
    if (x.size() != model.dimension()) {
        throw InvalidArgument("feature dimension mismatch");
    }
    std::vector<double> z(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        z[d] = (x[d] - model.feature_mean[d]) / model.feature_std[d];
    }
    return z;
}

}  // namespace

double dual_objective(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y,
                      const std::vector<double>& alpha, double gamma) {
    const std::size_t n = x.size();
    double obj = 0.0;
    for (double a : alpha) obj += a;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * rbf_kernel(x[i], x[j], gamma);
        }
    }
    return obj;
}

SvmModel train_svm(const std::vector<LabeledPoint>& train, const SvmParams& params) {
    if (train.empty()) throw InvalidArgument("empty training set");
    if (!(params.c > 0.0)) throw InvalidArgument("C must be positive");
    if (!(params.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
    const std::size_t dim = train[0].x.size();
    if (dim == 0) throw InvalidArgument("zero-dimensional features");
    for (const auto& p : train) {
        if (p.x.size() != dim) throw InvalidArgument("inconsistent feature dimensions");
    }

    SvmModel model;
    model.classes = sorted_classes(train);
    if (model.classes.size() < 2) {
        throw InvalidArgument("training needs at least 2 classes");
    }

    // per-dimension standardization fitted on the training set
    model.feature_mean.assign(dim, 0.0);
    model.feature_std.assign(dim, 0.0);
    for (const auto& p : train) {
        for (std::size_t d = 0; d < dim; ++d) model.feature_mean[d] += p.x[d];
    }
    for (double& m : model.feature_mean) m /= static_cast<double>(train.size());
    for (const auto& p : train) {
        for (std::size_t d = 0; d < dim; ++d) {
            double r = p.x[d] - model.feature_mean[d];
            model.feature_std[d] += r * r;
        }
    }
    for (double& s : model.feature_std) {
        s = std::sqrt(s / static_cast<double>(train.size()));
        if (!(s > 0.0)) s = 1.0;  // constant dimension; leave it centered
    }

    std::vector<std::vector<double>> z(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        z[i].resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            z[i][d] = (train[i].x[d] - model.feature_mean[d]) / model.feature_std[d];
        }
    }

    model.params = params;
    if (params.gamma == 0.0) {
        // "auto": 1/(dim * mean per-dimension variance) of the features
        // the kernel actually sees, i.e. the standardized ones
        double var = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double mean = 0.0;
            for (const auto& row : z) mean += row[d];
            mean /= static_cast<double>(z.size());
            double acc = 0.0;
            for (const auto& row : z) acc += (row[d] - mean) * (row[d] - mean);
            var += acc / static_cast<double>(z.size());
        }
        var /= static_cast<double>(dim);
        if (!(var > 0.0)) throw InvalidArgument("cannot resolve gamma: features have no variance");
        model.params.gamma = 1.0 / (static_cast<double>(dim) * var);
    }
    if (!(model.params.gamma > 0.0)) throw InvalidArgument("gamma must be positive");

    std::vector<std::vector<std::size_t>> by_class(model.classes.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        auto it = std::lower_bound(model.classes.begin(), model.classes.end(), train[i].label);
        by_class[static_cast<std::size_t>(it - model.classes.begin())].push_back(i);
    }

    for (std::size_t a = 0; a < model.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
            std::vector<std::vector<double>> px;
            std::vector<int> py;
            std::vector<std::size_t> idx;
            for (std::size_t i : by_class[a]) idx.push_back(i);
            for (std::size_t i : by_class[b]) idx.push_back(i);
            std::sort(idx.begin(), idx.end());  // training order independent of grouping
            for (std::size_t i : idx) {
                px.push_back(z[i]);
                py.push_back(train[i].label == model.classes[a] ? +1 : -1);
            }
            auto smo = smo_train(px, py, model.params.c, model.params.gamma,
                                 model.params.tolerance, model.params.max_passes,
                                 derive_seed(model.params.seed, a, b));
            BinarySvm machine;
            machine.class_a = a;
            machine.class_b = b;
            machine.bias = smo.bias;
            for (std::size_t i = 0; i < px.size(); ++i) {
                if (smo.alpha[i] > 0.0) {
                    machine.support_vectors.push_back(px[i]);
                    machine.dual_coeffs.push_back(smo.alpha[i] * py[i]);
                }
            }
            model.converged = model.converged && smo.converged;
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

std::string predict(const SvmModel& model, const std::vector<double>& x) {
    if (model.machines.empty()) throw InvalidArgument("model is not trained");
    std::vector<double> z = standardize(model, x);

    std::vector<std::size_t> votes(model.classes.size(), 0);
    std::vector<double> margin(model.classes.size(), 0.0);
    for (const auto& m : model.machines) {
        double d = m.bias;
        for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
            d += m.dual_coeffs[i] * rbf_kernel(m.support_vectors[i], z, model.params.gamma);
        }
        std::size_t winner = d >= 0.0 ? m.class_a : m.class_b;
        votes[winner] += 1;
        margin[winner] += std::abs(d);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < votes.size(); ++k) {
        if (votes[k] > votes[best] ||
            (votes[k] == votes[best] && margin[k] > margin[best])) {
            best = k;  // remaining ties keep the smallest label order
        }
    }
    return model.classes[best];
}

double ConfusionMatrix::accuracy() const {
    if (total == 0) return 0.0;
    std::size_t diag = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) diag += at(k, k);
    return static_cast<double>(diag) / static_cast<double>(total);
}

double ConfusionMatrix::recall(std::size_t class_index) const {
    std::size_t row = 0;
    for (std::size_t j = 0; j < classes.size(); ++j) row += at(class_index, j);
    return row == 0 ? 0.0 : static_cast<double>(at(class_index, class_index)) / row;
}

double ConfusionMatrix::precision(std::size_t class_index) const {
    std::size_t col = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) col += at(i, class_index);
    return col == 0 ? 0.0 : static_cast<double>(at(class_index, class_index)) / col;
}

ConfusionMatrix tally_confusion(const std::vector<std::string>& actual,
                                const std::vector<std::string>& predicted) {
    if (actual.size() != predicted.size()) {
        throw InvalidArgument("actual/predicted length mismatch");
    }
    if (actual.empty()) throw InvalidArgument("empty evaluation set");

    ConfusionMatrix cm;
    std::vector<std::string> all = actual;
    all.insert(all.end(), predicted.begin(), predicted.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    cm.classes = all;
    cm.counts.assign(all.size() * all.size(), 0);
    auto index_of = [&](const std::string& label) {
        return static_cast<std::size_t>(
            std::lower_bound(cm.classes.begin(), cm.classes.end(), label) - cm.classes.begin());
    };
    for (std::size_t i = 0; i < actual.size(); ++i) {
        cm.counts[index_of(actual[i]) * cm.classes.size() + index_of(predicted[i])] += 1;
    }
    cm.total = actual.size();
    return cm;
}

ConfusionMatrix evaluate(const SvmModel& model, const std::vector<LabeledPoint>& test) {
    if (test.empty()) throw InvalidArgument("empty test set");
    std::vector<std::string> actual, predicted;
    actual.reserve(test.size());
    predicted.reserve(test.size());
    for (const auto& p : test) {
        actual.push_back(p.label);
        predicted.push_back(predict(model, p.x));
    }
    return tally_confusion(actual, predicted);
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, SplitMix64& rng) {
    // Fisher-Yates with our own generator; std::shuffle's ordering is
    // not pinned by the standard
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

HoldoutSplit stratified_holdout(const std::vector<LabeledPoint>& dataset,
                                double holdout_ratio, std::uint64_t seed,
                                bool stratified) {
    if (!(holdout_ratio > 0.0 && holdout_ratio < 1.0)) {
        throw InvalidArgument("holdout ratio must lie strictly between 0 and 1");
    }
    auto classes = sorted_classes(dataset);
    if (classes.empty()) throw InvalidArgument("empty dataset");

    std::vector<std::vector<std::size_t>> by_class(classes.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto it = std::lower_bound(classes.begin(), classes.end(), dataset[i].label);
        by_class[static_cast<std::size_t>(it - classes.begin())].push_back(i);
    }
    for (std::size_t k = 0; k < classes.size(); ++k) {
        if (by_class[k].size() < 2) {
            throw InvalidArgument("class '" + classes[k] + "' has fewer than 2 samples");
        }
    }

    HoldoutSplit split;
    std::vector<bool> in_test(dataset.size(), false);
    if (stratified) {
        for (std::size_t k = 0; k < classes.size(); ++k) {
            auto idx = by_class[k];
            SplitMix64 rng(derive_seed(seed, k));
            shuffle_indices(idx, rng);
            auto n_test = static_cast<std::size_t>(
                std::lround(holdout_ratio * static_cast<double>(idx.size())));
            if (n_test == 0 || n_test >= idx.size()) {
                throw InvalidArgument("class '" + classes[k] +
                                      "' would get an empty train or test split");
            }
            for (std::size_t i = 0; i < n_test; ++i) in_test[idx[i]] = true;
        }
    } else {
        std::vector<std::size_t> idx(dataset.size());
        std::iota(idx.begin(), idx.end(), 0);
        SplitMix64 rng(derive_seed(seed, 0));
        shuffle_indices(idx, rng);
        auto n_test = static_cast<std::size_t>(
            std::lround(holdout_ratio * static_cast<double>(idx.size())));
        if (n_test == 0 || n_test >= idx.size()) {
            throw InvalidArgument("holdout would produce an empty train or test set");
        }
        for (std::size_t i = 0; i < n_test; ++i) in_test[idx[i]] = true;
        // training must still see every class
        for (std::size_t k = 0; k < classes.size(); ++k) {
            bool any_train = false;
            for (std::size_t i : by_class[k]) any_train = any_train || !in_test[i];
            if (!any_train) {
                throw InvalidArgument("class '" + classes[k] +
                                      "' has no training samples in the unstratified split");
            }
        }
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (in_test[i] ? split.test : split.train).push_back(dataset[i]);
    }
    return split;
}

// --- model persistence -----------------------------------------------------

void save_model(std::ostream& out, const SvmModel& model) {
    out << schema_header("svm-model") << "\n";
    out << "classes " << model.classes.size() << "\n";
    for (std::size_t k = 0; k < model.classes.size(); ++k) {
        out << "class " << k << " " << model.classes[k] << "\n";
    }
    out << "dim " << model.dimension() << "\n";
    out << "mean";
    for (double v : model.feature_mean) out << " " << format_double(v);
    out << "\nstd";
    for (double v : model.feature_std) out << " " << format_double(v);
    out << "\nparams " << format_double(model.params.c) << " "
        << format_double(model.params.gamma) << " "
        << format_double(model.params.tolerance) << " " << model.params.max_passes
        << " " << model.params.seed << " " << (model.converged ? 1 : 0) << "\n";
    out << "machines " << model.machines.size() << "\n";
    for (const auto& m : model.machines) {
        out << "machine " << m.class_a << " " << m.class_b << " "
            << m.support_vectors.size() << " " << format_double(m.bias) << "\n";
        for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
            out << "sv " << format_double(m.dual_coeffs[i]);
            for (double v : m.support_vectors[i]) out << " " << format_double(v);
            out << "\n";
        }
    }
}

namespace {

std::vector<std::string> next_tokens(std::istream& in, const std::string& expect) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("model file: unexpected end of file");
    auto tokens = split(line, ' ');
    if (tokens.empty() || tokens[0] != expect) {
        throw IoError("model file: expected '" + expect + "' line");
    }
    return tokens;
}

}  // namespace

SvmModel load_model(std::istream& in) {
    expect_schema(in, "svm-model");
    SvmModel model;

    auto t = next_tokens(in, "classes");
    auto n_classes = static_cast<std::size_t>(parse_long(t.at(1)));
    model.classes.resize(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k) {
        std::string line;
        if (!std::getline(in, line)) throw IoError("model file: truncated class list");
        auto tk = split(line, ' ');
        if (tk.size() < 3 || tk[0] != "class") throw IoError("model file: bad class line");
        auto idx = static_cast<std::size_t>(parse_long(tk[1]));
        // the label is everything after the index (labels may contain spaces)
        std::string label = line.substr(line.find(tk[1]) + tk[1].size() + 1);
        if (idx >= n_classes || label.empty()) throw IoError("model file: bad class line");
        model.classes[idx] = label;
    }

    t = next_tokens(in, "dim");
    auto dim = static_cast<std::size_t>(parse_long(t.at(1)));

    t = next_tokens(in, "mean");
    if (t.size() != dim + 1) throw IoError("model file: bad mean line");
    for (std::size_t d = 0; d < dim; ++d) model.feature_mean.push_back(parse_double(t[d + 1]));

    t = next_tokens(in, "std");
    if (t.size() != dim + 1) throw IoError("model file: bad std line");
    for (std::size_t d = 0; d < dim; ++d) model.feature_std.push_back(parse_double(t[d + 1]));

    t = next_tokens(in, "params");
    if (t.size() != 7) throw IoError("model file: bad params line");
    model.params.c = parse_double(t[1]);
    model.params.gamma = parse_double(t[2]);
    model.params.tolerance = parse_double(t[3]);
    model.params.max_passes = parse_long(t[4]);
    model.params.seed = parse_u64(t[5]);
    model.converged = parse_long(t[6]) != 0;

    t = next_tokens(in, "machines");
    auto n_machines = static_cast<std::size_t>(parse_long(t.at(1)));
    for (std::size_t mi = 0; mi < n_machines; ++mi) {
        t = next_tokens(in, "machine");
        if (t.size() != 5) throw IoError("model file: bad machine line");
        BinarySvm m;
        m.class_a = static_cast<std::size_t>(parse_long(t[1]));
        m.class_b = static_cast<std::size_t>(parse_long(t[2]));
        auto nsv = static_cast<std::size_t>(parse_long(t[3]));
        m.bias = parse_double(t[4]);
        for (std::size_t i = 0; i < nsv; ++i) {
            auto sv = next_tokens(in, "sv");
            if (sv.size() != dim + 2) throw IoError("model file: bad sv line");
            m.dual_coeffs.push_back(parse_double(sv[1]));
            std::vector<double> x(dim);
            for (std::size_t d = 0; d < dim; ++d) x[d] = parse_double(sv[d + 2]);
            m.support_vectors.push_back(std::move(x));
        }
        model.machines.push_back(std::move(m));
    }
    return model;
}

void save_model_file(const std::string& path, const SvmModel& model) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    save_model(out, model);
    if (!out) throw IoError(path + ": write failed");
}

SvmModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    return load_model(in);
}

// --- synthetic corpus -------------------------------------------------------

const std::vector<double>& corpus_multipliers() {
    static const std::vector<double> multipliers = {0.60, 0.65, 0.70, 0.75, 0.80};
    return multipliers;
}

std::vector<LabeledSeries> make_synthetic_corpus(std::size_t n_classes,
                                                 std::size_t clips_per_class,
                                                 std::uint64_t seed,
                                                 double noise_amplitude) {
    const auto& multipliers = corpus_multipliers();
    if (n_classes == 0 || n_classes > multipliers.size()) {
        throw InvalidArgument("n_classes must lie in [1, " +
                              std::to_string(multipliers.size()) + "]");
    }
    if (clips_per_class == 0) throw InvalidArgument("clips_per_class must be positive");
    if (noise_amplitude < 0.0) throw InvalidArgument("noise amplitude must be >= 0");

    constexpr int kLevels = 14;

    std::vector<LabeledSeries> corpus;
    corpus.reserve(n_classes * clips_per_class);
    std::size_t clip_counter = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
        CascadeSpec spec{kLevels, multipliers[k]};
        TimeSeries base = gen_binomial_cascade(spec);

        double mean = 0.0;
        for (double v : base.samples) mean += v;
        mean /= static_cast<double>(base.samples.size());
        double var = 0.0;
        for (double v : base.samples) var += (v - mean) * (v - mean);
        double sd = std::sqrt(var / static_cast<double>(base.samples.size()));

        for (std::size_t j = 0; j < clips_per_class; ++j) {
            LabeledSeries clip;
            clip.series = base;
            SplitMix64 rng(derive_seed(seed, k, j));
            for (double& v : clip.series.samples) {
                v += noise_amplitude * sd * rng.next_gaussian();
            }
            clip.label = "Speaker" + std::to_string(k + 1);
            std::ostringstream id;
            id << "c";
            id.width(3);
            id.fill('0');
            id << clip_counter++;
            clip.clip_id = id.str();
            clip.series.source_id = base.source_id + ",noise=" + format_double(noise_amplitude) +
                                    ",seed=" + std::to_string(derive_seed(seed, k, j));
            corpus.push_back(std::move(clip));
        }
    }
    return corpus;
}

}  // namespace mfspeak
