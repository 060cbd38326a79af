#include "mfspeak/spectrum_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfspeak/errors.hpp"

namespace mfspeak {

NormalizedSpectrum normalize_spectrum(const SingularitySpectrum& spec) {
    const std::size_t n = spec.alpha.size();
    if (n == 0) throw InvalidArgument("empty spectrum");

    // sort by alpha; stable so ties keep q order
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return spec.alpha[i] < spec.alpha[j];
    });

    NormalizedSpectrum ns;
    ns.alphas.resize(n);
    ns.masses.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ns.alphas[i] = spec.alpha[order[i]];
        // negative f values are finite-difference noise, not mass
        double f = std::max(0.0, spec.f_alpha[order[i]]);
        ns.masses[i] = f;
        total += f;
    }
    if (!(total > 0.0)) {
        throw NormalizationError("no positive f(alpha) values; normalization undefined");
    }
    for (double& m : ns.masses) m /= total;
    return ns;
}

double feature_median_minus_mode(const NormalizedSpectrum& ns) {
    if (ns.alphas.empty()) throw InvalidArgument("empty normalized spectrum");

    double cum = 0.0;
    double median = ns.alphas.back();
    for (std::size_t i = 0; i < ns.alphas.size(); ++i) {
        cum += ns.masses[i];
        if (cum >= 0.5) {
            median = ns.alphas[i];
            break;
        }
    }
    // ties break toward the smallest alpha (strict > keeps the first max)
    std::size_t mode = 0;
    for (std::size_t i = 1; i < ns.masses.size(); ++i) {
        if (ns.masses[i] > ns.masses[mode]) mode = i;
    }
    return median - ns.alphas[mode];
}

double feature_skewness(const NormalizedSpectrum& ns) {
    if (ns.alphas.empty()) throw InvalidArgument("empty normalized spectrum");
    double mu = 0.0;
    for (std::size_t i = 0; i < ns.alphas.size(); ++i) mu += ns.alphas[i] * ns.masses[i];
    double var = 0.0;
    for (std::size_t i = 0; i < ns.alphas.size(); ++i) {
        double d = ns.alphas[i] - mu;
        var += d * d * ns.masses[i];
    }
    double sigma = std::sqrt(var);
    if (!(sigma > 0.0)) {
        throw InvalidArgument("skewness undefined: zero variance (single-point spectrum)");
    }
    double skew = 0.0;
    for (std::size_t i = 0; i < ns.alphas.size(); ++i) {
        double z = (ns.alphas[i] - mu) / sigma;
        skew += z * z * z * ns.masses[i];
    }
    return skew;
}

namespace {

/// One spectrum prepared for interpolation: knots sorted by alpha,
/// exact duplicates merged by averaging f.
struct Knots {
    std::vector<double> alpha;
    std::vector<double> f;
};

Knots make_knots(const SingularitySpectrum& spec) {
    const std::size_t n = spec.alpha.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return spec.alpha[i] < spec.alpha[j];
    });
    Knots k;
    for (std::size_t idx : order) {
        double a = spec.alpha[idx];
        double f = spec.f_alpha[idx];
        if (!k.alpha.empty() && a == k.alpha.back()) {
            // merge duplicate knot
            std::size_t last = k.alpha.size() - 1;
            k.f[last] = 0.5 * (k.f[last] + f);
        } else {
            k.alpha.push_back(a);
            k.f.push_back(f);
        }
    }
    return k;
}

double interp_at(const Knots& k, double a) {
    if (a < k.alpha.front() || a > k.alpha.back()) return 0.0;  // outside support
    auto it = std::lower_bound(k.alpha.begin(), k.alpha.end(), a);
    std::size_t j = static_cast<std::size_t>(it - k.alpha.begin());
    if (j < k.alpha.size() && k.alpha[j] == a) return k.f[j];
    double x0 = k.alpha[j - 1], x1 = k.alpha[j];
    double t = (a - x0) / (x1 - x0);
    return k.f[j - 1] + t * (k.f[j] - k.f[j - 1]);
}

}  // namespace

std::vector<std::vector<double>> resample_to_common_grid(
    const std::vector<SingularitySpectrum>& specs, std::size_t grid_size) {
    if (specs.empty()) throw InvalidArgument("no spectra to resample");
    if (grid_size < 8) throw InvalidArgument("grid size must be >= 8");
    for (const auto& s : specs) {
        if (s.alpha.size() < 3) throw InvalidArgument("every spectrum needs >= 3 points");
    }

    double lo = specs[0].alpha[0], hi = specs[0].alpha[0];
    for (const auto& s : specs) {
        for (double a : s.alpha) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    }
    if (!(hi > lo)) throw InvalidArgument("degenerate alpha range across spectra");

    std::vector<std::vector<double>> out;
    out.reserve(specs.size());
    for (const auto& s : specs) {
        Knots k = make_knots(s);
        std::vector<double> v(grid_size);
        for (std::size_t i = 0; i < grid_size; ++i) {
            double a = lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(grid_size - 1);
            v[i] = interp_at(k, a);
        }
        out.push_back(std::move(v));
    }
    return out;
}

CorrelationMatrix cross_correlation_matrix(
    const std::vector<std::vector<double>>& aligned) {
    const std::size_t n = aligned.size();
    if (n < 2) throw InvalidArgument("correlation matrix needs at least 2 vectors");
    const std::size_t len = aligned[0].size();
    for (const auto& v : aligned) {
        if (v.size() != len) throw InvalidArgument("aligned vectors differ in length");
    }

    // center and normalize each vector once; entries are then dot products
    std::vector<std::vector<double>> z(n, std::vector<double>(len));
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (double v : aligned[i]) mean += v;
        mean /= static_cast<double>(len);
        double ss = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            z[i][j] = aligned[i][j] - mean;
            ss += z[i][j] * z[i][j];
        }
        if (!(ss > 0.0)) {
            throw InvalidArgument("vector " + std::to_string(i) +
                                  " has zero variance; Pearson correlation undefined");
        }
        double inv = 1.0 / std::sqrt(ss);
        for (double& v : z[i]) v *= inv;
    }

    CorrelationMatrix cm;
    cm.n = n;
    cm.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cm.values[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < len; ++t) dot += z[i][t] * z[j][t];
            cm.values[i * n + j] = dot;
            cm.values[j * n + i] = dot;
        }
    }
    return cm;
}

}  // namespace mfspeak
