#include "mfspeak/mfdfa.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mfspeak/errors.hpp"

namespace mfspeak {

std::vector<double> default_q_grid() {
    std::vector<double> q;
    q.reserve(41);
    for (int i = -20; i <= 20; ++i) {
        q.push_back(i * 0.25);  // exact in binary, q = 0 lands exactly
    }
    return q;
}

namespace {

void validate_q_grid(const std::vector<double>& q) {
    if (q.empty()) throw InvalidArgument("q grid must not be empty");
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!std::isfinite(q[i])) throw InvalidArgument("q grid contains a non-finite value");
        if (i > 0 && !(q[i] > q[i - 1])) {
            throw InvalidArgument("q grid must be strictly increasing");
        }
    }
}

long pow2_at_most(long v) {
    long p = 1;
    while (p * 2 <= v) p *= 2;
    return p;
}

long pow2_at_least(long v) {
    long p = 1;
    while (p < v) p *= 2;
    return p;
}

}  // namespace

std::vector<long> resolve_scales(const MfdfaConfig& cfg, std::size_t n) {
    if (cfg.detrend_order < 0) throw InvalidArgument("detrend order must be >= 0");
    const long min_legal = cfg.detrend_order + 2;
    if (cfg.scale_min < min_legal) {
        throw InvalidArgument("scale_min must be at least detrend_order + 2 = " +
                              std::to_string(min_legal));
    }
    const long n_quarter = static_cast<long>(n / 4);

    std::vector<long> scales;
    if (cfg.scale_max == 0 && cfg.scale_count == 0) {
        // Automatic dyadic grid. The lower bound grows with n so the
        // small-scale detrending transient stays out of the log-log
        // fit on long inputs.
        long lo = std::max(cfg.scale_min, static_cast<long>(n / 2048));
        long smin = pow2_at_least(lo);
        long smax = pow2_at_most(n_quarter);
        for (long s = smin; s <= smax; s *= 2) scales.push_back(s);
    } else {
        long smax = cfg.scale_max == 0 ? n_quarter : cfg.scale_max;
        long count = cfg.scale_count == 0 ? 20 : cfg.scale_count;
        if (smax <= cfg.scale_min) {
            throw InvalidArgument("scale_max must exceed scale_min");
        }
        if (smax > n_quarter) {
            throw InvalidArgument("scale_max " + std::to_string(smax) +
                                  " exceeds n/4 = " + std::to_string(n_quarter));
        }
        if (count < 4) throw InvalidArgument("scale_count must be >= 4");
        const double la = std::log(static_cast<double>(cfg.scale_min));
        const double lb = std::log(static_cast<double>(smax));
        for (long i = 0; i < count; ++i) {
            double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            long s = std::lround(std::exp(la + t * (lb - la)));
            scales.push_back(s);
        }
        std::sort(scales.begin(), scales.end());
        scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    }

    if (scales.size() < 4) {
        throw InvalidArgument("scale grid resolves to fewer than 4 distinct scales for n = " +
                              std::to_string(n));
    }
    return scales;
}

Profile compute_profile(const TimeSeries& ts) {
    validate(ts);
    const std::size_t n = ts.samples.size();
    double mean = 0.0;
    for (double v : ts.samples) mean += v;
    mean /= static_cast<double>(n);

    Profile p;
    p.values.resize(n);
    double acc = 0.0;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += ts.samples[i] - mean;
        p.values[i] = acc;
        max_abs = std::max(max_abs, std::abs(ts.samples[i]));
    }
    // the cumulative sum of mean-removed samples telescopes to zero
    if (std::abs(acc) > 1e-9 * static_cast<double>(n) * std::max(1e-300, max_abs)) {
        throw Error("profile does not telescope to zero; input may be pathological");
    }
    return p;
}

namespace {

/// Orthonormal basis of the degree-m polynomial space on sample
/// indices 0..s-1 (centered and scaled columns, modified Gram-Schmidt
/// with one reorthogonalization pass). Shared by every window of one
/// scale; windows then only pay O(s * (m+1)) for projection.
std::vector<std::vector<double>> polynomial_basis(long s, int m) {
    const std::size_t len = static_cast<std::size_t>(s);
    const std::size_t cols = static_cast<std::size_t>(m) + 1;
    const double center = (static_cast<double>(s) - 1.0) / 2.0;
    const double half = std::max(1.0, center);

    std::vector<std::vector<double>> basis(cols, std::vector<double>(len));
    for (std::size_t i = 0; i < len; ++i) {
        double t = (static_cast<double>(i) - center) / half;
        double p = 1.0;
        for (std::size_t j = 0; j < cols; ++j) {
            basis[j][i] = p;
            p *= t;
        }
    }
    for (std::size_t j = 0; j < cols; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < len; ++i) dot += basis[k][i] * basis[j][i];
                for (std::size_t i = 0; i < len; ++i) basis[j][i] -= dot * basis[k][i];
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < len; ++i) norm += basis[j][i] * basis[j][i];
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) throw Error("degenerate polynomial basis");
        for (std::size_t i = 0; i < len; ++i) basis[j][i] /= norm;
    }
    return basis;
}

double window_f2(const double* y, long s,
                 const std::vector<std::vector<double>>& basis) {
    const std::size_t len = static_cast<std::size_t>(s);
    const std::size_t cols = basis.size();
    double coeff[8];
    for (std::size_t k = 0; k < cols; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < len; ++i) dot += basis[k][i] * y[i];
        coeff[k] = dot;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        double fitted = 0.0;
        for (std::size_t k = 0; k < cols; ++k) fitted += coeff[k] * basis[k][i];
        double r = y[i] - fitted;
        ss += r * r;
    }
    return ss / static_cast<double>(s);
}

}  // namespace

std::vector<double> local_fluctuations(const Profile& profile, long scale,
                                       int detrend_order, bool use_both_ends) {
    const std::size_t n = profile.values.size();
    if (detrend_order < 0 || detrend_order > 7) {
        throw InvalidArgument("detrend order must be in [0, 7]");
    }
    if (scale < detrend_order + 1) {
        throw InvalidArgument("scale " + std::to_string(scale) +
                              " cannot determine a degree-" +
                              std::to_string(detrend_order) + " fit");
    }
    if (static_cast<std::size_t>(scale) > n) {
        throw InvalidArgument("scale exceeds series length");
    }

    const std::size_t windows = n / static_cast<std::size_t>(scale);
    auto basis = polynomial_basis(scale, detrend_order);

    std::vector<double> f2;
    f2.reserve(use_both_ends ? 2 * windows : windows);
    for (std::size_t v = 0; v < windows; ++v) {
        f2.push_back(window_f2(profile.values.data() + v * static_cast<std::size_t>(scale),
                               scale, basis));
    }
    if (use_both_ends) {
        // the same number of windows again, counted from the tail, so
        // the remainder n mod s is covered too
        for (std::size_t v = 0; v < windows; ++v) {
            std::size_t start = n - (v + 1) * static_cast<std::size_t>(scale);
            f2.push_back(window_f2(profile.values.data() + start, scale, basis));
        }
    }
    return f2;
}

double fluctuation_function(const std::vector<double>& f2, double q,
                            long scale_for_error) {
    if (f2.empty()) throw InvalidArgument("no windows");
    const double nw = static_cast<double>(f2.size());

    if (q == 0.0) {
        double acc = 0.0;
        for (double v : f2) {
            if (!(v > 0.0)) {
                throw DegenerateWindowError(
                    scale_for_error, q,
                    "zero detrended variance at scale " + std::to_string(scale_for_error) +
                        ": log of zero in the q = 0 limit");
            }
            acc += std::log(v);
        }
        return std::exp(0.5 * acc / nw);
    }

    if (q < 0.0) {
        for (double v : f2) {
            if (!(v > 0.0)) {
                throw DegenerateWindowError(
                    scale_for_error, q,
                    "zero detrended variance at scale " + std::to_string(scale_for_error) +
                        ": division by zero for q = " + std::to_string(q));
            }
        }
    }

    double acc = 0.0;
    const double e = q / 2.0;
    for (double v : f2) acc += std::pow(v, e);
    return std::pow(acc / nw, 1.0 / q);
}

FluctuationTable fluctuation_table(const Profile& profile,
                                   const MfdfaConfig& cfg, std::size_t n) {
    validate_q_grid(cfg.q_grid);
    FluctuationTable table;
    table.scales = resolve_scales(cfg, n);
    table.q_grid = cfg.q_grid;
    table.values.assign(cfg.q_grid.size(),
                        std::vector<double>(table.scales.size(), 0.0));
    table.window_counts.resize(table.scales.size());

    for (std::size_t si = 0; si < table.scales.size(); ++si) {
        auto f2 = local_fluctuations(profile, table.scales[si], cfg.detrend_order,
                                     cfg.use_both_ends);
        table.window_counts[si] = f2.size();
        for (std::size_t qi = 0; qi < cfg.q_grid.size(); ++qi) {
            double f = fluctuation_function(f2, cfg.q_grid[qi], table.scales[si]);
            if (!std::isfinite(f) || !(f > 0.0)) {
                throw DegenerateWindowError(
                    table.scales[si], cfg.q_grid[qi],
                    "fluctuation function is not finite and positive at scale " +
                        std::to_string(table.scales[si]));
            }
            table.values[qi][si] = f;
        }
    }
    return table;
}

HurstCurve hurst_exponents(const FluctuationTable& table) {
    if (table.scales.size() < 4) {
        throw InvalidArgument("log-log regression needs at least 4 scales");
    }
    const std::size_t ns = table.scales.size();
    std::vector<double> lx(ns);
    for (std::size_t i = 0; i < ns; ++i) lx[i] = std::log(static_cast<double>(table.scales[i]));

    double mx = 0.0;
    for (double v : lx) mx += v;
    mx /= static_cast<double>(ns);
    double sxx = 0.0;
    for (double v : lx) sxx += (v - mx) * (v - mx);
    if (!(sxx > 0.0)) throw InvalidArgument("all scales equal; regression is singular");

    HurstCurve hc;
    hc.q_grid = table.q_grid;
    hc.h.resize(table.q_grid.size());
    hc.intercept.resize(table.q_grid.size());
    hc.r2.resize(table.q_grid.size());

    std::vector<double> ly(ns);
    for (std::size_t qi = 0; qi < table.q_grid.size(); ++qi) {
        double my = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            ly[i] = std::log(table.values[qi][i]);
            my += ly[i];
        }
        my /= static_cast<double>(ns);
        double sxy = 0.0;
        for (std::size_t i = 0; i < ns; ++i) sxy += (lx[i] - mx) * (ly[i] - my);
        double slope = sxy / sxx;
        double icept = my - slope * mx;

        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            double pred = icept + slope * lx[i];
            ss_res += (ly[i] - pred) * (ly[i] - pred);
            ss_tot += (ly[i] - my) * (ly[i] - my);
        }
        hc.h[qi] = slope;
        hc.intercept[qi] = icept;
        hc.r2[qi] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        if (!std::isfinite(hc.h[qi])) {
            throw Error("non-finite Hurst exponent at q = " + std::to_string(table.q_grid[qi]));
        }
    }
    return hc;
}

std::vector<std::pair<double, double>> scaling_exponents(const HurstCurve& hc) {
    std::vector<std::pair<double, double>> tau;
    tau.reserve(hc.q_grid.size());
    for (std::size_t i = 0; i < hc.q_grid.size(); ++i) {
        tau.emplace_back(hc.q_grid[i], hc.q_grid[i] * hc.h[i] - 1.0);
    }
    return tau;
}

SingularitySpectrum singularity_spectrum(const HurstCurve& hc) {
    const std::size_t n = hc.q_grid.size();
    if (n < 3) throw InvalidArgument("h'(q) estimation needs at least 3 q values");

    SingularitySpectrum spec;
    spec.q_of_point = hc.q_grid;
    spec.alpha.resize(n);
    spec.f_alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dh;
        if (i == 0) {
            dh = (hc.h[1] - hc.h[0]) / (hc.q_grid[1] - hc.q_grid[0]);
        } else if (i == n - 1) {
            dh = (hc.h[n - 1] - hc.h[n - 2]) / (hc.q_grid[n - 1] - hc.q_grid[n - 2]);
        } else {
            dh = (hc.h[i + 1] - hc.h[i - 1]) / (hc.q_grid[i + 1] - hc.q_grid[i - 1]);
        }
        double q = hc.q_grid[i];
        spec.alpha[i] = hc.h[i] + q * dh;
        spec.f_alpha[i] = q * (spec.alpha[i] - hc.h[i]) + 1.0;
    }
    return spec;
}

namespace {

/// 3x3 linear solve, Gaussian elimination with partial pivoting.
void solve3(double m[3][3], double rhs[3], double out[3]) {
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[idx[r]][col]) > std::abs(m[idx[piv]][col])) piv = r;
        }
        std::swap(idx[col], idx[piv]);
        double d = m[idx[col]][col];
        if (d == 0.0) throw Error("singular quadratic fit system");
        for (int r = col + 1; r < 3; ++r) {
            double factor = m[idx[r]][col] / d;
            for (int c = col; c < 3; ++c) m[idx[r]][c] -= factor * m[idx[col]][c];
            rhs[idx[r]] -= factor * rhs[idx[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double acc = rhs[idx[col]];
        for (int c = col + 1; c < 3; ++c) acc -= m[idx[col]][c] * out[c];
        out[col] = acc / m[idx[col]][col];
    }
}

}  // namespace

QuadraticFit fit_spectrum(const SingularitySpectrum& spec) {
    const std::size_t n = spec.alpha.size();
    if (n < 3) throw InvalidArgument("quadratic fit needs at least 3 spectrum points");

    std::size_t peak = 0;
    double alpha_lo = spec.alpha[0], alpha_hi = spec.alpha[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(spec.alpha[i]) || !std::isfinite(spec.f_alpha[i])) {
            throw InvalidArgument("spectrum contains non-finite points");
        }
        if (spec.f_alpha[i] > spec.f_alpha[peak]) peak = i;
        alpha_lo = std::min(alpha_lo, spec.alpha[i]);
        alpha_hi = std::max(alpha_hi, spec.alpha[i]);
    }

    QuadraticFit fit;
    fit.alpha0 = spec.alpha[peak];
    fit.endpoint_width = alpha_hi - alpha_lo;

    // exact monofractal collapse: every point at one alpha, width zero
    if (fit.endpoint_width <= 1e-9 * std::max(1.0, std::abs(fit.alpha0))) {
        fit.c = spec.f_alpha[peak];
        return fit;
    }

    double su4 = 0, su3 = 0, su2 = 0, su1 = 0;
    double sfu2 = 0, sfu1 = 0, sf = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double u = spec.alpha[i] - fit.alpha0;
        double u2 = u * u;
        su4 += u2 * u2;
        su3 += u2 * u;
        su2 += u2;
        su1 += u;
        sfu2 += spec.f_alpha[i] * u2;
        sfu1 += spec.f_alpha[i] * u;
        sf += spec.f_alpha[i];
    }
    double m[3][3] = {{su4, su3, su2}, {su3, su2, su1}, {su2, su1, static_cast<double>(n)}};
    double rhs[3] = {sfu2, sfu1, sf};
    double sol[3];
    solve3(m, rhs, sol);
    fit.a = sol[0];
    fit.b = sol[1];
    fit.c = sol[2];

    if (fit.a >= 0.0) {
        throw WidthUndefinedError(fit.a, fit.b, fit.c,
                                  "quadratic fit is not concave (A >= 0)");
    }
    double disc = fit.b * fit.b - 4.0 * fit.a * fit.c;
    if (disc < 0.0) {
        throw WidthUndefinedError(fit.a, fit.b, fit.c,
                                  "fitted parabola has no real zero crossings");
    }
    fit.width = std::sqrt(disc) / std::abs(fit.a);
    return fit;
}

MfdfaResult run_mfdfa(const TimeSeries& ts, const MfdfaConfig& cfg) {
    validate(ts);
    if (ts.samples.size() < 4 * static_cast<std::size_t>(cfg.scale_min)) {
        throw InvalidArgument("series length must be at least 4 * scale_min");
    }

    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw StageError(name, e.what());
        }
    };

    MfdfaResult result;
    Profile profile = stage("profile", [&] { return compute_profile(ts); });
    result.table = stage("fluctuations",
                         [&] { return fluctuation_table(profile, cfg, ts.samples.size()); });
    result.hurst = stage("hurst", [&] { return hurst_exponents(result.table); });
    result.spectrum = stage("spectrum", [&] { return singularity_spectrum(result.hurst); });
    result.fit = stage("fit", [&] { return fit_spectrum(result.spectrum); });
    return result;
}

}  // namespace mfspeak
