#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfspeak/errors.hpp"
#include "mfspeak/rng.hpp"
#include "mfspeak/spectrum_features.hpp"

using namespace mfspeak;

namespace {

SingularitySpectrum make_spec(std::vector<double> alpha, std::vector<double> f) {
    SingularitySpectrum s;
    s.alpha = std::move(alpha);
    s.f_alpha = std::move(f);
    s.q_of_point.resize(s.alpha.size(), 0.0);
    return s;
}

NormalizedSpectrum make_ns(std::vector<double> alpha, std::vector<double> mass) {
    NormalizedSpectrum ns;
    ns.alphas = std::move(alpha);
    ns.masses = std::move(mass);
    return ns;
}

}  // namespace

TEST_CASE("normalize: uniform and proportional masses") {
    auto u = normalize_spectrum(make_spec({0, 1, 2, 3}, {1, 1, 1, 1}));
    for (double m : u.masses) CHECK(m == doctest::Approx(0.25).epsilon(1e-15));

    auto p = normalize_spectrum(make_spec({0, 1, 2}, {0.5, 1.0, 0.5}));
    CHECK(p.masses[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p.masses[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.masses[2] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("normalize: negative f values are floored before scad") {
    auto ns = normalize_spectrum(make_spec({0, 1, 2}, {-0.2, 1.0, 1.0}));
    CHECK(ns.masses[0] == 0.0);
    CHECK(ns.masses[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ns.masses[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalize: all-nonpositive spectrum is rejected") {
    CHECK_THROWS_AS(normalize_spectrum(make_spec({0, 1, 2}, {-1.0, 0.0, -0.5})),
                    NormalizationError);
}

TEST_CASE("normalize: masses sum to one") {
    SplitMix64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> alpha, f;
        for (int i = 0; i < 17; ++i) {
            alpha.push_back(rng.next_gaussian());
            f.push_back(rng.next_gaussian() + 0.5);
        }
        NormalizedSpectrum ns;
        try {
            ns = normalize_spectrum(make_spec(alpha, f));
        } catch (const NormalizationError&) {
            continue;
        }
        double sum = 0.0;
        for (double m : ns.masses) {
            CHECK(m >= 0.0);
            sum += m;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 1; i < ns.alphas.size(); ++i) CHECK(ns.alphas[i] >= ns.alphas[i - 1]);
    }
}

TEST_CASE("median minus mode: hand-walked cumulative masses") {
    CHECK(feature_median_minus_mode(make_ns({0, 1, 2}, {0.6, 0.2, 0.2})) == 0.0);
    CHECK(feature_median_minus_mode(make_ns({0, 1, 2}, {0.2, 0.2, 0.6})) == 0.0);
    CHECK(feature_median_minus_mode(make_ns({0, 1, 2, 3}, {0.5, 0.1, 0.1, 0.3})) == 0.0);
    CHECK(feature_median_minus_mode(make_ns({0, 1, 2}, {0.3, 0.3, 0.4})) == -1.0);
}

TEST_CASE("median minus mode: symmetric unimodal distribution gives zero") {
    CHECK(feature_median_minus_mode(
              make_ns({-2, -1, 0, 1, 2}, {0.1, 0.2, 0.4, 0.2, 0.1})) == 0.0);
}

TEST_CASE("median minus mode: argmax ties break toward the smallest alpha") {
    CHECK(feature_median_minus_mode(make_ns({0, 1, 2, 3}, {0.3, 0.2, 0.2, 0.3})) ==
          doctest::Approx(1.0));  // median 1, mode 0
}

TEST_CASE("skewness: hand moment computation and mirror") {
    CHECK(feature_skewness(make_ns({0, 1}, {0.75, 0.25})) ==
          doctest::Approx(1.1547005383792517).epsilon(1e-12));
    CHECK(feature_skewness(make_ns({0, 1}, {0.25, 0.75})) ==
          doctest::Approx(-1.1547005383792517).epsilon(1e-12));
}

TEST_CASE("skewness: symmetric mass functions give zero") {
    CHECK(std::abs(feature_skewness(make_ns({-2, -1, 0, 1, 2},
                                            {0.15, 0.2, 0.3, 0.2, 0.15}))) <= 1e-12);
}

TEST_CASE("skewness: zero variance is an error") {
    CHECK_THROWS_AS(feature_skewness(make_ns({1.0}, {1.0})), InvalidArgument);
}

TEST_CASE("skewness: affine reparameterization invariance") {
    SplitMix64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> alpha, mass;
        double total = 0.0;
        for (int i = 0; i < 9; ++i) {
            alpha.push_back(static_cast<double>(i) + 0.3 * rng.next_gaussian());
            double m = rng.next_unit() + 0.05;
            mass.push_back(m);
            total += m;
        }
        for (double& m : mass) m /= total;
        double base = feature_skewness(make_ns(alpha, mass));

        double a = 0.5 + 2.0 * rng.next_unit();
        double b = rng.next_gaussian();
        std::vector<double> scaled;
        for (double v : alpha) scaled.push_back(a * v + b);
        CHECK(feature_skewness(make_ns(scaled, mass)) == doctest::Approx(base).epsilon(1e-9));

        std::vector<double> flipped;
        for (double v : alpha) flipped.push_back(-a * v + b);
        // reflection reverses the alpha order; masses must follow
        std::vector<double> rmass(mass.rbegin(), mass.rend());
        std::vector<double> rflipped(flipped.rbegin(), flipped.rend());
        CHECK(feature_skewness(make_ns(rflipped, rmass)) ==
              doctest::Approx(-base).epsilon(1e-9));
    }
}

TEST_CASE("median minus mode scales linearly under alpha -> a*alpha + b") {
    auto ns = make_ns({0, 1, 2}, {0.3, 0.3, 0.4});
    double base = feature_median_minus_mode(ns);
    auto scaled = make_ns({3, 5, 7}, {0.3, 0.3, 0.4});  // a = 2, b = 3
    CHECK(feature_median_minus_mode(scaled) == doctest::Approx(2.0 * base));
}

TEST_CASE("resample: values at a spectrum's own knots are unchanged") {
    std::vector<double> alpha, f;
    for (int i = 0; i <= 8; ++i) {
        alpha.push_back(i / 8.0);
        f.push_back(1.0 - (i / 8.0 - 0.4) * (i / 8.0 - 0.4));
    }
    auto spec = make_spec(alpha, f);
    auto grid = resample_to_common_grid({spec}, 9);  // grid lands on the knots
    REQUIRE(grid.size() == 1);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(grid[0][i] == doctest::Approx(f[i]).epsilon(1e-12));
    }
}

TEST_CASE("resample: identical spectra map to identical vectors") {
    auto spec = make_spec({0.0, 0.5, 1.0}, {0.2, 1.0, 0.3});
    auto grid = resample_to_common_grid({spec, spec}, 64);
    CHECK(grid[0] == grid[1]);
}

TEST_CASE("resample: zero outside a spectrum's own support") {
    auto narrow = make_spec({0.0, 0.5, 1.0}, {0.5, 1.0, 0.5});
    auto wide = make_spec({0.0, 1.0, 2.0}, {0.4, 1.0, 0.4});
    auto grid = resample_to_common_grid({narrow, wide}, 9);  // grid 0, 0.25, ..., 2
    for (std::size_t i = 0; i < 9; ++i) {
        double a = 2.0 * static_cast<double>(i) / 8.0;
        if (a > 1.0) CHECK(grid[0][i] == 0.0);
    }
    CHECK(grid[1][8] == doctest::Approx(0.4));
}

TEST_CASE("resample: degenerate union range is rejected") {
    auto point = make_spec({0.5, 0.5, 0.5}, {1.0, 1.0, 1.0});
    CHECK_THROWS_AS(resample_to_common_grid({point, point}, 16), InvalidArgument);
}

TEST_CASE("correlation matrix: self, affine, and reversal cases") {
    std::vector<double> v{1.0, 2.0, 3.0};
    std::vector<double> affine_up{5.0, 7.0, 9.0};    // 2v + 3
    std::vector<double> affine_down{-2.0, -4.0, -6.0};  // -2v
    std::vector<double> reversed{3.0, 2.0, 1.0};
    auto cm = cross_correlation_matrix({v, affine_up, affine_down, reversed});
    CHECK(cm.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cm.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cm.at(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(cm.at(0, 3) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("correlation matrix: zero-variance vector names the clip") {
    std::vector<double> flat{2.0, 2.0, 2.0};
    std::vector<double> v{1.0, 2.0, 3.0};
    try {
        cross_correlation_matrix({v, flat});
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("correlation matrix: symmetric, unit diagonal, entries bounded") {
    SplitMix64 rng(77);
    std::vector<std::vector<double>> vecs;
    for (int i = 0; i < 12; ++i) {
        std::vector<double> v;
        for (int j = 0; j < 40; ++j) v.push_back(rng.next_gaussian());
        vecs.push_back(std::move(v));
    }
    auto cm = cross_correlation_matrix(vecs);
    for (std::size_t i = 0; i < cm.n; ++i) {
        CHECK(cm.at(i, i) == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t j = 0; j < cm.n; ++j) {
            CHECK(std::abs(cm.at(i, j) - cm.at(j, i)) <= 1e-12);
            CHECK(std::abs(cm.at(i, j)) <= 1.0 + 1e-12);
        }
    }
}
