#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "mfspeak/classifier.hpp"
#include "mfspeak/errors.hpp"
#include "mfspeak/rng.hpp"
#include "support/oracles.hpp"

using namespace mfspeak;

namespace {

std::vector<LabeledPoint> two_far_clusters() {
    return {{{0.0, 0.0}, "a", "p0"}, {{0.1, -0.1}, "a", "p1"},
            {{10.0, 10.0}, "b", "p2"}, {{10.1, 9.9}, "b", "p3"}};
}

std::vector<LabeledPoint> grid_dataset(std::size_t classes, std::size_t per_class) {
    std::vector<LabeledPoint> data;
    SplitMix64 rng(31);
    for (std::size_t k = 0; k < classes; ++k) {
        for (std::size_t j = 0; j < per_class; ++j) {
            data.push_back({{static_cast<double>(k) * 3.0 + 0.2 * rng.next_gaussian(),
                             0.2 * rng.next_gaussian()},
                            "class" + std::to_string(k),
                            "c" + std::to_string(k) + "_" + std::to_string(j)});
        }
    }
    return data;
}

}  // namespace

TEST_CASE("rbf kernel: unit at zero distance, known value, gamma monotone") {
    std::vector<double> x{0.3, -0.7}, y{1.3, -0.7};
    CHECK(rbf_kernel(x, x, 2.5) == 1.0);
    CHECK(rbf_kernel({0.0, 0.0}, {1.0, 0.0}, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(rbf_kernel(x, y, 2.0) < rbf_kernel(x, y, 1.0));
    CHECK_THROWS_AS(rbf_kernel({1.0}, {1.0, 2.0}, 1.0), InvalidArgument);
}

TEST_CASE("stratified holdout: paper-shaped 5x20 split at ratio 1/4") {
    auto data = grid_dataset(5, 20);
    auto split = stratified_holdout(data, 0.25, 9);
    CHECK(split.train.size() == 75);
    CHECK(split.test.size() == 25);
    std::map<std::string, int> test_counts;
    for (const auto& p : split.test) test_counts[p.label] += 1;
    for (const auto& [label, count] : test_counts) CHECK(count == 5);

    // union = dataset, no overlap
    std::set<std::string> seen;
    for (const auto& p : split.train) seen.insert(p.clip_id);
    for (const auto& p : split.test) {
        CHECK(seen.count(p.clip_id) == 0);
        seen.insert(p.clip_id);
    }
    CHECK(seen.size() == data.size());
}

TEST_CASE("stratified holdout: smallest legal case and determinism") {
    auto data = grid_dataset(2, 2);
    auto split = stratified_holdout(data, 0.5, 3);
    CHECK(split.train.size() == 2);
    CHECK(split.test.size() == 2);

    auto again = stratified_holdout(data, 0.5, 3);
    for (std::size_t i = 0; i < split.test.size(); ++i) {
        CHECK(split.test[i].clip_id == again.test[i].clip_id);
    }
}

TEST_CASE("stratified holdout: degenerate requests are rejected") {
    auto data = grid_dataset(2, 4);
    CHECK_THROWS_AS(stratified_holdout(data, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(stratified_holdout(data, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(stratified_holdout(data, 0.05, 1), InvalidArgument);  // empty test side
    auto tiny = grid_dataset(1, 1);
    CHECK_THROWS_AS(stratified_holdout(tiny, 0.5, 1), InvalidArgument);
}

TEST_CASE("unstratified holdout: whole-set split keeps training classes nonempty") {
    auto data = grid_dataset(3, 8);
    auto split = stratified_holdout(data, 0.25, 7, false);
    CHECK(split.train.size() == 18);
    CHECK(split.test.size() == 6);
    std::set<std::string> train_labels;
    for (const auto& p : split.train) train_labels.insert(p.label);
    CHECK(train_labels.size() == 3);
}

TEST_CASE("train: separable far clusters are classified correctly") {
    auto data = two_far_clusters();
    auto model = train_svm(data, {});
    CHECK(model.converged);
    for (const auto& p : data) CHECK(predict(model, p.x) == p.label);
}

TEST_CASE("train: RBF separates the XOR layout") {
    std::vector<LabeledPoint> data{{{0.0, 0.0}, "a", "p0"}, {{1.0, 1.0}, "a", "p1"},
                                   {{0.0, 1.0}, "b", "p2"}, {{1.0, 0.0}, "b", "p3"}};
    SvmParams params;
    params.c = 10.0;
    params.gamma = 1.0;
    auto model = train_svm(data, params);
    for (const auto& p : data) CHECK(predict(model, p.x) == p.label);
}

TEST_CASE("train: dual variables satisfy the box and equality constraints") {
    SplitMix64 rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<LabeledPoint> data;
        for (int i = 0; i < 14; ++i) {
            data.push_back({{rng.next_gaussian(), rng.next_gaussian()},
                            i % 2 ? "x" : "y", "p" + std::to_string(i)});
        }
        SvmParams params;
        params.c = 2.0;
        params.gamma = 0.7;
        auto model = train_svm(data, params);
        for (const auto& m : model.machines) {
            double eq = 0.0;
            for (double coef : m.dual_coeffs) {
                CHECK(std::abs(coef) <= params.c + 1e-9);  // |alpha_i y_i| <= C
                eq += coef;                                 // sum alpha_i y_i
            }
            CHECK(std::abs(eq) <= 1e-6);
        }
    }
}

TEST_CASE("train: SMO reaches the exact dual optimum on tiny instances") {
    SplitMix64 rng(23);
    for (int rep = 0; rep < 12; ++rep) {
        std::size_t n = 4 + rng.next_u64() % 5;  // 4..8 points
        std::vector<LabeledPoint> data;
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> point{rng.next_gaussian(), rng.next_gaussian()};
            int label = rng.next_unit() < 0.5 ? +1 : -1;
            if (i == n - 2) label = +1;
            if (i == n - 1) label = -1;
            has_pos |= label > 0;
            has_neg |= label < 0;
            data.push_back({point, label > 0 ? "p" : "n", "i" + std::to_string(i)});
            x.push_back(point);
            y.push_back(label);
        }
        REQUIRE(has_pos);
        REQUIRE(has_neg);

        const double c = 1.5, gamma = 0.8;
        SvmParams params;
        params.c = c;
        params.gamma = gamma;
        params.tolerance = 1e-8;
        params.max_passes = 100000;
        auto model = train_svm(data, params);
        REQUIRE(model.machines.size() == 1);

        // reconstruct alpha in the standardized space the trainer used
        std::vector<std::vector<double>> z;
        for (const auto& p : data) {
            z.push_back({(p.x[0] - model.feature_mean[0]) / model.feature_std[0],
                         (p.x[1] - model.feature_mean[1]) / model.feature_std[1]});
        }
        // order: "n" class sorted before "p", but smo saw points in original
        // order; recover alpha per training point from the support vectors
        std::vector<double> alpha(n, 0.0);
        const auto& m = model.machines[0];
        for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                if (m.support_vectors[s] == z[i] && alpha[i] == 0.0) {
                    alpha[i] = std::abs(m.dual_coeffs[s]);
                    break;
                }
            }
        }
        // oracle on the same standardized coordinates; note class "n"
        // is classes[0] => y = +1 for "n" in the machine's convention
        std::vector<int> machine_y;
        for (const auto& p : data) machine_y.push_back(p.label == "n" ? +1 : -1);
        std::vector<std::vector<double>> kmat(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) kmat[i][j] = rbf_kernel(z[i], z[j], gamma);

        double ours = oracles::qp_dual_objective(kmat, machine_y, alpha);
        double best = oracles::qp_max_dual(kmat, machine_y, c);
        CHECK(ours >= best - 1e-6);
        CHECK(ours <= best + 1e-6);
    }
}

TEST_CASE("predict: two-class prediction is the sign of the decision function") {
    auto data = two_far_clusters();
    auto model = train_svm(data, {});
    REQUIRE(model.machines.size() == 1);
    const auto& m = model.machines[0];
    SplitMix64 rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x{20.0 * rng.next_unit() - 5.0, 20.0 * rng.next_unit() - 5.0};
        std::vector<double> z{(x[0] - model.feature_mean[0]) / model.feature_std[0],
                              (x[1] - model.feature_mean[1]) / model.feature_std[1]};
        double d = m.bias;
        for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
            d += m.dual_coeffs[i] * rbf_kernel(m.support_vectors[i], z, model.params.gamma);
        }
        std::string expected = d >= 0.0 ? model.classes[m.class_a] : model.classes[m.class_b];
        CHECK(predict(model, x) == expected);
    }
}

TEST_CASE("predict: invariant under common affine rescaling of raw features") {
    auto data = grid_dataset(3, 10);
    auto split = stratified_holdout(data, 0.3, 5);
    auto model = train_svm(split.train, {});

    auto scaled = [](const std::vector<LabeledPoint>& pts) {
        auto out = pts;
        for (auto& p : out)
            for (double& v : p.x) v = 10.0 * v + 3.0;
        return out;
    };
    auto model2 = train_svm(scaled(split.train), {});
    for (const auto& p : split.test) {
        auto q = p;
        for (double& v : q.x) v = 10.0 * v + 3.0;
        CHECK(predict(model2, q.x) == predict(model, p.x));
    }
}

TEST_CASE("evaluate: all-correct predictions give an identity-patterned matrix") {
    auto data = two_far_clusters();
    auto model = train_svm(data, {});
    auto cm = evaluate(model, data);
    CHECK(cm.accuracy() == 1.0);
    CHECK(cm.at(0, 0) + cm.at(1, 1) == cm.total);
}

TEST_CASE("confusion tally: hand-counted example") {
    auto cm = tally_confusion({"A", "A", "B"}, {"A", "B", "B"});
    CHECK(cm.total == 3);
    CHECK(cm.at(0, 0) == 1);  // (A, A)
    CHECK(cm.at(0, 1) == 1);  // (A, B)
    CHECK(cm.at(1, 1) == 1);  // (B, B)
    CHECK(cm.accuracy() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("confusion tally: reproduces the reporting arithmetic of the 25-sample fixture") {
    // 25 held-out samples, one Speaker4 clip predicted as Speaker2
    std::vector<std::string> actual, predicted;
    for (int i = 0; i < 5; ++i) { actual.push_back("Speaker1"); predicted.push_back("Speaker1"); }
    for (int i = 0; i < 4; ++i) { actual.push_back("Speaker2"); predicted.push_back("Speaker2"); }
    for (int i = 0; i < 5; ++i) { actual.push_back("Speaker3"); predicted.push_back("Speaker3"); }
    for (int i = 0; i < 5; ++i) { actual.push_back("Speaker4"); predicted.push_back("Speaker4"); }
    actual.push_back("Speaker4"); predicted.push_back("Speaker2");
    for (int i = 0; i < 5; ++i) { actual.push_back("Speaker5"); predicted.push_back("Speaker5"); }

    auto cm = tally_confusion(actual, predicted);
    CHECK(cm.total == 25);
    CHECK(cm.accuracy() == 24.0 / 25.0);  // 96%
    auto index = [&](const std::string& c) {
        for (std::size_t i = 0; i < cm.classes.size(); ++i)
            if (cm.classes[i] == c) return i;
        FAIL("class missing");
        return std::size_t{0};
    };
    CHECK(cm.precision(index("Speaker2")) == 4.0 / 5.0);  // 80%
    CHECK(cm.recall(index("Speaker4")) == 5.0 / 6.0);     // 83.3%
    CHECK(cm.recall(index("Speaker1")) == 1.0);
    CHECK(cm.precision(index("Speaker1")) == 1.0);
}

TEST_CASE("model persistence: bit-exact predictions after reload") {
    auto data = grid_dataset(3, 8);
    auto model = train_svm(data, {});
    std::ostringstream buf;
    save_model(buf, model);
    std::istringstream in(buf.str());
    auto loaded = load_model(in);

    CHECK(loaded.classes == model.classes);
    CHECK(loaded.params.gamma == model.params.gamma);
    SplitMix64 rng(59);
    for (int rep = 0; rep < 60; ++rep) {
        std::vector<double> x{9.0 * rng.next_unit(), 2.0 * rng.next_gaussian()};
        CHECK(predict(loaded, x) == predict(model, x));
    }

    // and the serialized form itself is stable
    std::ostringstream buf2;
    save_model(buf2, loaded);
    CHECK(buf2.str() == buf.str());
}

TEST_CASE("synthetic corpus: shape, determinism, and degenerate jitter") {
    auto corpus = make_synthetic_corpus(5, 20, 123);
    CHECK(corpus.size() == 100);
    CHECK(corpus.front().label == "Speaker1");
    CHECK(corpus.back().label == "Speaker5");
    CHECK(corpus.front().series.samples.size() == (std::size_t{1} << 14));

    auto again = make_synthetic_corpus(5, 20, 123);
    CHECK(again[37].series.samples == corpus[37].series.samples);

    auto frozen = make_synthetic_corpus(2, 3, 9, 0.0);
    CHECK(frozen[0].series.samples == frozen[1].series.samples);
    CHECK(frozen[0].series.samples == frozen[2].series.samples);
    CHECK(frozen[3].series.samples != frozen[0].series.samples);  // other class

    CHECK_THROWS_AS(make_synthetic_corpus(6, 20, 1), InvalidArgument);
    CHECK_THROWS_AS(make_synthetic_corpus(0, 20, 1), InvalidArgument);
}

TEST_CASE("train: gamma auto resolves on standardized features") {
    auto data = grid_dataset(2, 6);
    SvmParams params;
    params.gamma = 0.0;
    auto model = train_svm(data, params);
    // population-standardized features have unit variance per dimension
    CHECK(model.params.gamma == doctest::Approx(0.5).epsilon(1e-9));
}
