#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "focalize/classifiers.hpp"
#include "focalize/errors.hpp"
#include "focalize/features.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace focalize;
using annotation::Label;
using baseline::FeatureVector;
using baseline::Weighting;

namespace {

FeatureVector from_counts(const std::map<int, long>& counts) {
    FeatureVector v;
    for (const auto& [col, n] : counts) v[col] = static_cast<double>(n);
    return v;
}

// Posterior from the library on count vectors, aligned with the oracle's
// class indexing (0..k-1 in the model's own class order).
std::vector<double> nb_library_posterior(const std::vector<std::map<int, long>>& docs,
                                         const std::vector<int>& labels, int n_classes,
                                         std::size_t vocab_size, double alpha,
                                         const std::map<int, long>& test_doc) {
    std::vector<FeatureVector> vectors;
    std::vector<Label> ls;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        vectors.push_back(from_counts(docs[i]));
        ls.push_back(static_cast<Label>(labels[i]));
    }
    auto model = baseline::nb_fit(vectors, ls, vocab_size, alpha);
    auto [pred, posterior] = baseline::nb_predict(model, from_counts(test_doc));
    std::vector<double> out(static_cast<std::size_t>(n_classes), 0.0);
    for (const auto& [label, p] : posterior) out[static_cast<std::size_t>(label)] = p;
    return out;
}

}  // namespace

TEST_CASE("naive bayes posterior equals direct product arithmetic") {
    // 3 docs over vocab {0,1,2}, classes 0/1; worked by the defining formula
    std::vector<std::map<int, long>> docs = {{{0, 2}, {1, 1}}, {{0, 1}, {2, 3}}, {{1, 2}}};
    std::vector<int> labels = {0, 1, 1};
    std::map<int, long> test_doc = {{0, 1}, {1, 1}};

    auto expected = oracles::nb_posterior_direct(docs, labels, 2, 3, 1.0, test_doc);
    auto actual = nb_library_posterior(docs, labels, 2, 3, 1.0, test_doc);
    REQUIRE(expected.size() == actual.size());
    for (std::size_t c = 0; c < expected.size(); ++c) {
        CHECK(actual[c] == doctest::Approx(expected[c]).epsilon(1e-12));
    }

    SUBCASE("other smoothing strengths") {
        for (double alpha : {0.5, 2.0}) {
            auto e = oracles::nb_posterior_direct(docs, labels, 2, 3, alpha, test_doc);
            auto a = nb_library_posterior(docs, labels, 2, 3, alpha, test_doc);
            for (std::size_t c = 0; c < e.size(); ++c) {
                CHECK(a[c] == doctest::Approx(e[c]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("empty test document falls back to the priors") {
        auto e = oracles::nb_posterior_direct(docs, labels, 2, 3, 1.0, {});
        auto a = nb_library_posterior(docs, labels, 2, 3, 1.0, {});
        CHECK(a[0] == doctest::Approx(e[0]).epsilon(1e-12));
        CHECK(e[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));  // 1 of 3 training docs
    }
}

TEST_CASE("naive bayes posterior sums to 1 and ties break to the lowest class") {
    // perfectly symmetric classes: posterior is exactly 1/2 each way
    std::vector<FeatureVector> vectors = {from_counts({{0, 1}}), from_counts({{1, 1}})};
    std::vector<Label> labels = {Label::Internal, Label::External};
    auto model = baseline::nb_fit(vectors, labels, 2, 1.0);
    auto [pred, posterior] = baseline::nb_predict(model, from_counts({{0, 1}, {1, 1}}));
    CHECK(pred == Label::Internal);  // tie goes to the lowest enum value
    CHECK(posterior.at(Label::Internal) == doctest::Approx(0.5).epsilon(1e-12));
    double total = 0.0;
    for (const auto& [l, p] : posterior) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("naive bayes training-input validation") {
    std::vector<FeatureVector> one = {from_counts({{0, 1}})};
    CHECK_THROWS_AS(baseline::nb_fit({}, {}, 2), EmptyTrainingSet);
    CHECK_THROWS_AS(baseline::nb_fit(one, {Label::Zero, Label::Zero}, 2), LengthMismatch);
    CHECK_THROWS_AS(baseline::nb_fit(one, {Label::Zero}, 0), EmptyVocabulary);
    CHECK_THROWS_AS(baseline::nb_fit(one, {Label::Invalid}, 2), DataError);
}

namespace {

struct SeparableFixture {
    std::vector<std::string> texts;
    std::vector<Label> labels;
};

SeparableFixture separable() {
    SeparableFixture f;
    f.texts = {"thought felt wondered knew",  "felt knew realized thought",
               "walked door street watched",  "watched street door walked twice",
               "meanwhile everyone fate city", "fate everyone meanwhile destiny"};
    f.labels = {Label::Internal, Label::Internal, Label::External,
                Label::External, Label::Zero,     Label::Zero};
    return f;
}

}  // namespace

TEST_CASE("logistic regression fits a separable corpus to 100% train accuracy") {
    auto fixture = separable();
    auto config = baseline::fit_vectorizer(fixture.texts, Weighting::Count, 1);
    std::vector<FeatureVector> X;
    for (const auto& t : fixture.texts) X.push_back(baseline::vectorize(t, config));

    auto model = baseline::logreg_fit(X, fixture.labels, config.vocab_size(), 1e-3, 1e-8, 2000);
    CHECK(model.converged);
    CHECK(model.iterations > 0);

    for (std::size_t i = 0; i < X.size(); ++i) {
        auto [pred, posterior] = baseline::logreg_predict(model, X[i]);
        CHECK(pred == fixture.labels[i]);
        double total = 0.0;
        for (const auto& [l, p] : posterior) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("logreg analytic gradient matches central finite differences") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-0.7, 0.7);

    const std::size_t k = 3, v = 4;
    std::vector<FeatureVector> X = {from_counts({{0, 2}, {1, 1}}), from_counts({{2, 1}, {3, 2}}),
                                    from_counts({{1, 1}, {2, 1}}), from_counts({{0, 1}, {3, 1}})};
    std::vector<int> y = {0, 1, 2, 1};
    const double lambda = 0.37;

    std::vector<std::vector<double>> w(k, std::vector<double>(v));
    std::vector<double> b(k);
    for (auto& row : w) {
        for (auto& x : row) x = coef(rng);
    }
    for (auto& x : b) x = coef(rng);

    double loss;
    std::vector<std::vector<double>> gw;
    std::vector<double> gb;
    baseline::logreg_loss_grad(w, b, X, y, lambda, loss, gw, gb);
    CHECK(loss == doctest::Approx(baseline::logreg_loss(w, b, X, y, lambda)).epsilon(1e-12));

    auto eval = [&] { return baseline::logreg_loss(w, b, X, y, lambda); };
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t t = 0; t < v; ++t) {
            double fd = oracles::finite_difference(eval, w[c][t]);
            double rel = std::abs(fd - gw[c][t]) / std::max(1.0, std::abs(gw[c][t]));
            CHECK(rel < 1e-5);
        }
        double fd_b = oracles::finite_difference(eval, b[c]);
        double rel_b = std::abs(fd_b - gb[c]) / std::max(1.0, std::abs(gb[c]));
        CHECK(rel_b < 1e-5);
    }
}

TEST_CASE("stronger L2 regularization shrinks the weights") {
    auto fixture = separable();
    auto config = baseline::fit_vectorizer(fixture.texts, Weighting::Count, 1);
    std::vector<FeatureVector> X;
    for (const auto& t : fixture.texts) X.push_back(baseline::vectorize(t, config));

    auto norm = [](const baseline::LogRegModel& m) {
        double s = 0.0;
        for (const auto& row : m.weights) {
            for (double x : row) s += x * x;
        }
        return s;
    };
    auto loose = baseline::logreg_fit(X, fixture.labels, config.vocab_size(), 0.01, 1e-8, 2000);
    auto tight = baseline::logreg_fit(X, fixture.labels, config.vocab_size(), 10.0, 1e-8, 2000);
    CHECK(norm(tight) < norm(loose));
}

TEST_CASE("logreg training-input validation") {
    std::vector<FeatureVector> one = {from_counts({{0, 1}})};
    CHECK_THROWS_AS(baseline::logreg_fit({}, {}, 2), EmptyTrainingSet);
    CHECK_THROWS_AS(baseline::logreg_fit(one, {Label::Zero, Label::Zero}, 2), LengthMismatch);
    CHECK_THROWS_AS(baseline::logreg_fit(one, {Label::Zero}, 1), SingleClassTraining);
    std::vector<FeatureVector> two = {from_counts({{0, 1}}), from_counts({{1, 1}})};
    CHECK_THROWS_AS(baseline::logreg_fit(two, {Label::Invalid, Label::Zero}, 2), DataError);
}

TEST_CASE("trained baselines round-trip through the model file") {
    auto fixture = separable();
    testutil::TempDir tmp;

    for (const std::string kind : {"naive_bayes", "logistic_regression"}) {
        CAPTURE(kind);
        baseline::TrainedBaseline model;
        model.features = baseline::fit_vectorizer(fixture.texts, Weighting::TfIdf, 2);
        model.kind = kind;
        std::vector<FeatureVector> X;
        for (const auto& t : fixture.texts) X.push_back(baseline::vectorize(t, model.features));
        if (kind == "naive_bayes") {
            model.nb = baseline::nb_fit(X, fixture.labels, model.features.vocab_size());
        } else {
            model.logreg =
                baseline::logreg_fit(X, fixture.labels, model.features.vocab_size(), 0.01);
        }

        auto path = tmp.file(kind + ".json");
        baseline::save_baseline(path, model);
        auto loaded = baseline::load_baseline(path);
        CHECK(loaded.kind == kind);
        CHECK(loaded.features.vocab_size() == model.features.vocab_size());

        for (const auto& text : fixture.texts) {
            auto [p1, post1] = model.predict(text);
            auto [p2, post2] = loaded.predict(text);
            CHECK(p1 == p2);
            for (const auto& [l, p] : post1) {
                CHECK(post2.at(l) == doctest::Approx(p).epsilon(1e-12));
            }
        }
    }

    CHECK_THROWS_AS(baseline::load_baseline(tmp.file("missing.json")), DataError);
    testutil::write_text(tmp.file("garbage.json"), "not json");
    CHECK_THROWS_AS(baseline::load_baseline(tmp.file("garbage.json")), SchemaError);
}
