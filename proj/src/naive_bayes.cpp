#include <algorithm>
#include <cmath>
#include <set>

#include "focalize/classifiers.hpp"
#include "focalize/errors.hpp"

namespace focalize::baseline {

namespace {

std::vector<Label> unique_classes(const std::vector<Label>& labels) {
    std::set<Label> seen;
    for (Label l : labels) {
        if (l == Label::Invalid) throw DataError("Invalid label in training data");
        seen.insert(l);
    }
    return {seen.begin(), seen.end()};  // set order == enum order
}

}  // namespace

NaiveBayesModel nb_fit(const std::vector<FeatureVector>& vectors,
                       const std::vector<Label>& labels, std::size_t vocab_size,
                       double alpha_smooth) {
    if (vectors.empty() || labels.empty()) throw EmptyTrainingSet("nb_fit on empty training set");
    if (vectors.size() != labels.size()) throw LengthMismatch("vectors/labels size mismatch");
    if (vocab_size == 0) throw EmptyVocabulary("nb_fit with empty vocabulary");

    NaiveBayesModel model;
    model.alpha_smooth = alpha_smooth;
    model.classes = unique_classes(labels);
    const std::size_t k = model.classes.size();

    std::vector<double> class_docs(k, 0.0);
    std::vector<std::vector<double>> token_totals(k, std::vector<double>(vocab_size, 0.0));
    std::vector<double> class_mass(k, 0.0);

    auto class_index = [&](Label l) {
        return static_cast<std::size_t>(
            std::find(model.classes.begin(), model.classes.end(), l) - model.classes.begin());
    };

    for (std::size_t i = 0; i < vectors.size(); ++i) {
        std::size_t c = class_index(labels[i]);
        class_docs[c] += 1.0;
        for (const auto& [col, w] : vectors[i]) {
            token_totals[c][static_cast<std::size_t>(col)] += w;
            class_mass[c] += w;
        }
    }

    const double total_docs = static_cast<double>(vectors.size());
    model.log_prior.resize(k);
    model.log_likelihood.assign(k, std::vector<double>(vocab_size));
    for (std::size_t c = 0; c < k; ++c) {
        model.log_prior[c] = std::log(class_docs[c] / total_docs);
        const double denom = class_mass[c] + alpha_smooth * static_cast<double>(vocab_size);
        for (std::size_t t = 0; t < vocab_size; ++t) {
            model.log_likelihood[c][t] = std::log((token_totals[c][t] + alpha_smooth) / denom);
        }
    }
    return model;
}

std::pair<Label, std::map<Label, double>> nb_predict(const NaiveBayesModel& model,
                                                     const FeatureVector& vector) {
    const std::size_t k = model.classes.size();
    std::vector<double> scores(k);
    for (std::size_t c = 0; c < k; ++c) {
        double s = model.log_prior[c];
        for (const auto& [col, w] : vector) {
            s += w * model.log_likelihood[c][static_cast<std::size_t>(col)];
        }
        scores[c] = s;
    }
    // softmax over joint log scores gives the normalized posterior
    double max_score = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - max_score);

    std::map<Label, double> posterior;
    std::size_t best = 0;
    for (std::size_t c = 0; c < k; ++c) {
        posterior[model.classes[c]] = std::exp(scores[c] - max_score) / z;
        if (scores[c] > scores[best]) best = c;  // strict > keeps the lowest class on ties
    }
    return {model.classes[best], posterior};
}

}  // namespace focalize::baseline
