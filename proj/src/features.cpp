#include "focalize/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "focalize/errors.hpp"
#include "focalize/util.hpp"

namespace focalize::baseline {

std::string weighting_name(Weighting w) {
    return w == Weighting::Count ? "count" : "tfidf";
}

Weighting weighting_from_name(std::string_view name) {
    if (name == "count") return Weighting::Count;
    if (name == "tfidf" || name == "tf-idf") return Weighting::TfIdf;
    throw DataError("unknown weighting: " + std::string(name));
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (util::is_ascii_alnum(c)) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            current.push_back(c);
        } else if (!current.empty()) {
            if (current.size() >= 2) tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (current.size() >= 2) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int ngram_max) {
    if (ngram_max < 1 || ngram_max > 3) throw DataError("ngram_max must be in {1,2,3}");
    std::vector<std::string> ngrams;
    for (int n = 1; n <= ngram_max; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (int k = 1; k < n; ++k) {
                gram += ' ';
                gram += tokens[i + k];
            }
            ngrams.push_back(std::move(gram));
        }
    }
    return ngrams;
}

FeatureConfig fit_vectorizer(const std::vector<std::string>& train_texts, Weighting weighting,
                             int ngram_max) {
    if (train_texts.empty()) throw EmptyTrainingSet("vectorizer needs a non-empty training set");

    std::set<std::string> vocab_sorted;
    std::vector<std::set<std::string>> doc_grams(train_texts.size());
    for (std::size_t d = 0; d < train_texts.size(); ++d) {
        for (auto& gram : extract_ngrams(tokenize(train_texts[d]), ngram_max)) {
            doc_grams[d].insert(gram);
            vocab_sorted.insert(std::move(gram));
        }
    }
    if (vocab_sorted.empty()) throw EmptyVocabulary("training set produced no n-grams");

    FeatureConfig config;
    config.weighting = weighting;
    config.ngram_max = ngram_max;
    int index = 0;
    for (const auto& gram : vocab_sorted) config.vocabulary.emplace(gram, index++);

    if (weighting == Weighting::TfIdf) {
        std::vector<std::size_t> df(config.vocabulary.size(), 0);
        for (const auto& grams : doc_grams) {
            for (const auto& gram : grams) ++df[config.vocabulary.at(gram)];
        }
        const double n_docs = static_cast<double>(train_texts.size());
        config.idf.resize(df.size());
        for (std::size_t i = 0; i < df.size(); ++i) {
            config.idf[i] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[i]))) + 1.0;
        }
    }
    return config;
}

FeatureVector vectorize(std::string_view text, const FeatureConfig& config) {
    FeatureVector vec;
    for (const auto& gram : extract_ngrams(tokenize(text), config.ngram_max)) {
        auto it = config.vocabulary.find(gram);
        if (it != config.vocabulary.end()) vec[it->second] += 1.0;
    }
    if (config.weighting == Weighting::TfIdf) {
        double norm_sq = 0.0;
        for (auto& [col, w] : vec) {
            w *= config.idf[static_cast<std::size_t>(col)];
            norm_sq += w * w;
        }
        if (norm_sq > 0.0) {
            double inv = 1.0 / std::sqrt(norm_sq);
            for (auto& [col, w] : vec) w *= inv;
        }
    }
    return vec;
}

}  // namespace focalize::baseline
