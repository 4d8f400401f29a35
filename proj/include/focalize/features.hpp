#pragma once

#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace focalize::baseline {

enum class Weighting { Count, TfIdf };

std::string weighting_name(Weighting w);
Weighting weighting_from_name(std::string_view name);

/// Lowercased maximal runs of >=2 ASCII alphanumerics; single-character
/// words are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Contiguous n-grams for n = 1..ngram_max, joined with a single space.
std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int ngram_max);

/// Vectorizer state fit on training data only. Vocabulary indices are dense
/// 0..V-1 assigned in sorted n-gram order; idf is populated for TfIdf.
struct FeatureConfig {
    Weighting weighting = Weighting::Count;
    int ngram_min = 1;
    int ngram_max = 1;
    std::unordered_map<std::string, int> vocabulary;
    std::vector<double> idf;

    std::size_t vocab_size() const { return vocabulary.size(); }
};

/// Sparse column -> weight map. TfIdf vectors are L2-normalized unless all-zero.
using FeatureVector = std::map<int, double>;

/// Throws EmptyVocabulary when no n-grams come out of the training set.
/// idf(t) = ln((1+N)/(1+df(t))) + 1.
FeatureConfig fit_vectorizer(const std::vector<std::string>& train_texts, Weighting weighting,
                             int ngram_max);

/// Unseen n-grams are ignored at predict time.
FeatureVector vectorize(std::string_view text, const FeatureConfig& config);

}  // namespace focalize::baseline
