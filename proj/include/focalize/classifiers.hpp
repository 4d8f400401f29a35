#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "focalize/annotation.hpp"
#include "focalize/features.hpp"

namespace focalize::baseline {

using annotation::Label;

/// Multinomial Naive Bayes with Laplace smoothing. Per-class likelihoods
/// over the vocabulary exponentiate and sum to 1.
struct NaiveBayesModel {
    std::vector<Label> classes;  // unique training classes, ascending enum order
    std::vector<double> log_prior;
    std::vector<std::vector<double>> log_likelihood;  // classes x V
    double alpha_smooth = 1.0;
};

NaiveBayesModel nb_fit(const std::vector<FeatureVector>& vectors,
                       const std::vector<Label>& labels, std::size_t vocab_size,
                       double alpha_smooth = 1.0);

/// Argmax over log prior + sum count*log-likelihood; ties go to the lowest
/// class in Internal < External < Zero order. Posterior map sums to 1.
std::pair<Label, std::map<Label, double>> nb_predict(const NaiveBayesModel& model,
                                                     const FeatureVector& vector);

/// Multinomial logistic regression minimizing
///   sum_i cross_entropy_i + (lambda/2) * ||W||^2
/// (biases unregularized), L-BFGS from zero init. `converged` is false when
/// the gradient-norm tolerance was not reached within max_iter; the model is
/// still returned.
struct LogRegModel {
    std::vector<Label> classes;
    std::vector<std::vector<double>> weights;  // classes x V
    std::vector<double> bias;
    double lambda = 1.0;
    bool converged = false;
    int iterations = 0;
    double final_loss = 0.0;
};

LogRegModel logreg_fit(const std::vector<FeatureVector>& vectors,
                       const std::vector<Label>& labels, std::size_t vocab_size,
                       double lambda = 1.0, double tol = 1e-6, int max_iter = 1000);

std::pair<Label, std::map<Label, double>> logreg_predict(const LogRegModel& model,
                                                         const FeatureVector& vector);

/// Loss and gradient at explicit parameters, for optimizer-independent
/// checks (finite differences). y holds class indices into 0..n_classes-1.
double logreg_loss(const std::vector<std::vector<double>>& weights,
                   const std::vector<double>& bias, const std::vector<FeatureVector>& X,
                   const std::vector<int>& y, double lambda);
void logreg_loss_grad(const std::vector<std::vector<double>>& weights,
                      const std::vector<double>& bias, const std::vector<FeatureVector>& X,
                      const std::vector<int>& y, double lambda, double& loss,
                      std::vector<std::vector<double>>& grad_w, std::vector<double>& grad_b);

/// A fit vectorizer plus one classifier, as saved by `train-baseline`.
struct TrainedBaseline {
    FeatureConfig features;
    std::string kind;  // "naive_bayes" | "logistic_regression"
    NaiveBayesModel nb;
    LogRegModel logreg;

    std::pair<Label, std::map<Label, double>> predict(std::string_view text) const;
};

void save_baseline(const std::filesystem::path& path, const TrainedBaseline& model);
TrainedBaseline load_baseline(const std::filesystem::path& path);

}  // namespace focalize::baseline
