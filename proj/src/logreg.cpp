#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "focalize/classifiers.hpp"
#include "focalize/errors.hpp"

namespace focalize::baseline {

namespace {

std::vector<double> class_scores(const std::vector<std::vector<double>>& weights,
                                 const std::vector<double>& bias, const FeatureVector& x) {
    const std::size_t k = bias.size();
    std::vector<double> scores(bias);
    for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (const auto& [col, w] : x) s += weights[c][static_cast<std::size_t>(col)] * w;
        scores[c] += s;
    }
    return scores;
}

// in place: scores -> softmax probabilities; returns logsumexp
double softmax_inplace(std::vector<double>& scores) {
    double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    double lse = m + std::log(z);
    for (double& s : scores) s = std::exp(s - lse);
    return lse;
}

}  // namespace

double logreg_loss(const std::vector<std::vector<double>>& weights,
                   const std::vector<double>& bias, const std::vector<FeatureVector>& X,
                   const std::vector<int>& y, double lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        auto scores = class_scores(weights, bias, X[i]);
        double target = scores[static_cast<std::size_t>(y[i])];
        double m = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (double s : scores) z += std::exp(s - m);
        loss += m + std::log(z) - target;
    }
    for (const auto& row : weights) {
        for (double w : row) loss += 0.5 * lambda * w * w;
    }
    return loss;
}

void logreg_loss_grad(const std::vector<std::vector<double>>& weights,
                      const std::vector<double>& bias, const std::vector<FeatureVector>& X,
                      const std::vector<int>& y, double lambda, double& loss,
                      std::vector<std::vector<double>>& grad_w, std::vector<double>& grad_b) {
    const std::size_t k = bias.size();
    const std::size_t v = weights.empty() ? 0 : weights[0].size();
    grad_w.assign(k, std::vector<double>(v, 0.0));
    grad_b.assign(k, 0.0);
    loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        auto p = class_scores(weights, bias, X[i]);
        double target = p[static_cast<std::size_t>(y[i])];
        double lse = softmax_inplace(p);
        loss += lse - target;
        for (std::size_t c = 0; c < k; ++c) {
            double coeff = p[c] - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
            grad_b[c] += coeff;
            for (const auto& [col, w] : X[i]) {
                grad_w[c][static_cast<std::size_t>(col)] += coeff * w;
            }
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t t = 0; t < v; ++t) {
            loss += 0.5 * lambda * weights[c][t] * weights[c][t];
            grad_w[c][t] += lambda * weights[c][t];
        }
    }
}

namespace {

struct FlatProblem {
    const std::vector<FeatureVector>& X;
    const std::vector<int>& y;
    std::size_t k, v;
    double lambda;

    std::size_t dim() const { return k * v + k; }

    void unpack(const std::vector<double>& theta, std::vector<std::vector<double>>& w,
                std::vector<double>& b) const {
        w.assign(k, std::vector<double>(v));
        b.assign(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t t = 0; t < v; ++t) w[c][t] = theta[c * v + t];
        }
        for (std::size_t c = 0; c < k; ++c) b[c] = theta[k * v + c];
    }

    double eval(const std::vector<double>& theta, std::vector<double>& grad) const {
        std::vector<std::vector<double>> w;
        std::vector<double> b;
        unpack(theta, w, b);
        double loss;
        std::vector<std::vector<double>> gw;
        std::vector<double> gb;
        logreg_loss_grad(w, b, X, y, lambda, loss, gw, gb);
        grad.resize(dim());
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t t = 0; t < v; ++t) grad[c * v + t] = gw[c][t];
        }
        for (std::size_t c = 0; c < k; ++c) grad[k * v + c] = gb[c];
        return loss;
    }
};

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

LogRegModel logreg_fit(const std::vector<FeatureVector>& vectors,
                       const std::vector<Label>& labels, std::size_t vocab_size, double lambda,
                       double tol, int max_iter) {
    if (vectors.empty() || labels.empty()) throw EmptyTrainingSet("logreg_fit on empty training set");
    if (vectors.size() != labels.size()) throw LengthMismatch("vectors/labels size mismatch");

    std::set<Label> seen;
    for (Label l : labels) {
        if (l == Label::Invalid) throw DataError("Invalid label in training data");
        seen.insert(l);
    }
    if (seen.size() < 2) throw SingleClassTraining("logistic regression needs >= 2 classes");

    LogRegModel model;
    model.classes.assign(seen.begin(), seen.end());
    model.lambda = lambda;
    const std::size_t k = model.classes.size();

    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y[i] = static_cast<int>(std::find(model.classes.begin(), model.classes.end(), labels[i]) -
                                model.classes.begin());
    }

    FlatProblem prob{vectors, y, k, vocab_size, lambda};
    std::vector<double> theta(prob.dim(), 0.0);
    std::vector<double> grad;
    double loss = prob.eval(theta, grad);

    // L-BFGS (m = 10) with Armijo backtracking; accepted steps never
    // increase the loss
    const std::size_t history = 10;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    int iter = 0;
    bool converged = norm2(grad) <= tol;
    while (!converged && iter < max_iter) {
        ++iter;
        // two-loop recursion
        std::vector<double> d = grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t j = s_hist.size(); j-- > 0;) {
            alpha[j] = rho_hist[j] * dot(s_hist[j], d);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[j] * y_hist[j][i];
        }
        if (!s_hist.empty()) {
            double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& di : d) di *= gamma;
        }
        for (std::size_t j = 0; j < s_hist.size(); ++j) {
            double beta = rho_hist[j] * dot(y_hist[j], d);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += s_hist[j][i] * (alpha[j] - beta);
        }
        for (double& di : d) di = -di;

        double gd = dot(grad, d);
        if (gd >= 0.0) {  // not a descent direction; fall back to steepest descent
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = -grad[i];
            gd = -dot(grad, grad);
        }

        double step = 1.0;
        if (s_hist.empty()) {
            double gn = norm2(grad);
            if (gn > 1.0) step = 1.0 / gn;
        }
        const double c1 = 1e-4;
        std::vector<double> theta_new(theta.size());
        std::vector<double> grad_new;
        double loss_new = loss;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < theta.size(); ++i) theta_new[i] = theta[i] + step * d[i];
            loss_new = prob.eval(theta_new, grad_new);
            if (loss_new <= loss + c1 * step * gd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // line search stalled at machine precision

        std::vector<double> s_vec(theta.size()), y_vec(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) {
            s_vec[i] = theta_new[i] - theta[i];
            y_vec[i] = grad_new[i] - grad[i];
        }
        double sy = dot(s_vec, y_vec);
        if (sy > 1e-12) {
            if (s_hist.size() == history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
        }
        theta = std::move(theta_new);
        grad = std::move(grad_new);
        loss = loss_new;
        converged = norm2(grad) <= tol;
    }

    prob.unpack(theta, model.weights, model.bias);
    model.converged = converged;
    model.iterations = iter;
    model.final_loss = loss;
    return model;
}

std::pair<Label, std::map<Label, double>> logreg_predict(const LogRegModel& model,
                                                         const FeatureVector& vector) {
    auto p = class_scores(model.weights, model.bias, vector);
    softmax_inplace(p);
    std::map<Label, double> probs;
    std::size_t best = 0;
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        probs[model.classes[c]] = p[c];
        if (p[c] > p[best]) best = c;
    }
    return {model.classes[best], probs};
}

}  // namespace focalize::baseline
