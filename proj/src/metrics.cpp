#include "focalize/metrics.hpp"

#include <algorithm>
#include <set>

#include "focalize/errors.hpp"

namespace focalize::metrics {

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts) {
        for (long c : row) t += c;
    }
    return t;
}

long ConfusionMatrix::support(std::size_t gold_class) const {
    long t = 0;
    for (long c : counts[gold_class]) t += c;
    return t;
}

ConfusionMatrix confusion(const GoldDataset& gold,
                          const std::map<std::string, Label>& predictions) {
    bool overlap = false;
    for (const auto& [excerpt_id, label] : gold.entries) {
        if (predictions.count(excerpt_id)) {
            overlap = true;
            break;
        }
    }
    if (!overlap) throw NoOverlap("prediction set and gold set share no excerpt ids");

    ConfusionMatrix m;
    for (const auto& [excerpt_id, gold_label] : gold.entries) {
        auto it = predictions.find(excerpt_id);
        Label pred = it == predictions.end() ? Label::Invalid : it->second;
        std::size_t row = static_cast<std::size_t>(gold_label);
        std::size_t col = pred == Label::Invalid ? ConfusionMatrix::kInvalidColumn
                                                 : static_cast<std::size_t>(pred);
        ++m.counts[row][col];
    }
    return m;
}

ConfusionMatrix confusion(const GoldDataset& gold, const std::vector<AnnotationRecord>& records,
                          const std::string& annotator_id) {
    std::map<std::string, Label> predictions;
    for (const auto& rec : records) {
        if (rec.annotator_id == annotator_id) predictions[rec.excerpt_id] = rec.label;
    }
    return confusion(gold, predictions);
}

PRFReport prf(const ConfusionMatrix& matrix) {
    if (matrix.total() <= 0) throw InsufficientData("prf needs a non-empty confusion matrix");

    PRFReport report;
    double wp = 0.0, wr = 0.0, wf = 0.0;
    long total_support = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        const long tp = matrix.counts[c][c];
        long fp = 0;
        for (std::size_t g = 0; g < 3; ++g) {
            if (g != c) fp += matrix.counts[g][c];
        }
        const long support = matrix.support(c);
        const long fn = support - tp;

        auto& pc = report.per_class[c];
        pc.support = support;
        pc.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        pc.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        pc.f1 = (pc.precision + pc.recall) > 0.0
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        if (support > 0) {
            wp += static_cast<double>(support) * pc.precision;
            wr += static_cast<double>(support) * pc.recall;
            wf += static_cast<double>(support) * pc.f1;
            total_support += support;
        }
    }
    report.total_support = total_support;
    if (total_support > 0) {
        report.weighted_precision = wp / static_cast<double>(total_support);
        report.weighted_recall = wr / static_cast<double>(total_support);
        report.weighted_f1 = wf / static_cast<double>(total_support);
    }
    return report;
}

void ReliabilityMatrix::add_unit(std::vector<int> values) {
    if (values.size() != n_annotators) {
        throw LengthMismatch("unit row size does not match annotator count");
    }
    rows.push_back(std::move(values));
}

AlphaResult krippendorff_alpha(const ReliabilityMatrix& matrix) {
    if (matrix.n_annotators < 2) throw InsufficientData("alpha needs >= 2 annotators");

    int max_cat = -1;
    for (const auto& row : matrix.rows) {
        for (int v : row) max_cat = std::max(max_cat, v);
    }
    if (max_cat < 0) throw InsufficientData("alpha over an empty matrix");
    const std::size_t n_cat = static_cast<std::size_t>(max_cat) + 1;

    // coincidence matrix: each ordered value pair within a unit adds
    // 1/(m_u - 1) to o[c][k]
    std::vector<std::vector<double>> o(n_cat, std::vector<double>(n_cat, 0.0));
    std::size_t units_used = 0;
    for (const auto& row : matrix.rows) {
        std::vector<int> values;
        for (int v : row) {
            if (v >= 0) values.push_back(v);
        }
        const std::size_t m = values.size();
        if (m < 2) continue;
        ++units_used;
        const double w = 1.0 / static_cast<double>(m - 1);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                o[static_cast<std::size_t>(values[i])][static_cast<std::size_t>(values[j])] += w;
            }
        }
    }
    if (units_used == 0) throw InsufficientData("no unit retains >= 2 values");

    std::vector<double> n_c(n_cat, 0.0);
    double n = 0.0;
    for (std::size_t c = 0; c < n_cat; ++c) {
        for (std::size_t k = 0; k < n_cat; ++k) n_c[c] += o[c][k];
        n += n_c[c];
    }

    double observed_disagreement = 0.0;
    double expected_pairs = 0.0;
    for (std::size_t c = 0; c < n_cat; ++c) {
        for (std::size_t k = 0; k < n_cat; ++k) {
            if (c == k) continue;
            observed_disagreement += o[c][k];
            expected_pairs += n_c[c] * n_c[k];
        }
    }
    const double d_o = observed_disagreement / n;
    const double d_e = expected_pairs / (n * (n - 1.0));

    AlphaResult res;
    res.units_used = units_used;
    if (d_e == 0.0) {
        res.alpha = 1.0;
        res.degenerate = true;
        return res;
    }
    res.alpha = 1.0 - d_o / d_e;
    return res;
}

ReliabilityMatrix reliability_from_records(const std::vector<AnnotationRecord>& records,
                                           const std::vector<std::string>& annotator_ids) {
    std::map<std::string, std::size_t> annotator_index;
    for (std::size_t i = 0; i < annotator_ids.size(); ++i) {
        annotator_index.emplace(annotator_ids[i], i);
    }

    std::map<std::string, std::vector<int>> units;
    for (const auto& rec : records) {
        auto it = annotator_index.find(rec.annotator_id);
        if (it == annotator_index.end()) continue;
        auto [unit, inserted] =
            units.try_emplace(rec.excerpt_id, std::vector<int>(annotator_ids.size(), -1));
        // Invalid machine output is a missing cell, not a fourth category
        unit->second[it->second] =
            rec.label == Label::Invalid ? -1 : static_cast<int>(rec.label);
    }

    ReliabilityMatrix matrix;
    matrix.n_annotators = annotator_ids.size();
    for (auto& [excerpt_id, row] : units) matrix.add_unit(std::move(row));
    return matrix;
}

}  // namespace focalize::metrics
