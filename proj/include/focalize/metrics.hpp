#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "focalize/annotation.hpp"

namespace focalize::metrics {

using annotation::AnnotationRecord;
using annotation::GoldDataset;
using annotation::Label;

/// Gold classes (Internal, External, Zero) x predicted columns; column 3 is
/// the synthetic "invalid" fold-in for unparseable or missing predictions.
struct ConfusionMatrix {
    static constexpr std::size_t kInvalidColumn = 3;
    std::array<std::array<long, 4>, 3> counts{};

    long total() const;
    long support(std::size_t gold_class) const;
};

/// Gold excerpts with exactly one prediction each; a missing prediction is
/// scored as Invalid. Throws NoOverlap when the two keyed sets are disjoint.
ConfusionMatrix confusion(const GoldDataset& gold, const std::map<std::string, Label>& predictions);

/// Convenience: selects one annotator's records first.
ConfusionMatrix confusion(const GoldDataset& gold, const std::vector<AnnotationRecord>& records,
                          const std::string& annotator_id);

struct PRFReport {
    struct PerClass {
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
        long support = 0;
    };
    std::array<PerClass, 3> per_class;  // Internal, External, Zero
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    long total_support = 0;
};

/// Per-class P/R/F1 (0 when a denominator is 0) plus support-weighted
/// overalls over classes with nonzero support.
PRFReport prf(const ConfusionMatrix& matrix);

/// Units x annotators nominal labels with missing cells (-1). Category codes
/// are small nonnegative integers.
struct ReliabilityMatrix {
    std::size_t n_annotators = 0;
    std::vector<std::vector<int>> rows;  // each row has n_annotators entries

    void add_unit(std::vector<int> values);
};

struct AlphaResult {
    double alpha = 0.0;
    bool degenerate = false;  // expected disagreement was zero; alpha pinned to 1
    std::size_t units_used = 0;
};

/// Krippendorff's alpha, nominal metric, coincidence-matrix formulation.
/// Units with < 2 non-missing values are dropped. Throws InsufficientData
/// when nothing is left.
AlphaResult krippendorff_alpha(const ReliabilityMatrix& matrix);

/// Builds a units x annotators matrix from annotation records; Invalid
/// labels become missing cells so alpha stays over the three real modes.
ReliabilityMatrix reliability_from_records(const std::vector<AnnotationRecord>& records,
                                           const std::vector<std::string>& annotator_ids);

}  // namespace focalize::metrics
