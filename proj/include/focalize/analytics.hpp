#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focalize/annotation.hpp"
#include "focalize/stats.hpp"

namespace focalize::analytics {

using annotation::AnnotationRecord;
using annotation::Label;

/// Per-document share of each focalization mode, over valid labels only.
struct ModeDistribution {
    std::string doc_id;
    double pct_internal = 0.0;  // percentages in [0, 100]
    double pct_external = 0.0;
    double pct_zero = 0.0;
    std::size_t n_excerpts = 0;  // valid-label excerpts the percentages cover
    std::size_t n_invalid = 0;   // excluded from the denominator
};

/// Percentages over one annotator's labels for one document. Invalid labels
/// are counted in n_invalid and excluded. Throws AllInvalid when no valid
/// label remains.
ModeDistribution mode_distribution(const std::vector<AnnotationRecord>& records,
                                   const std::string& annotator_id, const std::string& doc_id);

/// Perceptual axes, in storage order.
enum class Sense { Touch = 0, Hearing, Smell, Taste, Vision, Interoception };
inline constexpr std::size_t kNumSenses = 6;

/// Canonical lowercase axis name ("touch", "hearing", ...).
std::string sense_name(Sense sense);

/// Row label used in correlation tables ("Touch", "Sound", ..., "Sight").
std::string sense_display_name(Sense sense);

/// word -> per-axis perceptual strength ratings; keys stored lowercase.
struct SensorimotorLexicon {
    std::map<std::string, std::array<double, kNumSenses>> entries;
};

/// Column-name mapping for the lexicon CSV. The defaults match the
/// published Lancaster norms perceptual-strength headers.
struct LexiconColumns {
    std::string word = "Word";
    std::array<std::string, kNumSenses> axis = {
        "Haptic.mean",   "Auditory.mean", "Olfactory.mean",
        "Gustatory.mean", "Visual.mean",  "Interoceptive.mean"};
};

/// Reads a CSV (quoted fields supported) into a lexicon. Throws SchemaError
/// on missing columns or unparseable ratings.
SensorimotorLexicon load_lexicon_csv(const std::filesystem::path& path,
                                     const LexiconColumns& columns = {});

struct SensorimotorProfile {
    std::string doc_id;
    std::array<double, kNumSenses> mean_strength{};
    std::size_t lexicon_token_count = 0;  // the per-axis denominator
};

/// Per-axis summed strength over lexicon-matched tokens divided by the
/// matched-token count. Tokens are matched lowercase and exactly; unmatched
/// tokens are ignored entirely. Throws NoLexiconMatches.
SensorimotorProfile profile_from_tokens(const std::string& doc_id,
                                        const std::vector<std::string>& tokens,
                                        const SensorimotorLexicon& lexicon);

/// Convenience: tokenizes the text first (lowercase alphanumeric runs).
SensorimotorProfile sensorimotor_profile(const std::string& doc_id, std::string_view text,
                                         const SensorimotorLexicon& lexicon);

/// One cell of the axis x mode correlation table.
struct SenseModeCorrelation {
    Sense sense = Sense::Touch;
    Label mode = Label::Internal;
    stats::TestResult test;      // statistic = Pearson's r
    bool significant = false;    // p < 0.05, starred in reports
};

/// 6 axes x 3 modes Pearson correlations over novels. Profiles and
/// distributions are joined on doc_id; both lists must cover the same >= 3
/// documents. Throws LengthMismatch / InsufficientData, propagates pearson
/// errors.
std::vector<SenseModeCorrelation> correlate_senses(
    const std::vector<SensorimotorProfile>& profiles,
    const std::vector<ModeDistribution>& distributions);

/// One side (agree or disagree) of a confidence-by-agreement comparison.
struct AgreementConditionStats {
    std::string condition;  // e.g. "humans:agree"
    double mean_confidence = 0.0;
    double std_confidence = 0.0;
    std::size_t n = 0;
};

struct ConfidenceByAgreement {
    std::string grouping_name;
    std::string target_annotator;
    AgreementConditionStats agree;
    AgreementConditionStats disagree;
    std::optional<stats::TestResult> test;  // Welch's t; absent when a side is empty
};

/// Partitions excerpts by unanimity of the grouping annotators' labels,
/// then compares the target annotator's confidence across the partitions.
/// Excerpts where the grouping subset has < 2 valid labels, or the target
/// has no confidence, are skipped. When one partition is empty the other's
/// stats are still reported and the test is omitted. Throws InsufficientData
/// when both partitions are empty.
ConfidenceByAgreement confidence_by_agreement(const std::vector<AnnotationRecord>& records,
                                              const std::vector<std::string>& grouping,
                                              const std::string& grouping_name,
                                              const std::string& target_annotator);

}  // namespace focalize::analytics
