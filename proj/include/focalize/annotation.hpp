#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace focalize::annotation {

/// Annotation target. Invalid marks a machine reply that failed to parse;
/// it never appears in gold/consensus data. The enum order (Internal <
/// External < Zero) is the tie-break order used by the classifiers.
enum class Label { Internal = 0, External = 1, Zero = 2, Invalid = 3 };

inline constexpr std::size_t kNumClasses = 3;  // gold classes, Invalid excluded

/// Canonical lowercase name: "internal", "external", "zero", "invalid".
std::string label_name(Label label);

/// Strict mapping from a canonical name; nullopt for anything else.
std::optional<Label> label_from_name(std::string_view name);

/// Lenient reply parsing: take the first whitespace-delimited word, strip
/// surrounding punctuation, lowercase, and match against the three modes.
/// Anything else is Invalid (an in-band value, not an error).
Label parse_label(std::string_view raw);

/// Strict-majority vote after dropping Invalid entries. nullopt means no
/// strict majority (caller decides how to adjudicate). Throws AllInvalid
/// when nothing is left to vote with.
std::optional<Label> majority_label(const std::vector<Label>& labels);

struct AnnotationRecord {
    std::string excerpt_id;
    std::string annotator_id;
    Label label = Label::Invalid;
    std::optional<double> confidence;       // in [0,1] when present
    std::optional<std::string> raw_output;  // verbatim model reply
    std::string created_at;                 // RFC3339

    bool operator==(const AnnotationRecord&) const = default;
};

struct GoldDataset {
    std::string name;
    std::map<std::string, Label> entries;  // excerpt_id -> label, no Invalid

    std::map<Label, std::size_t> class_counts() const;
};

/// JSONL loaders/savers. Loaders validate the schema per line and reject
/// duplicate (excerpt_id, annotator_id) pairs.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRecord>& records);

GoldDataset load_gold(const std::filesystem::path& path);
void save_gold(const std::filesystem::path& path, const GoldDataset& gold);

}  // namespace focalize::annotation
