#include "focalize/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "focalize/errors.hpp"
#include "focalize/features.hpp"
#include "focalize/util.hpp"

namespace focalize::analytics {

ModeDistribution mode_distribution(const std::vector<AnnotationRecord>& records,
                                   const std::string& annotator_id, const std::string& doc_id) {
    ModeDistribution dist;
    dist.doc_id = doc_id;
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& rec : records) {
        if (rec.annotator_id != annotator_id) continue;
        if (rec.label == Label::Invalid) {
            ++dist.n_invalid;
        } else {
            ++counts[static_cast<std::size_t>(rec.label)];
        }
    }
    const std::size_t valid = counts[0] + counts[1] + counts[2];
    if (valid == 0) throw AllInvalid("no valid labels for " + annotator_id + " on " + doc_id);
    dist.n_excerpts = valid;
    const double denom = static_cast<double>(valid);
    dist.pct_internal = 100.0 * static_cast<double>(counts[0]) / denom;
    dist.pct_external = 100.0 * static_cast<double>(counts[1]) / denom;
    dist.pct_zero = 100.0 * static_cast<double>(counts[2]) / denom;
    return dist;
}

std::string sense_name(Sense sense) {
    switch (sense) {
        case Sense::Touch: return "touch";
        case Sense::Hearing: return "hearing";
        case Sense::Smell: return "smell";
        case Sense::Taste: return "taste";
        case Sense::Vision: return "vision";
        case Sense::Interoception: return "interoception";
    }
    return "unknown";
}

std::string sense_display_name(Sense sense) {
    switch (sense) {
        case Sense::Touch: return "Touch";
        case Sense::Hearing: return "Sound";
        case Sense::Smell: return "Smell";
        case Sense::Taste: return "Taste";
        case Sense::Vision: return "Sight";
        case Sense::Interoception: return "Interoception";
    }
    return "Unknown";
}

namespace {

/// Splits one CSV record; supports quoted fields with "" escapes.
std::vector<std::string> parse_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (std::string(util::trim(header[i])) == name) return i;
    }
    throw SchemaError("lexicon CSV " + path.string() + " lacks column \"" + name + "\"", 1);
}

}  // namespace

SensorimotorLexicon load_lexicon_csv(const std::filesystem::path& path,
                                     const LexiconColumns& columns) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon CSV " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("lexicon CSV is empty", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = parse_csv_row(line);

    const std::size_t word_idx = column_index(header, columns.word, path);
    std::array<std::size_t, kNumSenses> axis_idx{};
    for (std::size_t a = 0; a < kNumSenses; ++a) {
        axis_idx[a] = column_index(header, columns.axis[a], path);
    }

    SensorimotorLexicon lexicon;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        const auto fields = parse_csv_row(line);
        if (fields.size() <= word_idx) {
            throw SchemaError("lexicon row is missing the word column", line_no);
        }
        const std::string word = util::to_lower(std::string(util::trim(fields[word_idx])));
        if (word.empty()) throw SchemaError("lexicon row has an empty word", line_no);

        std::array<double, kNumSenses> ratings{};
        for (std::size_t a = 0; a < kNumSenses; ++a) {
            if (fields.size() <= axis_idx[a]) {
                throw SchemaError("lexicon row is missing a rating column", line_no);
            }
            const std::string raw(util::trim(fields[axis_idx[a]]));
            try {
                std::size_t used = 0;
                ratings[a] = std::stod(raw, &used);
                if (used != raw.size()) throw std::invalid_argument(raw);
            } catch (const std::exception&) {
                throw SchemaError("unparseable rating \"" + raw + "\"", line_no);
            }
            if (!std::isfinite(ratings[a])) {
                throw SchemaError("non-finite rating \"" + raw + "\"", line_no);
            }
        }
        lexicon.entries.emplace(word, ratings);  // first spelling of a word wins
    }
    return lexicon;
}

SensorimotorProfile profile_from_tokens(const std::string& doc_id,
                                        const std::vector<std::string>& tokens,
                                        const SensorimotorLexicon& lexicon) {
    SensorimotorProfile profile;
    profile.doc_id = doc_id;
    std::array<double, kNumSenses> sums{};
    for (const auto& token : tokens) {
        const auto it = lexicon.entries.find(util::to_lower(token));
        if (it == lexicon.entries.end()) continue;
        ++profile.lexicon_token_count;
        for (std::size_t a = 0; a < kNumSenses; ++a) sums[a] += it->second[a];
    }
    if (profile.lexicon_token_count == 0) {
        throw NoLexiconMatches("no token of " + doc_id + " appears in the lexicon");
    }
    for (std::size_t a = 0; a < kNumSenses; ++a) {
        profile.mean_strength[a] = sums[a] / static_cast<double>(profile.lexicon_token_count);
    }
    return profile;
}

SensorimotorProfile sensorimotor_profile(const std::string& doc_id, std::string_view text,
                                         const SensorimotorLexicon& lexicon) {
    return profile_from_tokens(doc_id, baseline::tokenize(text), lexicon);
}

std::vector<SenseModeCorrelation> correlate_senses(
    const std::vector<SensorimotorProfile>& profiles,
    const std::vector<ModeDistribution>& distributions) {
    std::map<std::string, const SensorimotorProfile*> by_doc;
    for (const auto& p : profiles) by_doc.emplace(p.doc_id, &p);

    // join on doc_id, deterministic order
    std::vector<const ModeDistribution*> dists;
    for (const auto& d : distributions) {
        if (!by_doc.count(d.doc_id)) {
            throw LengthMismatch("no sensorimotor profile for document " + d.doc_id);
        }
        dists.push_back(&d);
    }
    if (dists.size() != by_doc.size()) {
        throw LengthMismatch("profiles and mode distributions cover different documents");
    }
    std::sort(dists.begin(), dists.end(),
              [](const ModeDistribution* a, const ModeDistribution* b) {
                  return a->doc_id < b->doc_id;
              });
    if (dists.size() < 3) throw InsufficientData("correlation needs >= 3 documents");

    std::vector<SenseModeCorrelation> table;
    table.reserve(kNumSenses * 3);
    for (std::size_t a = 0; a < kNumSenses; ++a) {
        std::vector<double> axis_values;
        axis_values.reserve(dists.size());
        for (const auto* d : dists) {
            axis_values.push_back(by_doc.at(d->doc_id)->mean_strength[a]);
        }
        for (int mode = 0; mode < 3; ++mode) {
            std::vector<double> pct;
            pct.reserve(dists.size());
            for (const auto* d : dists) {
                pct.push_back(mode == 0   ? d->pct_internal
                              : mode == 1 ? d->pct_external
                                          : d->pct_zero);
            }
            SenseModeCorrelation cell;
            cell.sense = static_cast<Sense>(a);
            cell.mode = static_cast<Label>(mode);
            cell.test = stats::pearson(axis_values, pct);
            cell.significant = cell.test.p_value < 0.05;
            table.push_back(cell);
        }
    }
    return table;
}

ConfidenceByAgreement confidence_by_agreement(const std::vector<AnnotationRecord>& records,
                                              const std::vector<std::string>& grouping,
                                              const std::string& grouping_name,
                                              const std::string& target_annotator) {
    if (grouping.size() < 2) throw InsufficientData("grouping needs >= 2 annotators");

    const std::set<std::string> group_set(grouping.begin(), grouping.end());
    struct PerExcerpt {
        std::vector<Label> group_labels;
        std::optional<double> target_confidence;
    };
    std::map<std::string, PerExcerpt> units;
    for (const auto& rec : records) {
        auto& unit = units[rec.excerpt_id];
        if (group_set.count(rec.annotator_id) && rec.label != Label::Invalid) {
            unit.group_labels.push_back(rec.label);
        }
        if (rec.annotator_id == target_annotator && rec.confidence) {
            unit.target_confidence = rec.confidence;
        }
    }

    std::vector<double> agree_conf, disagree_conf;
    for (const auto& [excerpt_id, unit] : units) {
        if (unit.group_labels.size() < 2 || !unit.target_confidence) continue;
        const bool unanimous = std::all_of(
            unit.group_labels.begin(), unit.group_labels.end(),
            [&](Label l) { return l == unit.group_labels.front(); });
        (unanimous ? agree_conf : disagree_conf).push_back(*unit.target_confidence);
    }
    if (agree_conf.empty() && disagree_conf.empty()) {
        throw InsufficientData("no excerpt has both a grouping verdict and a target confidence");
    }

    ConfidenceByAgreement out;
    out.grouping_name = grouping_name;
    out.target_annotator = target_annotator;
    out.agree.condition = grouping_name + ":agree";
    out.disagree.condition = grouping_name + ":disagree";
    auto fill = [](AgreementConditionStats& side, const std::vector<double>& xs) {
        side.n = xs.size();
        if (!xs.empty()) {
            side.mean_confidence = stats::mean(xs);
            side.std_confidence = stats::sample_std(xs);
        }
    };
    fill(out.agree, agree_conf);
    fill(out.disagree, disagree_conf);
    if (agree_conf.size() >= 2 && disagree_conf.size() >= 2) {
        try {
            out.test = stats::welch_t(agree_conf, disagree_conf);
        } catch (const DataError&) {
            // e.g. both partitions constant: report the sides without a test
        }
    }
    return out;
}

}  // namespace focalize::analytics
