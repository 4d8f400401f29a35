#include "focalize/annotation.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "focalize/errors.hpp"
#include "focalize/util.hpp"

namespace focalize::annotation {

using nlohmann::json;

std::string label_name(Label label) {
    switch (label) {
        case Label::Internal: return "internal";
        case Label::External: return "external";
        case Label::Zero: return "zero";
        case Label::Invalid: return "invalid";
    }
    return "invalid";
}

std::optional<Label> label_from_name(std::string_view name) {
    if (name == "internal") return Label::Internal;
    if (name == "external") return Label::External;
    if (name == "zero") return Label::Zero;
    if (name == "invalid") return Label::Invalid;
    return std::nullopt;
}

Label parse_label(std::string_view raw) {
    std::string_view s = util::trim(raw);
    if (s.empty()) return Label::Invalid;
    auto space = s.find_first_of(" \t\r\n\f\v");
    std::string_view word = space == std::string_view::npos ? s : s.substr(0, space);
    // strip punctuation hugging the word ("zero.", "**internal**")
    std::size_t begin = 0, end = word.size();
    while (begin < end && !util::is_ascii_alnum(word[begin])) ++begin;
    while (end > begin && !util::is_ascii_alnum(word[end - 1])) --end;
    std::string cleaned = util::to_lower(word.substr(begin, end - begin));
    if (cleaned == "internal") return Label::Internal;
    if (cleaned == "external") return Label::External;
    if (cleaned == "zero") return Label::Zero;
    return Label::Invalid;
}

std::optional<Label> majority_label(const std::vector<Label>& labels) {
    std::array<std::size_t, kNumClasses> counts{};
    std::size_t valid = 0;
    for (Label l : labels) {
        if (l == Label::Invalid) continue;
        ++counts[static_cast<std::size_t>(l)];
        ++valid;
    }
    if (valid == 0) throw AllInvalid("no valid labels to vote with");
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (2 * counts[c] > valid) return static_cast<Label>(c);
    }
    return std::nullopt;
}

std::map<Label, std::size_t> GoldDataset::class_counts() const {
    std::map<Label, std::size_t> counts;
    for (const auto& [id, label] : entries) ++counts[label];
    return counts;
}

namespace {

json parse_line(const std::string& line, std::size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError("invalid JSON", lineno);
    if (!j.is_object()) throw SchemaError("record is not a JSON object", lineno);
    return j;
}

Label parse_label_field(const json& j, std::size_t lineno, bool allow_invalid) {
    if (!j.contains("label") || !j["label"].is_string()) {
        throw SchemaError("missing or non-string \"label\"", lineno);
    }
    std::string name = j["label"].get<std::string>();
    auto label = label_from_name(name);
    if (!label || (!allow_invalid && *label == Label::Invalid)) {
        throw UnknownLabel("unknown label \"" + name + "\"", lineno);
    }
    return *label;
}

}  // namespace

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotations file: " + path.string());
    std::vector<AnnotationRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        json j = parse_line(line, lineno);
        AnnotationRecord rec;
        try {
            rec.excerpt_id = j.at("excerpt_id").get<std::string>();
            rec.annotator_id = j.at("annotator_id").get<std::string>();
        } catch (const json::exception& ex) {
            throw SchemaError(std::string("bad record: ") + ex.what(), lineno);
        }
        rec.label = parse_label_field(j, lineno, /*allow_invalid=*/true);
        if (j.contains("confidence") && !j["confidence"].is_null()) {
            if (!j["confidence"].is_number()) throw SchemaError("confidence is not a number", lineno);
            double c = j["confidence"].get<double>();
            if (c < 0.0 || c > 1.0) throw SchemaError("confidence outside [0,1]", lineno);
            rec.confidence = c;
        }
        if (j.contains("raw_output") && !j["raw_output"].is_null()) {
            if (!j["raw_output"].is_string()) throw SchemaError("raw_output is not a string", lineno);
            rec.raw_output = j["raw_output"].get<std::string>();
        }
        if (!j.contains("created_at") || !j["created_at"].is_string()) {
            throw SchemaError("missing or non-string \"created_at\"", lineno);
        }
        rec.created_at = j["created_at"].get<std::string>();
        if (!seen.emplace(rec.excerpt_id, rec.annotator_id).second) {
            throw DuplicateRecord("duplicate (excerpt_id, annotator_id): (" + rec.excerpt_id +
                                  ", " + rec.annotator_id + ") at line " + std::to_string(lineno));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void save_annotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records) {
        json j;
        j["excerpt_id"] = rec.excerpt_id;
        j["annotator_id"] = rec.annotator_id;
        j["label"] = label_name(rec.label);
        j["confidence"] = rec.confidence ? json(*rec.confidence) : json(nullptr);
        j["raw_output"] = rec.raw_output ? json(*rec.raw_output) : json(nullptr);
        j["created_at"] = rec.created_at;
        out << j.dump() << '\n';
    }
    util::write_file_atomic(path, out.str());
}

GoldDataset load_gold(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open gold file: " + path.string());
    GoldDataset gold;
    gold.name = path.stem().string();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        json j = parse_line(line, lineno);
        std::string excerpt_id;
        try {
            excerpt_id = j.at("excerpt_id").get<std::string>();
        } catch (const json::exception& ex) {
            throw SchemaError(std::string("bad gold record: ") + ex.what(), lineno);
        }
        Label label = parse_label_field(j, lineno, /*allow_invalid=*/false);
        if (!gold.entries.emplace(excerpt_id, label).second) {
            throw DuplicateRecord("duplicate gold excerpt_id: " + excerpt_id + " at line " +
                                  std::to_string(lineno));
        }
    }
    return gold;
}

void save_gold(const std::filesystem::path& path, const GoldDataset& gold) {
    std::ostringstream out;
    for (const auto& [excerpt_id, label] : gold.entries) {
        json j;
        j["excerpt_id"] = excerpt_id;
        j["label"] = label_name(label);
        out << j.dump() << '\n';
    }
    util::write_file_atomic(path, out.str());
}

}  // namespace focalize::annotation
