#include "focalize/reports.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "focalize/errors.hpp"
#include "focalize/util.hpp"

namespace focalize::reports {

using analytics::ConfidenceByAgreement;
using analytics::SenseModeCorrelation;
using annotation::Label;
using nlohmann::json;
using util::format_fixed;

bool ResultsBundle::empty() const {
    return evaluations.empty() && confidence.empty() && modes.empty() && correlations.empty() &&
           agreement.empty();
}

// ---------------------------------------------------------------------------
// JSON round-trip

namespace {

json prf_to_json(const metrics::PRFReport& prf) {
    static const char* kClassNames[3] = {"internal", "external", "zero"};
    json per_class = json::object();
    for (std::size_t c = 0; c < 3; ++c) {
        per_class[kClassNames[c]] = {{"precision", prf.per_class[c].precision},
                                     {"recall", prf.per_class[c].recall},
                                     {"f1", prf.per_class[c].f1},
                                     {"support", prf.per_class[c].support}};
    }
    return json{{"per_class", per_class},
                {"weighted",
                 {{"precision", prf.weighted_precision},
                  {"recall", prf.weighted_recall},
                  {"f1", prf.weighted_f1},
                  {"support", prf.total_support}}}};
}

metrics::PRFReport prf_from_json(const json& doc) {
    static const char* kClassNames[3] = {"internal", "external", "zero"};
    metrics::PRFReport prf;
    for (std::size_t c = 0; c < 3; ++c) {
        const json& pc = doc.at("per_class").at(kClassNames[c]);
        prf.per_class[c].precision = pc.at("precision").get<double>();
        prf.per_class[c].recall = pc.at("recall").get<double>();
        prf.per_class[c].f1 = pc.at("f1").get<double>();
        prf.per_class[c].support = pc.at("support").get<long>();
    }
    const json& w = doc.at("weighted");
    prf.weighted_precision = w.at("precision").get<double>();
    prf.weighted_recall = w.at("recall").get<double>();
    prf.weighted_f1 = w.at("f1").get<double>();
    prf.total_support = w.at("support").get<long>();
    return prf;
}

json side_to_json(const analytics::AgreementConditionStats& side) {
    return json{{"condition", side.condition},
                {"mean", side.mean_confidence},
                {"std", side.std_confidence},
                {"n", side.n}};
}

analytics::AgreementConditionStats side_from_json(const json& doc) {
    analytics::AgreementConditionStats side;
    side.condition = doc.at("condition").get<std::string>();
    side.mean_confidence = doc.at("mean").get<double>();
    side.std_confidence = doc.at("std").get<double>();
    side.n = doc.at("n").get<std::size_t>();
    return side;
}

json test_to_json(const stats::TestResult& test) {
    return json{{"statistic", test.statistic},
                {"p", test.p_value},
                {"df1", test.df1},
                {"df2", test.df2}};
}

stats::TestResult test_from_json(const json& doc) {
    stats::TestResult test;
    test.statistic = doc.at("statistic").get<double>();
    test.p_value = doc.at("p").get<double>();
    test.df1 = doc.at("df1").get<double>();
    test.df2 = doc.at("df2").get<double>();
    return test;
}

analytics::Sense sense_from_name(const std::string& name) {
    for (std::size_t a = 0; a < analytics::kNumSenses; ++a) {
        const auto sense = static_cast<analytics::Sense>(a);
        if (analytics::sense_name(sense) == name) return sense;
    }
    throw SchemaError("unknown sense \"" + name + "\"", 0);
}

}  // namespace

json bundle_to_json(const ResultsBundle& bundle) {
    json doc = json::object();
    if (!bundle.evaluations.empty()) {
        json rows = json::array();
        for (const auto& row : bundle.evaluations) {
            json r = prf_to_json(row.prf);
            r["annotator_id"] = row.annotator_id;
            rows.push_back(std::move(r));
        }
        doc["evaluations"] = std::move(rows);
    }
    if (!bundle.confidence.empty()) {
        json rows = json::array();
        for (const auto& row : bundle.confidence) {
            json r{{"grouping", row.grouping_name},
                   {"target", row.target_annotator},
                   {"agree", side_to_json(row.agree)},
                   {"disagree", side_to_json(row.disagree)}};
            r["welch"] = row.test ? test_to_json(*row.test) : json(nullptr);
            rows.push_back(std::move(r));
        }
        doc["confidence"] = std::move(rows);
    }
    if (!bundle.modes.empty()) {
        json rows = json::array();
        for (const auto& row : bundle.modes) {
            rows.push_back(json{{"doc_id", row.dist.doc_id},
                                {"title", row.title},
                                {"pct_internal", row.dist.pct_internal},
                                {"pct_external", row.dist.pct_external},
                                {"pct_zero", row.dist.pct_zero},
                                {"n_excerpts", row.dist.n_excerpts},
                                {"n_invalid", row.dist.n_invalid}});
        }
        doc["modes"] = std::move(rows);
    }
    if (!bundle.correlations.empty()) {
        json rows = json::array();
        for (const auto& cell : bundle.correlations) {
            rows.push_back(json{{"sense", analytics::sense_name(cell.sense)},
                                {"mode", annotation::label_name(cell.mode)},
                                {"test", test_to_json(cell.test)},
                                {"significant", cell.significant}});
        }
        doc["correlations"] = std::move(rows);
    }
    if (!bundle.agreement.empty()) {
        json rows = json::array();
        for (const auto& row : bundle.agreement) {
            rows.push_back(json{{"name", row.name},
                                {"alpha", row.alpha.alpha},
                                {"degenerate", row.alpha.degenerate},
                                {"units", row.alpha.units_used}});
        }
        doc["agreement"] = std::move(rows);
    }
    return doc;
}

ResultsBundle bundle_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("results bundle must be a JSON object", 0);
    ResultsBundle bundle;
    try {
        if (doc.contains("evaluations")) {
            for (const json& r : doc.at("evaluations")) {
                EvaluationRow row;
                row.annotator_id = r.at("annotator_id").get<std::string>();
                row.prf = prf_from_json(r);
                bundle.evaluations.push_back(std::move(row));
            }
        }
        if (doc.contains("confidence")) {
            for (const json& r : doc.at("confidence")) {
                ConfidenceByAgreement row;
                row.grouping_name = r.at("grouping").get<std::string>();
                row.target_annotator = r.at("target").get<std::string>();
                row.agree = side_from_json(r.at("agree"));
                row.disagree = side_from_json(r.at("disagree"));
                if (r.contains("welch") && !r.at("welch").is_null()) {
                    row.test = test_from_json(r.at("welch"));
                }
                bundle.confidence.push_back(std::move(row));
            }
        }
        if (doc.contains("modes")) {
            for (const json& r : doc.at("modes")) {
                ModeRow row;
                row.dist.doc_id = r.at("doc_id").get<std::string>();
                row.title = r.value("title", std::string());
                row.dist.pct_internal = r.at("pct_internal").get<double>();
                row.dist.pct_external = r.at("pct_external").get<double>();
                row.dist.pct_zero = r.at("pct_zero").get<double>();
                row.dist.n_excerpts = r.at("n_excerpts").get<std::size_t>();
                row.dist.n_invalid = r.value("n_invalid", std::size_t{0});
                bundle.modes.push_back(std::move(row));
            }
        }
        if (doc.contains("correlations")) {
            for (const json& r : doc.at("correlations")) {
                SenseModeCorrelation cell;
                cell.sense = sense_from_name(r.at("sense").get<std::string>());
                const auto mode = annotation::label_from_name(r.at("mode").get<std::string>());
                if (!mode || *mode == Label::Invalid) {
                    throw SchemaError("correlation cell has a bad mode", 0);
                }
                cell.mode = *mode;
                cell.test = test_from_json(r.at("test"));
                cell.significant = r.at("significant").get<bool>();
                bundle.correlations.push_back(cell);
            }
        }
        if (doc.contains("agreement")) {
            for (const json& r : doc.at("agreement")) {
                AgreementRow row;
                row.name = r.at("name").get<std::string>();
                row.alpha.alpha = r.at("alpha").get<double>();
                row.alpha.degenerate = r.value("degenerate", false);
                row.alpha.units_used = r.value("units", std::size_t{0});
                bundle.agreement.push_back(std::move(row));
            }
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad results bundle: ") + e.what(), 0);
    }
    return bundle;
}

ResultsBundle load_bundle(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(util::read_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaError("bundle " + path.string() + " is not JSON: " + e.what(), 0);
    }
    return bundle_from_json(doc);
}

void save_bundle(const std::filesystem::path& path, const ResultsBundle& bundle) {
    util::write_file_atomic(path, bundle_to_json(bundle).dump(2) + "\n");
}

void merge_into(ResultsBundle& dst, const ResultsBundle& src) {
    dst.evaluations.insert(dst.evaluations.end(), src.evaluations.begin(), src.evaluations.end());
    dst.confidence.insert(dst.confidence.end(), src.confidence.begin(), src.confidence.end());
    dst.modes.insert(dst.modes.end(), src.modes.begin(), src.modes.end());
    dst.correlations.insert(dst.correlations.end(), src.correlations.begin(),
                            src.correlations.end());
    dst.agreement.insert(dst.agreement.end(), src.agreement.begin(), src.agreement.end());
}

ReportFormat report_format_from_name(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    throw DataError("unknown report format \"" + name + "\" (json|csv|markdown)");
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

/// Percent-style value (already on the 0-100 scale), 2 decimals.
std::string pct(double v) { return format_fixed(v, 2); }
/// Ratio rendered as a percent, 2 decimals (F1 83.05 style).
std::string ratio_as_pct(double v) { return format_fixed(100.0 * v, 2); }
/// Statistic-style value (r, alpha, confidence, p), 4 decimals.
std::string stat4(double v) { return format_fixed(v, 4); }

struct SortedBundle {
    std::vector<const EvaluationRow*> evaluations;
    std::vector<const ConfidenceByAgreement*> confidence;
    std::vector<const ModeRow*> modes;
    std::vector<const SenseModeCorrelation*> correlations;
    std::vector<const AgreementRow*> agreement;
};

SortedBundle sorted_views(const ResultsBundle& bundle) {
    SortedBundle s;
    for (const auto& r : bundle.evaluations) s.evaluations.push_back(&r);
    std::sort(s.evaluations.begin(), s.evaluations.end(),
              [](auto* a, auto* b) { return a->annotator_id < b->annotator_id; });

    for (const auto& r : bundle.confidence) s.confidence.push_back(&r);
    std::sort(s.confidence.begin(), s.confidence.end(), [](auto* a, auto* b) {
        return std::tie(a->grouping_name, a->target_annotator) <
               std::tie(b->grouping_name, b->target_annotator);
    });

    for (const auto& r : bundle.modes) s.modes.push_back(&r);
    std::sort(s.modes.begin(), s.modes.end(), [](auto* a, auto* b) {
        if (a->dist.pct_internal != b->dist.pct_internal) {
            return a->dist.pct_internal > b->dist.pct_internal;  // most internal first
        }
        return a->dist.doc_id < b->dist.doc_id;
    });

    for (const auto& r : bundle.correlations) s.correlations.push_back(&r);
    std::sort(s.correlations.begin(), s.correlations.end(), [](auto* a, auto* b) {
        return std::tie(a->sense, a->mode) < std::tie(b->sense, b->mode);
    });

    for (const auto& r : bundle.agreement) s.agreement.push_back(&r);
    std::sort(s.agreement.begin(), s.agreement.end(),
              [](auto* a, auto* b) { return a->name < b->name; });
    return s;
}

std::string correlation_cell(const SenseModeCorrelation* cell) {
    std::string out = cell->significant ? "*" : "";
    return out + stat4(cell->test.statistic);
}

std::string render_markdown(const SortedBundle& s) {
    std::ostringstream out;
    out << "# Focalization Report\n";

    if (!s.evaluations.empty()) {
        out << "\n## Annotation Performance\n\n";
        out << "| Model | Internal F1 | External F1 | Zero F1 | Precision | Recall | F1 |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (const auto* row : s.evaluations) {
            out << "| " << row->annotator_id;
            for (std::size_t c = 0; c < 3; ++c) {
                out << " | " << ratio_as_pct(row->prf.per_class[c].f1);
            }
            out << " | " << ratio_as_pct(row->prf.weighted_precision) << " | "
                << ratio_as_pct(row->prf.weighted_recall) << " | "
                << ratio_as_pct(row->prf.weighted_f1) << " |\n";
        }
    }

    if (!s.confidence.empty()) {
        out << "\n## Confidence by Agreement\n\n";
        out << "| Grouping | Target | Agree | Disagree | t | p |\n";
        out << "|---|---|---|---|---|---|\n";
        for (const auto* row : s.confidence) {
            auto side = [](const analytics::AgreementConditionStats& x) {
                if (x.n == 0) return std::string("-");
                return stat4(x.mean_confidence) + " (±" + stat4(x.std_confidence) + ")";
            };
            out << "| " << row->grouping_name << " | " << row->target_annotator << " | "
                << side(row->agree) << " | " << side(row->disagree) << " | ";
            if (row->test) {
                out << stat4(row->test->statistic) << " | " << stat4(row->test->p_value);
            } else {
                out << "- | -";
            }
            out << " |\n";
        }
    }

    if (!s.modes.empty()) {
        out << "\n## Focalization Modes by Novel\n\n";
        out << "| Novel | % Internal | % External | % Zero |\n";
        out << "|---|---|---|---|\n";
        for (const auto* row : s.modes) {
            const std::string& name = row->title.empty() ? row->dist.doc_id : row->title;
            out << "| " << name << " | " << pct(row->dist.pct_internal) << " | "
                << pct(row->dist.pct_external) << " | " << pct(row->dist.pct_zero) << " |\n";
        }
    }

    if (!s.correlations.empty()) {
        out << "\n## Sense Correlations\n\n";
        out << "| Sense | Internal | External | Zero |\n";
        out << "|---|---|---|---|\n";
        // 18 cells regrouped into one row per axis, starred where p < 0.05
        std::map<analytics::Sense, std::array<const SenseModeCorrelation*, 3>> by_sense;
        for (const auto* cell : s.correlations) {
            by_sense[cell->sense][static_cast<std::size_t>(cell->mode)] = cell;
        }
        for (const auto& [sense, cells] : by_sense) {
            out << "| " << analytics::sense_display_name(sense);
            for (const auto* cell : cells) {
                out << " | " << (cell ? correlation_cell(cell) : std::string("-"));
            }
            out << " |\n";
        }
    }

    if (!s.agreement.empty()) {
        out << "\n## Inter-annotator Agreement\n\n";
        out << "| Comparison | Alpha | Units |\n";
        out << "|---|---|---|\n";
        for (const auto* row : s.agreement) {
            out << "| " << row->name << " | " << stat4(row->alpha.alpha)
                << (row->alpha.degenerate ? " (degenerate)" : "") << " | "
                << row->alpha.units_used << " |\n";
        }
    }
    return out.str();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(std::vector<std::filesystem::path>& written, const std::filesystem::path& path,
               const std::vector<std::vector<std::string>>& rows) {
    std::string content;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) content += ',';
            content += csv_escape(row[i]);
        }
        content += '\n';
    }
    util::write_file_atomic(path, content);
    written.push_back(path);
}

std::filesystem::path section_path(const std::filesystem::path& out, const std::string& section) {
    std::filesystem::path p = out;
    const std::string stem = p.stem().string();
    const std::string ext = p.extension().string();
    p.replace_filename(stem + "-" + section + (ext.empty() ? ".csv" : ext));
    return p;
}

std::vector<std::filesystem::path> render_csv(const SortedBundle& s,
                                              const std::filesystem::path& out) {
    std::vector<std::filesystem::path> written;
    if (!s.evaluations.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"model", "internal_f1", "external_f1", "zero_f1", "precision", "recall",
                        "f1", "support"});
        for (const auto* row : s.evaluations) {
            rows.push_back({row->annotator_id, ratio_as_pct(row->prf.per_class[0].f1),
                            ratio_as_pct(row->prf.per_class[1].f1),
                            ratio_as_pct(row->prf.per_class[2].f1),
                            ratio_as_pct(row->prf.weighted_precision),
                            ratio_as_pct(row->prf.weighted_recall),
                            ratio_as_pct(row->prf.weighted_f1),
                            std::to_string(row->prf.total_support)});
        }
        write_csv(written, section_path(out, "evaluation"), rows);
    }
    if (!s.confidence.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"grouping", "target", "agree_mean", "agree_std", "agree_n",
                        "disagree_mean", "disagree_std", "disagree_n", "t", "p"});
        for (const auto* row : s.confidence) {
            rows.push_back({row->grouping_name, row->target_annotator,
                            stat4(row->agree.mean_confidence), stat4(row->agree.std_confidence),
                            std::to_string(row->agree.n), stat4(row->disagree.mean_confidence),
                            stat4(row->disagree.std_confidence), std::to_string(row->disagree.n),
                            row->test ? stat4(row->test->statistic) : "",
                            row->test ? stat4(row->test->p_value) : ""});
        }
        write_csv(written, section_path(out, "confidence"), rows);
    }
    if (!s.modes.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"doc_id", "title", "pct_internal", "pct_external", "pct_zero",
                        "n_excerpts", "n_invalid"});
        for (const auto* row : s.modes) {
            rows.push_back({row->dist.doc_id, row->title, pct(row->dist.pct_internal),
                            pct(row->dist.pct_external), pct(row->dist.pct_zero),
                            std::to_string(row->dist.n_excerpts),
                            std::to_string(row->dist.n_invalid)});
        }
        write_csv(written, section_path(out, "modes"), rows);
    }
    if (!s.correlations.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"sense", "mode", "r", "p", "significant"});
        for (const auto* cell : s.correlations) {
            rows.push_back({analytics::sense_name(cell->sense), annotation::label_name(cell->mode),
                            stat4(cell->test.statistic), stat4(cell->test.p_value),
                            cell->significant ? "true" : "false"});
        }
        write_csv(written, section_path(out, "correlations"), rows);
    }
    if (!s.agreement.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"name", "alpha", "degenerate", "units"});
        for (const auto* row : s.agreement) {
            rows.push_back({row->name, stat4(row->alpha.alpha),
                            row->alpha.degenerate ? "true" : "false",
                            std::to_string(row->alpha.units_used)});
        }
        write_csv(written, section_path(out, "agreement"), rows);
    }
    return written;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const ResultsBundle& bundle, ReportFormat format,
                                               const std::filesystem::path& out) {
    if (bundle.empty()) throw DataError("results bundle is empty; nothing to report");
    const SortedBundle s = sorted_views(bundle);
    std::vector<std::filesystem::path> written;
    switch (format) {
        case ReportFormat::Json: {
            // normalized copy so emission order matches the other formats
            ResultsBundle ordered;
            for (const auto* r : s.evaluations) ordered.evaluations.push_back(*r);
            for (const auto* r : s.confidence) ordered.confidence.push_back(*r);
            for (const auto* r : s.modes) ordered.modes.push_back(*r);
            for (const auto* r : s.correlations) ordered.correlations.push_back(*r);
            for (const auto* r : s.agreement) ordered.agreement.push_back(*r);
            util::write_file_atomic(out, bundle_to_json(ordered).dump(2) + "\n");
            written.push_back(out);
            break;
        }
        case ReportFormat::Csv:
            written = render_csv(s, out);
            break;
        case ReportFormat::Markdown:
            util::write_file_atomic(out, render_markdown(s));
            written.push_back(out);
            break;
    }
    return written;
}

void append_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    json doc{{"run_id", manifest.run_id},
             {"command", manifest.command},
             {"argv", manifest.argv},
             {"input_digests", manifest.input_digests},
             {"output_digests", manifest.output_digests},
             {"backend", manifest.backend},
             {"prompt_id", manifest.prompt_id},
             {"started_at", manifest.started_at},
             {"finished_at", manifest.finished_at}};
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to manifest " + path.string());
    out << doc.dump() << "\n";
    if (!out) throw IoError("failed writing manifest " + path.string());
}

}  // namespace focalize::reports
