#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "focalize/analytics.hpp"
#include "focalize/metrics.hpp"

namespace focalize::reports {

/// One scored annotator in the evaluation section.
struct EvaluationRow {
    std::string annotator_id;
    metrics::PRFReport prf;
};

/// One document row in the mode-distribution section.
struct ModeRow {
    analytics::ModeDistribution dist;
    std::string title;  // display name; falls back to doc_id when empty
};

/// One reliability comparison (e.g. "humans", "runs", "prompts").
struct AgreementRow {
    std::string name;
    metrics::AlphaResult alpha;
};

/// Everything a report can render. Sections are optional; commands emit
/// bundle fragments that `report` merges.
struct ResultsBundle {
    std::vector<EvaluationRow> evaluations;
    std::vector<analytics::ConfidenceByAgreement> confidence;
    std::vector<ModeRow> modes;
    std::vector<analytics::SenseModeCorrelation> correlations;
    std::vector<AgreementRow> agreement;

    bool empty() const;
};

nlohmann::json bundle_to_json(const ResultsBundle& bundle);
ResultsBundle bundle_from_json(const nlohmann::json& doc);

ResultsBundle load_bundle(const std::filesystem::path& path);
void save_bundle(const std::filesystem::path& path, const ResultsBundle& bundle);

/// Appends src's sections onto dst's.
void merge_into(ResultsBundle& dst, const ResultsBundle& src);

enum class ReportFormat { Json, Csv, Markdown };
ReportFormat report_format_from_name(const std::string& name);

/// Renders the bundle to `out` (csv fans out to one file per section next
/// to `out`). Byte-deterministic: stable row ordering, percentages and
/// F1-as-percent at 2 decimals, r/alpha/confidence/p at 4. Throws DataError
/// on an empty bundle; never writes an empty file.
std::vector<std::filesystem::path> emit_report(const ResultsBundle& bundle, ReportFormat format,
                                               const std::filesystem::path& out);

/// Reproducibility envelope for one CLI invocation, appended as one JSONL
/// line per run. Input/output digests are SHA-256; the backend snapshot
/// never includes a key value.
struct RunManifest {
    std::string run_id;
    std::string command;
    std::vector<std::string> argv;
    std::map<std::string, std::string> input_digests;
    std::map<std::string, std::string> output_digests;
    nlohmann::json backend;  // redacted snapshot or null
    std::string prompt_id;
    std::string started_at;
    std::string finished_at;
};

void append_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace focalize::reports
