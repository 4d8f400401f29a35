// Python bindings for the focalization toolkit. Labels cross the boundary
// as lowercase strings ("internal", "external", "zero", "invalid"); excerpts
// and results travel as plain dicts so callers need no C++ types.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "focalize/analytics.hpp"
#include "focalize/annotation.hpp"
#include "focalize/classifiers.hpp"
#include "focalize/corpus.hpp"
#include "focalize/errors.hpp"
#include "focalize/features.hpp"
#include "focalize/llm.hpp"
#include "focalize/metrics.hpp"
#include "focalize/prompts.hpp"
#include "focalize/stats.hpp"

namespace py = pybind11;
using namespace focalize;
using annotation::Label;

namespace {

Label label_arg(const std::string& name) {
    const auto label = annotation::label_from_name(name);
    if (!label) throw DataError("unknown label \"" + name + "\"");
    return *label;
}

Label gold_label_arg(const std::string& name) {
    const auto label = label_arg(name);
    if (label == Label::Invalid) throw DataError("gold labels cannot be \"invalid\"");
    return label;
}

py::dict excerpt_to_dict(const corpus::Excerpt& ex) {
    py::dict out;
    out["excerpt_id"] = ex.excerpt_id;
    out["doc_id"] = ex.doc_id;
    out["source_index"] = ex.source_index;
    out["ordinal"] = ex.ordinal;
    out["text"] = ex.text;
    out["word_count"] = ex.word_count;
    return out;
}

corpus::Excerpt excerpt_from_dict(const py::dict& d) {
    corpus::Excerpt ex;
    ex.excerpt_id = py::cast<std::string>(d["excerpt_id"]);
    ex.doc_id = py::cast<std::string>(d["doc_id"]);
    ex.source_index = py::cast<std::size_t>(d["source_index"]);
    ex.ordinal = py::cast<std::size_t>(d["ordinal"]);
    ex.text = py::cast<std::string>(d["text"]);
    ex.word_count = py::cast<std::size_t>(d["word_count"]);
    return ex;
}

py::dict test_result_to_dict(const stats::TestResult& r) {
    py::dict out;
    out["statistic"] = r.statistic;
    out["p_value"] = r.p_value;
    out["df1"] = r.df1;
    out["df2"] = r.df2;
    return out;
}

py::dict prf_to_dict(const metrics::PRFReport& report) {
    py::dict out;
    py::dict per_class;
    const char* names[] = {"internal", "external", "zero"};
    for (std::size_t c = 0; c < 3; ++c) {
        py::dict row;
        row["precision"] = report.per_class[c].precision;
        row["recall"] = report.per_class[c].recall;
        row["f1"] = report.per_class[c].f1;
        row["support"] = report.per_class[c].support;
        per_class[names[c]] = row;
    }
    out["per_class"] = per_class;
    out["weighted_precision"] = report.weighted_precision;
    out["weighted_recall"] = report.weighted_recall;
    out["weighted_f1"] = report.weighted_f1;
    out["total_support"] = report.total_support;
    return out;
}

/// Feature pipeline plus classifier, mirroring the CLI's train-baseline.
struct PyBaseline {
    baseline::TrainedBaseline model;

    std::pair<std::string, std::map<std::string, double>> predict(const std::string& text) const {
        const auto [label, posterior] = model.predict(text);
        std::map<std::string, double> named;
        for (const auto& [l, p] : posterior) named[annotation::label_name(l)] = p;
        return {annotation::label_name(label), named};
    }
};

PyBaseline train_baseline(const std::vector<std::string>& texts,
                          const std::vector<std::string>& labels, const std::string& kind,
                          const std::string& features, int ngram_max, double lambda) {
    if (texts.size() != labels.size()) {
        throw LengthMismatch("texts and labels differ in length");
    }
    std::vector<Label> parsed;
    parsed.reserve(labels.size());
    for (const auto& name : labels) parsed.push_back(gold_label_arg(name));

    PyBaseline out;
    out.model.features =
        baseline::fit_vectorizer(texts, baseline::weighting_from_name(features), ngram_max);
    std::vector<baseline::FeatureVector> vectors;
    vectors.reserve(texts.size());
    for (const auto& text : texts) {
        vectors.push_back(baseline::vectorize(text, out.model.features));
    }
    if (kind == "nb") {
        out.model.kind = "naive_bayes";
        out.model.nb = baseline::nb_fit(vectors, parsed, out.model.features.vocab_size());
    } else if (kind == "logreg") {
        out.model.kind = "logistic_regression";
        out.model.logreg =
            baseline::logreg_fit(vectors, parsed, out.model.features.vocab_size(), lambda);
    } else {
        throw DataError("kind must be \"nb\" or \"logreg\", got \"" + kind + "\"");
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_focalize, m) {
    m.doc() = "Narrative-focalization annotation and analysis toolkit";

    const auto base = py::register_exception<Error>(m, "FocalizeError");
    py::register_exception<BackendError>(m, "BackendError", base);
    py::register_exception<DataError>(m, "DataError", base);

    // corpus
    m.def("count_words", &corpus::count_words, py::arg("text"),
          "Whitespace-delimited tokens containing at least one alphanumeric character");
    m.def(
        "segment",
        [](const std::string& body, const std::string& doc_id, std::size_t min_words,
           const std::string& title, std::optional<std::size_t> front_matter_end,
           std::optional<std::size_t> back_matter_start) {
            corpus::Document doc;
            doc.doc_id = doc_id;
            doc.title = title.empty() ? doc_id : title;
            doc.body = body;
            doc.front_matter_end = front_matter_end;
            doc.back_matter_start = back_matter_start;
            py::list out;
            for (const auto& ex : corpus::segment(doc, min_words)) {
                out.append(excerpt_to_dict(ex));
            }
            return out;
        },
        py::arg("body"), py::arg("doc_id"), py::arg("min_words") = 50, py::arg("title") = "",
        py::arg("front_matter_end") = py::none(), py::arg("back_matter_start") = py::none(),
        "Split a document into paragraph excerpts of at least min_words words");
    m.def(
        "sample_excerpts",
        [](const std::vector<py::dict>& excerpts, std::size_t n, std::uint64_t seed) {
            std::vector<corpus::Excerpt> pool;
            pool.reserve(excerpts.size());
            for (const auto& d : excerpts) pool.push_back(excerpt_from_dict(d));
            py::list out;
            for (const auto& ex : corpus::sample_excerpts(pool, n, seed)) {
                out.append(excerpt_to_dict(ex));
            }
            return out;
        },
        py::arg("excerpts"), py::arg("n"), py::arg("seed") = 7,
        "Deterministic uniform sample without replacement");

    // annotation
    m.def(
        "parse_label",
        [](const std::string& raw) { return annotation::label_name(annotation::parse_label(raw)); },
        py::arg("raw"), "Lenient first-word label parse; unmatched replies become \"invalid\"");
    m.def(
        "majority_label",
        [](const std::vector<std::string>& names) -> std::optional<std::string> {
            std::vector<Label> labels;
            labels.reserve(names.size());
            for (const auto& name : names) labels.push_back(label_arg(name));
            const auto winner = annotation::majority_label(labels);
            if (!winner) return std::nullopt;
            return annotation::label_name(*winner);
        },
        py::arg("labels"), "Strict-majority vote after dropping invalid entries");

    // reliability and accuracy
    m.def(
        "krippendorff_alpha",
        [](const std::vector<std::vector<int>>& rows) {
            metrics::ReliabilityMatrix matrix;
            matrix.n_annotators = rows.empty() ? 0 : rows.front().size();
            for (const auto& row : rows) matrix.add_unit(row);
            const auto result = metrics::krippendorff_alpha(matrix);
            py::dict out;
            out["alpha"] = result.alpha;
            out["degenerate"] = result.degenerate;
            out["units_used"] = result.units_used;
            return out;
        },
        py::arg("rows"),
        "Nominal-scale alpha over units x annotators rows; -1 marks a missing cell");
    m.def(
        "prf",
        [](const std::map<std::string, std::string>& gold,
           const std::map<std::string, std::string>& predictions) {
            annotation::GoldDataset dataset;
            dataset.name = "gold";
            for (const auto& [id, name] : gold) dataset.entries[id] = gold_label_arg(name);
            std::map<std::string, Label> predicted;
            for (const auto& [id, name] : predictions) predicted[id] = label_arg(name);
            return prf_to_dict(metrics::prf(metrics::confusion(dataset, predicted)));
        },
        py::arg("gold"), py::arg("predictions"),
        "Per-class and support-weighted precision/recall/F1 over excerpt_id -> label maps");

    // statistics
    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            return test_result_to_dict(stats::pearson(x, y));
        },
        py::arg("x"), py::arg("y"));
    m.def(
        "anova_oneway",
        [](const std::vector<std::vector<double>>& groups) {
            return test_result_to_dict(stats::anova_oneway(groups));
        },
        py::arg("groups"));
    m.def(
        "welch_t",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return test_result_to_dict(stats::welch_t(a, b));
        },
        py::arg("a"), py::arg("b"));

    // prompting
    m.def("prompt_ids", [] { return llm::prompt_ids(); },
          "Known template ids, base first");
    m.def(
        "build_prompt",
        [](const std::string& prompt_id, const std::string& text) {
            corpus::Excerpt ex;
            ex.excerpt_id = "py:0";
            ex.doc_id = "py";
            ex.text = text;
            ex.word_count = corpus::count_words(text);
            return llm::build_prompt(llm::prompt_template(prompt_id), ex);
        },
        py::arg("prompt_id"), py::arg("text"),
        "Template body + \"EXCERPT:\" heading + the excerpt text");
    m.def("confidence_from_logprob", &llm::confidence_from_logprob, py::arg("logprob"),
          "exp(logprob), None for -inf; rejects positive logprobs");

    // baselines
    m.def("tokenize", &baseline::tokenize, py::arg("text"),
          "Lowercase alphanumeric runs of >= 2 characters");
    py::class_<PyBaseline>(m, "TrainedBaseline")
        .def("predict", &PyBaseline::predict, py::arg("text"),
             "Returns (label, posterior dict); posterior sums to 1")
        .def_property_readonly("kind",
                               [](const PyBaseline& b) { return b.model.kind; });
    m.def("train_baseline", &train_baseline, py::arg("texts"), py::arg("labels"),
          py::arg("kind") = "nb", py::arg("features") = "count", py::arg("ngram_max") = 1,
          py::arg("lambda_") = 1.0,
          "Fit a count/tf-idf vectorizer plus naive Bayes or logistic regression");

    // analytics
    m.def(
        "mode_percentages",
        [](const std::vector<std::string>& labels, const std::string& doc_id) {
            std::vector<annotation::AnnotationRecord> records;
            records.reserve(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i) {
                annotation::AnnotationRecord rec;
                rec.excerpt_id = doc_id + ":" + std::to_string(i);
                rec.annotator_id = "py";
                rec.label = label_arg(labels[i]);
                records.push_back(std::move(rec));
            }
            const auto dist = analytics::mode_distribution(records, "py", doc_id);
            py::dict out;
            out["doc_id"] = dist.doc_id;
            out["pct_internal"] = dist.pct_internal;
            out["pct_external"] = dist.pct_external;
            out["pct_zero"] = dist.pct_zero;
            out["n_excerpts"] = dist.n_excerpts;
            out["n_invalid"] = dist.n_invalid;
            return out;
        },
        py::arg("labels"), py::arg("doc_id") = "doc",
        "Mode percentages over one document's labels; invalid entries are excluded");
    m.def(
        "sensorimotor_profile",
        [](const std::string& doc_id, const std::string& text, const std::string& lexicon_csv) {
            const auto lexicon = analytics::load_lexicon_csv(lexicon_csv);
            const auto profile = analytics::sensorimotor_profile(doc_id, text, lexicon);
            py::dict out;
            out["doc_id"] = profile.doc_id;
            out["lexicon_token_count"] = profile.lexicon_token_count;
            py::dict means;
            for (std::size_t a = 0; a < analytics::kNumSenses; ++a) {
                means[py::str(analytics::sense_name(static_cast<analytics::Sense>(a)))] =
                    profile.mean_strength[a];
            }
            out["mean_strength"] = means;
            return out;
        },
        py::arg("doc_id"), py::arg("text"), py::arg("lexicon_csv"),
        "Mean perceptual strength per axis over lexicon-matched tokens");
}
