// focalize: segment novels, sample/annotate excerpts via an OpenAI-compatible
// backend or classical baselines, then score agreement, accuracy, and
// corpus-level mode analytics into reproducible reports.

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "focalize/analytics.hpp"
#include "focalize/annotation.hpp"
#include "focalize/classifiers.hpp"
#include "focalize/corpus.hpp"
#include "focalize/errors.hpp"
#include "focalize/llm.hpp"
#include "focalize/metrics.hpp"
#include "focalize/prompts.hpp"
#include "focalize/reports.hpp"
#include "focalize/util.hpp"

namespace {

using namespace focalize;

struct GlobalOpts {
    std::string manifest_path = "focalize-manifest.jsonl";
    bool no_manifest = false;
};

/// Collects digests over one command's lifetime and appends a manifest line.
class ManifestWriter {
public:
    ManifestWriter(const GlobalOpts& global, std::string command,
                   std::vector<std::string> argv)
        : enabled_(!global.no_manifest), path_(global.manifest_path) {
        manifest_.command = std::move(command);
        manifest_.argv = std::move(argv);
        manifest_.started_at = util::rfc3339_now();
        std::random_device rd;
        manifest_.run_id =
            manifest_.started_at + "-" +
            util::sha256_hex(manifest_.command + std::to_string(rd())).substr(0, 8);
        manifest_.backend = nullptr;
    }

    void add_input(const std::filesystem::path& p) {
        if (enabled_) manifest_.input_digests[p.string()] = util::sha256_file(p);
    }
    void add_output(const std::filesystem::path& p) {
        if (enabled_) manifest_.output_digests[p.string()] = util::sha256_file(p);
    }
    void set_backend(const llm::BackendConfig& config) {
        manifest_.backend = {{"base_url", config.base_url},
                             {"model", config.model_name},
                             {"top_p", config.top_p},
                             {"logprobs", config.want_logprobs},
                             {"api_key_env", config.api_key_env},
                             {"api_key", "<redacted>"}};
    }
    void set_prompt(const std::string& prompt_id) { manifest_.prompt_id = prompt_id; }

    void finish() {
        if (!enabled_) return;
        manifest_.finished_at = util::rfc3339_now();
        reports::append_manifest(path_, manifest_);
    }

private:
    bool enabled_;
    std::filesystem::path path_;
    reports::RunManifest manifest_;
};

std::vector<std::string> collect_argv(int argc, char** argv) {
    std::vector<std::string> out;
    for (int i = 0; i < argc; ++i) out.emplace_back(argv[i]);
    return out;
}

/// excerpt_id is "<doc_id>:<source_index>"; strips the trailing index.
std::string doc_of(const std::string& excerpt_id) {
    const auto pos = excerpt_id.rfind(':');
    if (pos == std::string::npos || pos == 0) {
        throw DataError("excerpt id \"" + excerpt_id + "\" has no <doc>:<index> form");
    }
    return excerpt_id.substr(0, pos);
}

std::map<std::string, std::string> parse_title_flags(const std::vector<std::string>& flags) {
    std::map<std::string, std::string> titles;
    for (const auto& flag : flags) {
        const auto eq = flag.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw DataError("--title wants doc_id=Title, got \"" + flag + "\"");
        }
        titles[flag.substr(0, eq)] = flag.substr(eq + 1);
    }
    return titles;
}

// ---------------------------------------------------------------------------
// subcommand wiring

void add_segment(CLI::App& app, const GlobalOpts& global, std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string in, out, doc_id, title, sidecar;
        std::size_t min_words = 50;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("segment", "Split a novel into qualifying excerpts");
    cmd->add_option("--in", opts->in, "Plain-text novel file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "Excerpt JSONL to write")->required();
    cmd->add_option("--doc-id", opts->doc_id, "Document id (default: input file stem)");
    cmd->add_option("--title", opts->title, "Display title (default: doc id)");
    cmd->add_option("--sidecar", opts->sidecar,
                    "JSON/TOML sidecar with front_matter_end / back_matter_start offsets")
        ->check(CLI::ExistingFile);
    cmd->add_option("--min-words", opts->min_words, "Minimum words per excerpt")
        ->capture_default_str();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "segment", argv_copy);
        const std::string doc_id =
            opts->doc_id.empty() ? std::filesystem::path(opts->in).stem().string()
                                 : opts->doc_id;
        const std::string title = opts->title.empty() ? doc_id : opts->title;
        manifest.add_input(opts->in);
        std::optional<std::filesystem::path> sidecar;
        if (!opts->sidecar.empty()) {
            sidecar = opts->sidecar;
            manifest.add_input(*sidecar);
        }
        const auto document = corpus::load_document(opts->in, doc_id, title, sidecar);
        const auto excerpts = corpus::segment(document, opts->min_words);
        corpus::save_excerpts(opts->out, excerpts);
        manifest.add_output(opts->out);
        manifest.finish();
        std::cout << "wrote " << excerpts.size() << " excerpts to " << opts->out << "\n";
    });
}

void add_sample(CLI::App& app, const GlobalOpts& global, std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string in, out;
        std::size_t n = 16;
        std::uint64_t seed = 7;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("sample", "Draw a deterministic uniform excerpt sample");
    cmd->add_option("--in", opts->in, "Excerpt JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "Sampled excerpt JSONL")->required();
    cmd->add_option("--n", opts->n, "Sample size")->capture_default_str();
    cmd->add_option("--seed", opts->seed, "RNG seed")->capture_default_str();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "sample", argv_copy);
        manifest.add_input(opts->in);
        const auto excerpts = corpus::load_excerpts(opts->in);
        const auto sample = corpus::sample_excerpts(excerpts, opts->n, opts->seed);
        corpus::save_excerpts(opts->out, sample);
        manifest.add_output(opts->out);
        manifest.finish();
        std::cout << "sampled " << sample.size() << " of " << excerpts.size() << " excerpts\n";
    });
}

void add_train_baseline(CLI::App& app, const GlobalOpts& global,
                        std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string excerpts, gold, out, kind = "nb", features = "count";
        std::string eval_excerpts, predict_out, annotator_id;
        int ngram_max = 1;
        double lambda = 1.0;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd =
        app.add_subcommand("train-baseline", "Fit a term-frequency baseline classifier");
    cmd->add_option("--train-excerpts", opts->excerpts, "Training excerpt JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--train-gold", opts->gold, "Training label JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "Model JSON to write")->required();
    cmd->add_option("--model", opts->kind, "nb | logreg")
        ->check(CLI::IsMember({"nb", "logreg"}))
        ->capture_default_str();
    cmd->add_option("--features", opts->features, "count | tfidf")
        ->check(CLI::IsMember({"count", "tfidf"}))
        ->capture_default_str();
    cmd->add_option("--ngram-max", opts->ngram_max, "Use n-grams 1..N (N in 1..3)")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    cmd->add_option("--lambda", opts->lambda, "L2 strength for logreg")->capture_default_str();
    cmd->add_option("--eval-excerpts", opts->eval_excerpts,
                    "Optional excerpt JSONL to predict after training")
        ->check(CLI::ExistingFile);
    cmd->add_option("--predict-out", opts->predict_out,
                    "Annotation JSONL for --eval-excerpts predictions");
    cmd->add_option("--annotator-id", opts->annotator_id,
                    "Annotator id for predictions (default e.g. nb:count:1-2)");
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "train-baseline", argv_copy);
        manifest.add_input(opts->excerpts);
        manifest.add_input(opts->gold);
        const auto excerpts = corpus::load_excerpts(opts->excerpts);
        const auto gold = annotation::load_gold(opts->gold);

        std::vector<std::string> texts;
        std::vector<annotation::Label> labels;
        for (const auto& ex : excerpts) {
            const auto it = gold.entries.find(ex.excerpt_id);
            if (it == gold.entries.end()) continue;
            texts.push_back(ex.text);
            labels.push_back(it->second);
        }
        if (texts.empty()) throw NoOverlap("no training excerpt has a gold label");

        baseline::TrainedBaseline model;
        model.features = baseline::fit_vectorizer(
            texts, baseline::weighting_from_name(opts->features), opts->ngram_max);
        std::vector<baseline::FeatureVector> vectors;
        vectors.reserve(texts.size());
        for (const auto& text : texts) {
            vectors.push_back(baseline::vectorize(text, model.features));
        }
        if (opts->kind == "nb") {
            model.kind = "naive_bayes";
            model.nb = baseline::nb_fit(vectors, labels, model.features.vocab_size());
        } else {
            model.kind = "logistic_regression";
            model.logreg = baseline::logreg_fit(vectors, labels, model.features.vocab_size(),
                                                opts->lambda);
            if (!model.logreg.converged) {
                std::cerr << "warning: optimizer stopped before tolerance ("
                          << model.logreg.iterations << " iterations)\n";
            }
        }
        baseline::save_baseline(opts->out, model);
        manifest.add_output(opts->out);
        std::cout << "trained " << model.kind << " on " << texts.size() << " excerpts, vocab "
                  << model.features.vocab_size() << "\n";

        if (!opts->eval_excerpts.empty() || !opts->predict_out.empty()) {
            if (opts->eval_excerpts.empty() || opts->predict_out.empty()) {
                throw DataError("--eval-excerpts and --predict-out go together");
            }
            manifest.add_input(opts->eval_excerpts);
            std::string annotator = opts->annotator_id;
            if (annotator.empty()) {
                annotator = std::string(opts->kind == "nb" ? "nb" : "logreg") + ":" +
                            opts->features + ":1-" + std::to_string(opts->ngram_max);
            }
            std::vector<annotation::AnnotationRecord> records;
            for (const auto& ex : corpus::load_excerpts(opts->eval_excerpts)) {
                auto [label, posterior] = model.predict(ex.text);
                annotation::AnnotationRecord rec;
                rec.excerpt_id = ex.excerpt_id;
                rec.annotator_id = annotator;
                rec.label = label;
                rec.confidence = posterior.at(label);
                rec.created_at = util::rfc3339_now();
                records.push_back(std::move(rec));
            }
            annotation::save_annotations(opts->predict_out, records);
            manifest.add_output(opts->predict_out);
            std::cout << "predicted " << records.size() << " excerpts as " << annotator << "\n";
        }
        manifest.finish();
    });
}

void add_annotate(CLI::App& app, const GlobalOpts& global, std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string excerpts, out, prompt = "base", cache_dir = ".focalize-cache";
        llm::BackendConfig backend;
        int runs = 1;
        long timeout_ms = 30000;
        long backoff_ms = 1000;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd =
        app.add_subcommand("annotate", "Label excerpts through a chat-completions backend");
    cmd->add_option("--excerpts", opts->excerpts, "Excerpt JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "Annotation JSONL to write")->required();
    cmd->add_option("--backend-url", opts->backend.base_url, "Base URL, e.g. https://host/v1")
        ->envname("FOCALIZE_BACKEND_URL")
        ->required();
    cmd->add_option("--model", opts->backend.model_name, "Model name sent to the backend")
        ->envname("FOCALIZE_MODEL")
        ->required();
    cmd->add_option("--prompt", opts->prompt, "Prompt template id")
        ->check(CLI::IsMember(llm::prompt_ids()))
        ->capture_default_str();
    cmd->add_option("--runs", opts->runs, "Annotation passes over the corpus")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--cache-dir", opts->cache_dir, "Response cache directory")
        ->capture_default_str();
    cmd->add_option("--top-p", opts->backend.top_p, "Nucleus sampling mass")
        ->capture_default_str();
    cmd->add_flag("!--no-logprobs", opts->backend.want_logprobs,
                  "Do not request token log-probabilities");
    cmd->add_option("--system-message", opts->backend.system_message, "System message")
        ->capture_default_str();
    cmd->add_option("--api-key-env", opts->backend.api_key_env,
                    "Env var holding the bearer token (empty = unauthenticated)")
        ->envname("FOCALIZE_API_KEY_ENV");
    cmd->add_option("--max-retries", opts->backend.max_retries, "Retries on 429/5xx/timeout")
        ->capture_default_str();
    cmd->add_option("--timeout-ms", opts->timeout_ms, "Per-request timeout")
        ->capture_default_str();
    cmd->add_option("--backoff-ms", opts->backoff_ms, "Initial retry backoff")
        ->capture_default_str();
    cmd->add_option("--max-in-flight", opts->backend.max_in_flight, "Parallel request cap")
        ->capture_default_str();
    cmd->add_option("--rps", opts->backend.requests_per_second,
                    "Request rate cap (0 = unthrottled)")
        ->capture_default_str();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "annotate", argv_copy);
        opts->backend.timeout = std::chrono::milliseconds(opts->timeout_ms);
        opts->backend.initial_backoff = std::chrono::milliseconds(opts->backoff_ms);
        manifest.add_input(opts->excerpts);
        manifest.set_backend(opts->backend);
        manifest.set_prompt(opts->prompt);

        const auto excerpts = corpus::load_excerpts(opts->excerpts);
        const auto tmpl = llm::prompt_template(opts->prompt);
        llm::ResponseCache cache(opts->cache_dir);
        const auto records = llm::annotate_corpus(opts->backend, tmpl, excerpts, opts->runs, cache);
        annotation::save_annotations(opts->out, records);
        manifest.add_output(opts->out);
        manifest.finish();

        std::size_t failed = 0;
        for (const auto& rec : records) {
            if (rec.raw_output && rec.raw_output->rfind("[error] ", 0) == 0) ++failed;
        }
        std::cout << "wrote " << records.size() << " records (" << failed << " failed) to "
                  << opts->out << "\n";
        if (!records.empty() && failed == records.size()) {
            throw BackendError("every request failed; first: " + *records.front().raw_output);
        }
    });
}

void add_evaluate(CLI::App& app, const GlobalOpts& global, std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string gold, annotations, annotator, out, markdown;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("evaluate", "Score one annotator against gold labels");
    cmd->add_option("--gold", opts->gold, "Gold JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--annotations", opts->annotations, "Annotation JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--annotator-id", opts->annotator, "Annotator to score")->required();
    cmd->add_option("--out", opts->out, "Results-bundle JSON to write")->required();
    cmd->add_option("--markdown", opts->markdown, "Also render a Markdown table here");
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "evaluate", argv_copy);
        manifest.add_input(opts->gold);
        manifest.add_input(opts->annotations);
        const auto gold = annotation::load_gold(opts->gold);
        const auto records = annotation::load_annotations(opts->annotations);
        const auto matrix = metrics::confusion(gold, records, opts->annotator);
        reports::ResultsBundle bundle;
        bundle.evaluations.push_back({opts->annotator, metrics::prf(matrix)});
        reports::save_bundle(opts->out, bundle);
        manifest.add_output(opts->out);
        if (!opts->markdown.empty()) {
            reports::emit_report(bundle, reports::ReportFormat::Markdown, opts->markdown);
            manifest.add_output(opts->markdown);
        }
        manifest.finish();
        const auto& prf = bundle.evaluations.front().prf;
        std::cout << opts->annotator << ": weighted F1 "
                  << util::format_fixed(100.0 * prf.weighted_f1, 2) << " over "
                  << prf.total_support << " excerpts\n";
    });
}

void add_agreement(CLI::App& app, const GlobalOpts& global, std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string annotations, out, name = "annotators";
        std::vector<std::string> annotators;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd =
        app.add_subcommand("agreement", "Inter-annotator reliability (Krippendorff's alpha)");
    cmd->add_option("--annotations", opts->annotations, "Annotation JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--annotators", opts->annotators, "Annotator ids (comma-separated or repeated)")
        ->required()
        ->delimiter(',');
    cmd->add_option("--name", opts->name, "Comparison name in the report")
        ->capture_default_str();
    cmd->add_option("--out", opts->out, "Results-bundle JSON to write")->required();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "agreement", argv_copy);
        manifest.add_input(opts->annotations);
        if (opts->annotators.size() < 2) throw DataError("--annotators needs >= 2 ids");
        const auto records = annotation::load_annotations(opts->annotations);
        const auto matrix = metrics::reliability_from_records(records, opts->annotators);
        const auto alpha = metrics::krippendorff_alpha(matrix);
        reports::ResultsBundle bundle;
        bundle.agreement.push_back({opts->name, alpha});
        reports::save_bundle(opts->out, bundle);
        manifest.add_output(opts->out);
        manifest.finish();
        std::cout << opts->name << ": alpha " << util::format_fixed(alpha.alpha, 4) << " over "
                  << alpha.units_used << " units"
                  << (alpha.degenerate ? " (degenerate: no expected disagreement)" : "") << "\n";
    });
}

void add_analyze_modes(CLI::App& app, const GlobalOpts& global,
                       std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string annotations, annotator, out;
        std::vector<std::string> docs;
        std::vector<std::string> titles;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd =
        app.add_subcommand("analyze-modes", "Per-document focalization-mode percentages");
    cmd->add_option("--annotations", opts->annotations, "Annotation JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--annotator-id", opts->annotator, "Annotation run to analyze")->required();
    cmd->add_option("--doc-id", opts->docs, "Restrict to these documents (repeatable)");
    cmd->add_option("--title", opts->titles, "Display title per doc, as doc_id=Title");
    cmd->add_option("--out", opts->out, "Results-bundle JSON to write")->required();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "analyze-modes", argv_copy);
        manifest.add_input(opts->annotations);
        const auto records = annotation::load_annotations(opts->annotations);
        const auto titles = parse_title_flags(opts->titles);

        std::map<std::string, std::vector<annotation::AnnotationRecord>> by_doc;
        for (const auto& rec : records) {
            if (rec.annotator_id != opts->annotator) continue;
            by_doc[doc_of(rec.excerpt_id)].push_back(rec);
        }
        if (!opts->docs.empty()) {
            const std::set<std::string> keep(opts->docs.begin(), opts->docs.end());
            for (const auto& doc : keep) {
                if (!by_doc.count(doc)) {
                    throw DataError("no records of " + opts->annotator + " for document " + doc);
                }
            }
            std::erase_if(by_doc, [&](const auto& kv) { return !keep.count(kv.first); });
        }
        if (by_doc.empty()) throw DataError("no records for annotator " + opts->annotator);

        reports::ResultsBundle bundle;
        for (const auto& [doc, doc_records] : by_doc) {
            reports::ModeRow row;
            row.dist = analytics::mode_distribution(doc_records, opts->annotator, doc);
            const auto it = titles.find(doc);
            if (it != titles.end()) row.title = it->second;
            bundle.modes.push_back(std::move(row));
        }
        reports::save_bundle(opts->out, bundle);
        manifest.add_output(opts->out);
        manifest.finish();
        std::cout << "analyzed " << bundle.modes.size() << " documents\n";
    });
}

void add_sensorimotor(CLI::App& app, const GlobalOpts& global,
                      std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string excerpts, lexicon, modes_bundle, out, profiles_csv;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "sensorimotor", "Per-document perceptual-strength profiles and mode correlations");
    cmd->add_option("--excerpts", opts->excerpts, "Excerpt JSONL (full corpus)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--lexicon", opts->lexicon, "Sensorimotor norms CSV")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--modes-bundle", opts->modes_bundle,
                    "Bundle with a modes section to correlate against")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "Results-bundle JSON for the correlations");
    cmd->add_option("--profiles-csv", opts->profiles_csv, "Raw per-document profile CSV");
    cmd->callback([&, opts] {
        if (opts->profiles_csv.empty() && (opts->modes_bundle.empty() || opts->out.empty())) {
            throw CLI::ValidationError(
                "sensorimotor",
                "pass --modes-bundle with --out, or --profiles-csv, or both");
        }
        ManifestWriter manifest(global, "sensorimotor", argv_copy);
        manifest.add_input(opts->excerpts);
        manifest.add_input(opts->lexicon);
        const auto lexicon = analytics::load_lexicon_csv(opts->lexicon);

        std::map<std::string, std::vector<std::string>> tokens_by_doc;
        for (const auto& ex : corpus::load_excerpts(opts->excerpts)) {
            auto toks = baseline::tokenize(ex.text);
            auto& bucket = tokens_by_doc[ex.doc_id];
            bucket.insert(bucket.end(), toks.begin(), toks.end());
        }
        std::vector<analytics::SensorimotorProfile> profiles;
        for (const auto& [doc, tokens] : tokens_by_doc) {
            profiles.push_back(analytics::profile_from_tokens(doc, tokens, lexicon));
        }

        if (!opts->profiles_csv.empty()) {
            std::string csv = "doc_id,lexicon_tokens";
            for (std::size_t a = 0; a < analytics::kNumSenses; ++a) {
                csv += "," + analytics::sense_name(static_cast<analytics::Sense>(a));
            }
            csv += "\n";
            for (const auto& p : profiles) {
                csv += p.doc_id + "," + std::to_string(p.lexicon_token_count);
                for (double m : p.mean_strength) csv += "," + util::format_fixed(m, 4);
                csv += "\n";
            }
            util::write_file_atomic(opts->profiles_csv, csv);
            manifest.add_output(opts->profiles_csv);
        }

        if (!opts->modes_bundle.empty()) {
            manifest.add_input(opts->modes_bundle);
            const auto modes = reports::load_bundle(opts->modes_bundle);
            if (modes.modes.empty()) {
                throw DataError("bundle " + opts->modes_bundle + " has no modes section");
            }
            std::vector<analytics::ModeDistribution> dists;
            for (const auto& row : modes.modes) dists.push_back(row.dist);
            reports::ResultsBundle bundle;
            bundle.correlations = analytics::correlate_senses(profiles, dists);
            reports::save_bundle(opts->out, bundle);
            manifest.add_output(opts->out);
            std::cout << "correlated " << profiles.size() << " documents into "
                      << bundle.correlations.size() << " cells\n";
        } else {
            std::cout << "profiled " << profiles.size() << " documents\n";
        }
        manifest.finish();
    });
}

void add_confidence_table(CLI::App& app, const GlobalOpts& global,
                          std::vector<std::string>& argv_copy) {
    struct Opts {
        std::string annotations, target, out, name = "grouping";
        std::vector<std::string> grouping;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("confidence-table",
                                       "Target confidence when a grouping agrees vs disagrees");
    cmd->add_option("--annotations", opts->annotations, "Annotation JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--grouping", opts->grouping,
                    "Annotator ids whose unanimity partitions the excerpts")
        ->required()
        ->delimiter(',');
    cmd->add_option("--grouping-name", opts->name, "Row label in the report")
        ->capture_default_str();
    cmd->add_option("--target", opts->target, "Annotator whose confidence is compared")
        ->required();
    cmd->add_option("--out", opts->out, "Results-bundle JSON to write")->required();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "confidence-table", argv_copy);
        manifest.add_input(opts->annotations);
        const auto records = annotation::load_annotations(opts->annotations);
        reports::ResultsBundle bundle;
        bundle.confidence.push_back(analytics::confidence_by_agreement(
            records, opts->grouping, opts->name, opts->target));
        reports::save_bundle(opts->out, bundle);
        manifest.add_output(opts->out);
        manifest.finish();
        const auto& row = bundle.confidence.front();
        std::cout << opts->name << ": agree " << util::format_fixed(row.agree.mean_confidence, 4)
                  << " (n=" << row.agree.n << ") vs disagree "
                  << util::format_fixed(row.disagree.mean_confidence, 4)
                  << " (n=" << row.disagree.n << ")\n";
    });
}

void add_report(CLI::App& app, const GlobalOpts& global, std::vector<std::string>& argv_copy) {
    struct Opts {
        std::vector<std::string> bundles;
        std::string format = "markdown", out;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand("report", "Merge result bundles and render tables");
    cmd->add_option("--bundle", opts->bundles, "Results-bundle JSON (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--format", opts->format, "json | csv | markdown")
        ->check(CLI::IsMember({"json", "csv", "markdown", "md"}))
        ->capture_default_str();
    cmd->add_option("--out", opts->out, "Output path (csv writes one file per section)")
        ->required();
    cmd->callback([&, opts] {
        ManifestWriter manifest(global, "report", argv_copy);
        reports::ResultsBundle merged;
        for (const auto& path : opts->bundles) {
            manifest.add_input(path);
            reports::merge_into(merged, reports::load_bundle(path));
        }
        const auto written =
            reports::emit_report(merged, reports::report_format_from_name(opts->format),
                                 opts->out);
        for (const auto& path : written) manifest.add_output(path);
        manifest.finish();
        for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"focalization annotation and analysis toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // let --manifest/--no-manifest follow the subcommand
    app.set_config("--config", "", "TOML config file ([subcommand] sections)");
    app.footer("Exit codes: 0 ok, 1 usage, 2 data error, 3 backend error.");

    GlobalOpts global;
    app.add_option("--manifest", global.manifest_path, "Run-manifest JSONL path")
        ->capture_default_str();
    app.add_flag("--no-manifest", global.no_manifest, "Skip manifest writing");

    std::vector<std::string> argv_copy = collect_argv(argc, argv);
    add_segment(app, global, argv_copy);
    add_sample(app, global, argv_copy);
    add_train_baseline(app, global, argv_copy);
    add_annotate(app, global, argv_copy);
    add_evaluate(app, global, argv_copy);
    add_agreement(app, global, argv_copy);
    add_analyze_modes(app, global, argv_copy);
    add_sensorimotor(app, global, argv_copy);
    add_confidence_table(app, global, argv_copy);
    add_report(app, global, argv_copy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const focalize::BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const focalize::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
