#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "focalize/annotation.hpp"
#include "focalize/corpus.hpp"
#include "focalize/prompts.hpp"

namespace focalize::llm {

/// Connection + sampling parameters for an OpenAI-compatible
/// chat-completions backend. Only top_p and the logprobs flag are ever sent;
/// everything else stays at the backend's defaults.
struct BackendConfig {
    std::string base_url;    // e.g. "http://127.0.0.1:8080/v1"
    std::string model_name;  // sent verbatim in the request body
    double top_p = 0.1;
    bool want_logprobs = true;
    std::string system_message = "You are a helpful assistant.";
    int max_retries = 3;  // extra attempts after the first, 429/5xx/timeout only
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds initial_backoff{1000};  // doubles per retry
    std::string api_key_env;  // env var holding the bearer token; empty = none
    int max_in_flight = 4;
    double requests_per_second = 0.0;  // token bucket; 0 = unthrottled
};

struct CompletionResult {
    std::string raw_text;
    std::optional<double> first_token_logprob;  // <= 0 when present
    std::string model_name_echo;
    std::string request_fingerprint;  // hash of the request body
};

/// p = e^l for the first generated token. -inf is the missing-data sentinel
/// and yields nullopt rather than 0. Throws InvalidLogprob when l > 0.
std::optional<double> confidence_from_logprob(double l);

/// "model:run<k>:prompt-<id>", e.g. "gpt-4o:run2:prompt-base".
std::string annotator_id_for(const std::string& model_name, int run, const std::string& prompt_id);

/// Content-addressed response store: one JSON file per completed request,
/// written atomically so an interrupted batch resumes where it stopped.
/// Readers need no lock; writers are serialized.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    /// Hash over (model, prompt id, template body, excerpt text, top_p, run);
    /// changing any component changes the key.
    static std::string key(const BackendConfig& config, const PromptTemplate& tmpl,
                           const corpus::Excerpt& excerpt, int run);

    std::optional<CompletionResult> lookup(const std::string& key) const;
    void store(const std::string& key, const CompletionResult& result);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

/// One synchronous request. Sends the configured system message plus the
/// rendered user message; parses the reply into a label and, when the
/// backend returned logprobs, a confidence. Throws HttpError (after
/// retries), AuthError (401/403), or MalformedResponse.
annotation::AnnotationRecord annotate_excerpt(const BackendConfig& config,
                                              const PromptTemplate& tmpl,
                                              const corpus::Excerpt& excerpt, int run = 1);

/// runs x |excerpts| records, cache consulted before any network call and
/// updated as requests complete. Per-excerpt failures become Invalid records
/// whose raw_output starts with "[error] "; the batch never aborts. Output
/// is sorted by (run, excerpt_id) regardless of completion order.
std::vector<annotation::AnnotationRecord> annotate_corpus(
    const BackendConfig& config, const PromptTemplate& tmpl,
    const std::vector<corpus::Excerpt>& excerpts, int runs, ResponseCache& cache);

}  // namespace focalize::llm
