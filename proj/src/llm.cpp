#include "focalize/llm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <map>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "focalize/errors.hpp"
#include "focalize/util.hpp"

namespace focalize::llm {

using annotation::AnnotationRecord;
using nlohmann::json;

std::optional<double> confidence_from_logprob(double l) {
    if (l == -std::numeric_limits<double>::infinity()) return std::nullopt;
    if (!(l <= 0.0)) throw InvalidLogprob("logprob must be <= 0, got " + std::to_string(l));
    return std::exp(l);
}

std::string annotator_id_for(const std::string& model_name, int run,
                             const std::string& prompt_id) {
    return model_name + ":run" + std::to_string(run) + ":prompt-" + prompt_id;
}

// ---------------------------------------------------------------------------
// Response cache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create cache directory " + dir_.string());
}

std::string ResponseCache::key(const BackendConfig& config, const PromptTemplate& tmpl,
                               const corpus::Excerpt& excerpt, int run) {
    const json tuple = json::array(
        {config.model_name, tmpl.prompt_id, tmpl.body, excerpt.text, config.top_p, run});
    return util::sha256_hex(tuple.dump());
}

std::optional<CompletionResult> ResponseCache::lookup(const std::string& key) const {
    const auto path = dir_ / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    json doc;
    try {
        doc = json::parse(util::read_file(path));
    } catch (const std::exception&) {
        return std::nullopt;  // a torn or foreign file is a miss, not an error
    }
    if (!doc.is_object() || !doc.contains("raw_text") || !doc["raw_text"].is_string()) {
        return std::nullopt;
    }
    CompletionResult result;
    result.raw_text = doc["raw_text"].get<std::string>();
    if (doc.contains("first_token_logprob") && doc["first_token_logprob"].is_number()) {
        result.first_token_logprob = doc["first_token_logprob"].get<double>();
    }
    if (doc.contains("model") && doc["model"].is_string()) {
        result.model_name_echo = doc["model"].get<std::string>();
    }
    if (doc.contains("request_fingerprint") && doc["request_fingerprint"].is_string()) {
        result.request_fingerprint = doc["request_fingerprint"].get<std::string>();
    }
    return result;
}

void ResponseCache::store(const std::string& key, const CompletionResult& result) {
    json doc;
    doc["raw_text"] = result.raw_text;
    if (result.first_token_logprob) {
        doc["first_token_logprob"] = *result.first_token_logprob;
    } else {
        doc["first_token_logprob"] = nullptr;
    }
    doc["model"] = result.model_name_echo;
    doc["request_fingerprint"] = result.request_fingerprint;
    std::lock_guard<std::mutex> lock(write_mutex_);
    util::write_file_atomic(dir_ / (key + ".json"), doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// HTTP plumbing

namespace {

struct ParsedUrl {
    std::string client_base;  // scheme://host[:port], what httplib::Client takes
    std::string path_prefix;  // "" or "/v1" etc., no trailing slash
};

ParsedUrl parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw BackendError("base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.client_base = base_url;
    } else {
        out.client_base = base_url.substr(0, path_start);
        out.path_prefix = base_url.substr(path_start);
    }
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
        out.path_prefix.pop_back();
    }
    return out;
}

std::string bearer_token(const BackendConfig& config) {
    if (config.api_key_env.empty()) return {};
    const char* value = std::getenv(config.api_key_env.c_str());
    return value ? std::string(value) : std::string();
}

json request_body(const BackendConfig& config, const std::string& user_message) {
    json body;
    body["model"] = config.model_name;
    body["messages"] = json::array({json{{"role", "system"}, {"content", config.system_message}},
                                    json{{"role", "user"}, {"content", user_message}}});
    body["top_p"] = config.top_p;
    if (config.want_logprobs) body["logprobs"] = true;
    return body;
}

CompletionResult parse_completion(const std::string& payload, const std::string& fingerprint) {
    json doc;
    try {
        doc = json::parse(payload);
    } catch (const json::parse_error& e) {
        throw MalformedResponse(std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty()) {
        throw MalformedResponse("response has no choices");
    }
    const json& choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].is_object() ||
        !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
        throw MalformedResponse("choice has no message content");
    }

    CompletionResult result;
    result.raw_text = choice["message"]["content"].get<std::string>();
    result.request_fingerprint = fingerprint;
    if (doc.contains("model") && doc["model"].is_string()) {
        result.model_name_echo = doc["model"].get<std::string>();
    }
    if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
        const json& lp = choice["logprobs"];
        if (lp.contains("content") && lp["content"].is_array() && !lp["content"].empty() &&
            lp["content"][0].is_object() && lp["content"][0].contains("logprob") &&
            lp["content"][0]["logprob"].is_number()) {
            result.first_token_logprob = lp["content"][0]["logprob"].get<double>();
        }
    }
    return result;
}

CompletionResult request_completion(const BackendConfig& config, const std::string& user_message) {
    const ParsedUrl url = parse_base_url(config.base_url);
    httplib::Client client(url.client_base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto rest =
        std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), rest.count());
    client.set_read_timeout(secs.count(), rest.count());
    client.set_write_timeout(secs.count(), rest.count());

    httplib::Headers headers;
    const std::string token = bearer_token(config);
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    const std::string body = request_body(config, user_message).dump();
    const std::string fingerprint = util::sha256_hex(body);
    const std::string path = url.path_prefix + "/chat/completions";

    auto backoff = config.initial_backoff;
    std::string last_failure = "request never attempted";
    int last_status = 0;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        httplib::Result res = client.Post(path, headers, body, "application/json");
        if (!res) {
            // transport failure (refused, reset, timeout): retryable
            last_failure = "transport error: " + httplib::to_string(res.error());
            last_status = 0;
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("backend rejected credentials (HTTP " +
                            std::to_string(res->status) + ")");
        }
        if (res->status == 429 || res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
            last_status = res->status;
            continue;
        }
        if (res->status != 200) {
            throw HttpError("backend returned HTTP " + std::to_string(res->status), res->status);
        }
        return parse_completion(res->body, fingerprint);
    }
    throw HttpError("backend unavailable after " + std::to_string(config.max_retries + 1) +
                        " attempts (" + last_failure + ")",
                    last_status);
}

AnnotationRecord record_from_completion(const BackendConfig& config, const PromptTemplate& tmpl,
                                        const corpus::Excerpt& excerpt, int run,
                                        const CompletionResult& completion) {
    AnnotationRecord record;
    record.excerpt_id = excerpt.excerpt_id;
    record.annotator_id = annotator_id_for(config.model_name, run, tmpl.prompt_id);
    record.label = annotation::parse_label(completion.raw_text);
    record.raw_output = completion.raw_text;
    record.created_at = util::rfc3339_now();
    if (completion.first_token_logprob) {
        const double l = *completion.first_token_logprob;
        if (l > 0.0) {
            throw MalformedResponse("backend reported a positive logprob: " + std::to_string(l));
        }
        record.confidence = confidence_from_logprob(l);
    }
    return record;
}

/// Spaces requests so sustained throughput stays at or under the given rate.
class TokenBucket {
public:
    explicit TokenBucket(double requests_per_second) {
        if (requests_per_second > 0.0) {
            interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(1.0 / requests_per_second));
        }
    }

    void acquire() {
        if (interval_.count() == 0) return;
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            next_slot_ = std::max(next_slot_, now);
            slot = next_slot_;
            next_slot_ += interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::steady_clock::duration interval_{0};
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace

AnnotationRecord annotate_excerpt(const BackendConfig& config, const PromptTemplate& tmpl,
                                  const corpus::Excerpt& excerpt, int run) {
    const std::string user_message = build_prompt(tmpl, excerpt);
    const CompletionResult completion = request_completion(config, user_message);
    return record_from_completion(config, tmpl, excerpt, run, completion);
}

std::vector<AnnotationRecord> annotate_corpus(const BackendConfig& config,
                                              const PromptTemplate& tmpl,
                                              const std::vector<corpus::Excerpt>& excerpts,
                                              int runs, ResponseCache& cache) {
    if (runs < 1) throw DataError("runs must be >= 1");

    struct Job {
        int run;
        const corpus::Excerpt* excerpt;
    };
    std::vector<Job> jobs;
    jobs.reserve(excerpts.size() * static_cast<std::size_t>(runs));
    for (int run = 1; run <= runs; ++run) {
        for (const auto& excerpt : excerpts) jobs.push_back({run, &excerpt});
    }

    // keyed results so completion order never shows in the output
    std::map<std::pair<int, std::string>, AnnotationRecord> results;
    std::mutex results_mutex;
    TokenBucket bucket(config.requests_per_second);
    std::atomic<std::size_t> next_job{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            const std::string key = ResponseCache::key(config, tmpl, *job.excerpt, job.run);

            AnnotationRecord record;
            try {
                std::optional<CompletionResult> completion = cache.lookup(key);
                if (!completion) {
                    bucket.acquire();
                    completion = request_completion(config, build_prompt(tmpl, *job.excerpt));
                    cache.store(key, *completion);
                }
                record = record_from_completion(config, tmpl, *job.excerpt, job.run, *completion);
            } catch (const Error& e) {
                record.excerpt_id = job.excerpt->excerpt_id;
                record.annotator_id =
                    annotator_id_for(config.model_name, job.run, tmpl.prompt_id);
                record.label = annotation::Label::Invalid;
                record.raw_output = std::string("[error] ") + e.what();
                record.created_at = util::rfc3339_now();
            }
            std::lock_guard<std::mutex> lock(results_mutex);
            results.emplace(std::make_pair(job.run, record.excerpt_id), std::move(record));
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max(config.max_in_flight, 1)),
                                 jobs.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<AnnotationRecord> out;
    out.reserve(results.size());
    for (auto& [key, record] : results) out.push_back(std::move(record));
    return out;
}

}  // namespace focalize::llm
