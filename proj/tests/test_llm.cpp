#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "focalize/errors.hpp"
#include "focalize/llm.hpp"
#include "focalize/prompts.hpp"
#include "support/testutil.hpp"

using namespace focalize;
using annotation::Label;
using json = nlohmann::json;

namespace {

// A capturing chat-completions endpoint running on a loopback port. The
// reply is swappable per test; every request body and header set is kept.
class MockBackend {
public:
    using Responder = std::function<void(const httplib::Request&, httplib::Response&)>;

    MockBackend() {
        respond_with("Internal", -0.25);
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard<std::mutex> lock(mutex_);
                bodies_.push_back(req.body);
                auto auth = req.get_header_value("Authorization");
                auth_headers_.push_back(auth);
            }
            hits_.fetch_add(1);
            responder_(req, res);
        };
        server_.Post("/chat/completions", handler);
        server_.Post("/v1/chat/completions", handler);
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockBackend() {
        server_.stop();
        thread_.join();
    }

    std::string base_url(const std::string& prefix = "/v1") const {
        return "http://127.0.0.1:" + std::to_string(port_) + prefix;
    }

    void set_responder(Responder responder) {
        std::lock_guard<std::mutex> lock(mutex_);
        responder_ = std::move(responder);
    }

    /// Standard happy-path reply with an optional first-token logprob.
    void respond_with(const std::string& content, std::optional<double> logprob) {
        set_responder([content, logprob](const httplib::Request&, httplib::Response& res) {
            json reply;
            reply["model"] = "mock-model";
            json choice;
            choice["message"] = {{"role", "assistant"}, {"content", content}};
            if (logprob) {
                choice["logprobs"] = {
                    {"content", json::array({{{"token", content}, {"logprob", *logprob}}})}};
            }
            reply["choices"] = json::array({choice});
            res.set_content(reply.dump(), "application/json");
        });
    }

    int hits() const { return hits_.load(); }

    std::vector<std::string> bodies() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return bodies_;
    }

    std::vector<std::string> auth_headers() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return auth_headers_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> bodies_;
    std::vector<std::string> auth_headers_;
    Responder responder_;
};

llm::BackendConfig fast_config(const MockBackend& backend, const std::string& prefix = "/v1") {
    llm::BackendConfig config;
    config.base_url = backend.base_url(prefix);
    config.model_name = "mock-model";
    config.max_retries = 3;
    config.timeout = std::chrono::milliseconds(5000);
    config.initial_backoff = std::chrono::milliseconds(10);
    return config;
}

corpus::Excerpt excerpt_fixture(int i = 0) {
    corpus::Excerpt e;
    e.doc_id = "novel";
    e.source_index = static_cast<std::size_t>(i);
    e.excerpt_id = "novel:" + std::to_string(i);
    e.ordinal = static_cast<std::size_t>(i);
    e.text = "Excerpt number " + std::to_string(i) + " watched the rain and waited.";
    e.word_count = 8;
    return e;
}

}  // namespace

TEST_CASE("confidence_from_logprob is exp with guarded edges") {
    CHECK(*llm::confidence_from_logprob(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*llm::confidence_from_logprob(-0.693147180559945) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(*llm::confidence_from_logprob(-30.0) ==
          doctest::Approx(std::exp(-30.0)).epsilon(1e-12));
    CHECK_FALSE(
        llm::confidence_from_logprob(-std::numeric_limits<double>::infinity()).has_value());
    CHECK_THROWS_AS(llm::confidence_from_logprob(0.001), InvalidLogprob);
}

TEST_CASE("annotator ids name the model, run, and prompt") {
    CHECK(llm::annotator_id_for("gpt-4o", 2, "base") == "gpt-4o:run2:prompt-base");
    CHECK(llm::annotator_id_for("m", 1, "v5") == "m:run1:prompt-v5");
}

TEST_CASE("request bodies carry exactly the documented sampling fields") {
    MockBackend backend;
    auto config = fast_config(backend);
    auto tmpl = llm::prompt_template("base");
    auto excerpt = excerpt_fixture();

    auto record = llm::annotate_excerpt(config, tmpl, excerpt, 1);
    REQUIRE(backend.hits() == 1);

    const std::string raw = backend.bodies()[0];
    // bit-exact serialization of the sampling controls
    CHECK(raw.find("\"top_p\":0.1") != std::string::npos);
    CHECK(raw.find("\"logprobs\":true") != std::string::npos);

    json body = json::parse(raw);
    CHECK(body["model"] == "mock-model");
    REQUIRE(body["messages"].is_array());
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "You are a helpful assistant.");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == llm::build_prompt(tmpl, excerpt));
    CHECK(body["top_p"] == 0.1);
    CHECK(body["logprobs"] == true);
    // nothing else is sent: no temperature, max_tokens, n, stop, ...
    CHECK(body.size() == 4);

    CHECK(record.label == Label::Internal);
    CHECK(record.annotator_id == "mock-model:run1:prompt-base");
    CHECK(record.raw_output == "Internal");
    REQUIRE(record.confidence.has_value());
    CHECK(*record.confidence == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
}

TEST_CASE("want_logprobs=false omits the flag entirely") {
    MockBackend backend;
    backend.respond_with("zero", std::nullopt);
    auto config = fast_config(backend);
    config.want_logprobs = false;

    auto record = llm::annotate_excerpt(config, llm::prompt_template("base"), excerpt_fixture(), 1);
    const std::string raw = backend.bodies()[0];
    CHECK(raw.find("logprobs") == std::string::npos);
    CHECK(json::parse(raw).size() == 3);  // model, messages, top_p
    CHECK(record.label == Label::Zero);
    CHECK_FALSE(record.confidence.has_value());
}

TEST_CASE("custom top_p and system message are honored") {
    MockBackend backend;
    auto config = fast_config(backend);
    config.top_p = 0.35;
    config.system_message = "Answer with one word.";
    llm::annotate_excerpt(config, llm::prompt_template("v2"), excerpt_fixture(), 1);
    json body = json::parse(backend.bodies()[0]);
    CHECK(body["top_p"] == 0.35);
    CHECK(body["messages"][0]["content"] == "Answer with one word.");
}

TEST_CASE("the path prefix from base_url is preserved") {
    MockBackend backend;
    SUBCASE("with /v1 prefix") {
        auto record =
            llm::annotate_excerpt(fast_config(backend, "/v1"), llm::prompt_template("base"),
                                  excerpt_fixture(), 1);
        CHECK(record.label == Label::Internal);
    }
    SUBCASE("trailing slash is stripped") {
        auto record =
            llm::annotate_excerpt(fast_config(backend, "/v1/"), llm::prompt_template("base"),
                                  excerpt_fixture(), 1);
        CHECK(record.label == Label::Internal);
    }
    SUBCASE("bare origin hits /chat/completions") {
        auto record = llm::annotate_excerpt(fast_config(backend, ""), llm::prompt_template("base"),
                                            excerpt_fixture(), 1);
        CHECK(record.label == Label::Internal);
    }
    SUBCASE("missing scheme is rejected before any request") {
        llm::BackendConfig config;
        config.base_url = "127.0.0.1:9999/v1";
        config.model_name = "m";
        CHECK_THROWS_AS(
            llm::annotate_excerpt(config, llm::prompt_template("base"), excerpt_fixture(), 1),
            BackendError);
        CHECK(backend.hits() == 0);
    }
}

TEST_CASE("bearer token is read from the configured environment variable") {
    MockBackend backend;
    auto config = fast_config(backend);
    config.api_key_env = "FOCALIZE_TEST_API_KEY";

    SUBCASE("set: Authorization header is attached") {
        setenv("FOCALIZE_TEST_API_KEY", "sekrit-token", 1);
        llm::annotate_excerpt(config, llm::prompt_template("base"), excerpt_fixture(), 1);
        unsetenv("FOCALIZE_TEST_API_KEY");
        REQUIRE(backend.auth_headers().size() == 1);
        CHECK(backend.auth_headers()[0] == "Bearer sekrit-token");
    }
    SUBCASE("unset: no Authorization header") {
        unsetenv("FOCALIZE_TEST_API_KEY");
        llm::annotate_excerpt(config, llm::prompt_template("base"), excerpt_fixture(), 1);
        REQUIRE(backend.auth_headers().size() == 1);
        CHECK(backend.auth_headers()[0].empty());
    }
}

TEST_CASE("429 and 5xx responses are retried with backoff until success") {
    MockBackend backend;
    std::atomic<int> calls{0};
    backend.set_responder([&](const httplib::Request&, httplib::Response& res) {
        int n = calls.fetch_add(1);
        if (n < 2) {
            res.status = (n == 0) ? 429 : 503;
            res.set_content("overloaded", "text/plain");
            return;
        }
        json reply = {{"model", "mock-model"},
                      {"choices", json::array({{{"message", {{"role", "assistant"},
                                                             {"content", "External"}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });

    auto record = llm::annotate_excerpt(fast_config(backend), llm::prompt_template("base"),
                                        excerpt_fixture(), 1);
    CHECK(backend.hits() == 3);
    CHECK(record.label == Label::External);
}

TEST_CASE("persistent 5xx exhausts the retry budget and raises HttpError") {
    MockBackend backend;
    backend.set_responder([](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    auto config = fast_config(backend);
    config.max_retries = 2;
    try {
        llm::annotate_excerpt(config, llm::prompt_template("base"), excerpt_fixture(), 1);
        FAIL("expected HttpError");
    } catch (const HttpError& e) {
        CHECK(e.status() == 500);
        CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    }
    CHECK(backend.hits() == 3);  // initial try + 2 retries
}

TEST_CASE("auth failures and client errors do not retry") {
    MockBackend backend;
    SUBCASE("401 raises AuthError on the first attempt") {
        backend.set_responder([](const httplib::Request&, httplib::Response& res) {
            res.status = 401;
        });
        CHECK_THROWS_AS(llm::annotate_excerpt(fast_config(backend), llm::prompt_template("base"),
                                              excerpt_fixture(), 1),
                        AuthError);
        CHECK(backend.hits() == 1);
    }
    SUBCASE("404 raises HttpError with the status attached") {
        backend.set_responder([](const httplib::Request&, httplib::Response& res) {
            res.status = 404;
        });
        try {
            llm::annotate_excerpt(fast_config(backend), llm::prompt_template("base"),
                                  excerpt_fixture(), 1);
            FAIL("expected HttpError");
        } catch (const HttpError& e) {
            CHECK(e.status() == 404);
        }
        CHECK(backend.hits() == 1);
    }
}

TEST_CASE("malformed replies raise MalformedResponse") {
    MockBackend backend;
    auto config = fast_config(backend);
    auto tmpl = llm::prompt_template("base");

    SUBCASE("not JSON") {
        backend.set_responder([](const httplib::Request&, httplib::Response& res) {
            res.set_content("<html>oops</html>", "text/html");
        });
        CHECK_THROWS_AS(llm::annotate_excerpt(config, tmpl, excerpt_fixture(), 1),
                        MalformedResponse);
    }
    SUBCASE("no choices") {
        backend.set_responder([](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"choices\": []}", "application/json");
        });
        CHECK_THROWS_AS(llm::annotate_excerpt(config, tmpl, excerpt_fixture(), 1),
                        MalformedResponse);
    }
    SUBCASE("no message content") {
        backend.set_responder([](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"choices\": [{\"message\": {}}]}", "application/json");
        });
        CHECK_THROWS_AS(llm::annotate_excerpt(config, tmpl, excerpt_fixture(), 1),
                        MalformedResponse);
    }
    SUBCASE("positive logprob is a protocol violation") {
        backend.respond_with("Internal", 0.5);
        CHECK_THROWS_AS(llm::annotate_excerpt(config, tmpl, excerpt_fixture(), 1),
                        MalformedResponse);
    }
    SUBCASE("unparseable label text is NOT an error, just Invalid") {
        backend.respond_with("I cannot determine the focalization.", -0.5);
        auto record = llm::annotate_excerpt(config, tmpl, excerpt_fixture(), 1);
        CHECK(record.label == Label::Invalid);
        CHECK(record.raw_output == "I cannot determine the focalization.");
        CHECK(record.confidence.has_value());  // confidence still reported
    }
}

TEST_CASE("response cache round-trips results and is key-sensitive") {
    testutil::TempDir tmp;
    llm::ResponseCache cache(tmp.file("cache"));

    llm::CompletionResult result;
    result.raw_text = "Internal";
    result.first_token_logprob = -0.125;
    result.model_name_echo = "mock-model";
    result.request_fingerprint = "abc123";

    llm::BackendConfig config;
    config.model_name = "m1";
    auto tmpl = llm::prompt_template("base");
    auto excerpt = excerpt_fixture();

    const std::string key = llm::ResponseCache::key(config, tmpl, excerpt, 1);
    CHECK_FALSE(cache.lookup(key).has_value());
    cache.store(key, result);
    auto loaded = cache.lookup(key);
    REQUIRE(loaded.has_value());
    CHECK(loaded->raw_text == "Internal");
    CHECK(loaded->first_token_logprob == doctest::Approx(-0.125).epsilon(1e-15));
    CHECK(loaded->model_name_echo == "mock-model");
    CHECK(loaded->request_fingerprint == "abc123");

    SUBCASE("a null logprob stays absent") {
        llm::CompletionResult bare;
        bare.raw_text = "zero";
        cache.store("k2", bare);
        auto l2 = cache.lookup("k2");
        REQUIRE(l2.has_value());
        CHECK_FALSE(l2->first_token_logprob.has_value());
    }
    SUBCASE("every key component matters") {
        auto variant_config = config;
        variant_config.model_name = "m2";
        CHECK(llm::ResponseCache::key(variant_config, tmpl, excerpt, 1) != key);

        auto variant_top_p = config;
        variant_top_p.top_p = 0.9;
        CHECK(llm::ResponseCache::key(variant_top_p, tmpl, excerpt, 1) != key);

        auto other_tmpl = llm::prompt_template("v1");
        CHECK(llm::ResponseCache::key(config, other_tmpl, excerpt, 1) != key);

        auto renamed_tmpl = tmpl;
        renamed_tmpl.prompt_id = "base2";
        CHECK(llm::ResponseCache::key(config, renamed_tmpl, excerpt, 1) != key);

        auto edited_tmpl = tmpl;
        edited_tmpl.body += " ";
        CHECK(llm::ResponseCache::key(config, edited_tmpl, excerpt, 1) != key);

        auto other_excerpt = excerpt;
        other_excerpt.text += "!";
        CHECK(llm::ResponseCache::key(config, tmpl, other_excerpt, 1) != key);

        CHECK(llm::ResponseCache::key(config, tmpl, excerpt, 2) != key);
        // and the key is a pure function of those components
        CHECK(llm::ResponseCache::key(config, tmpl, excerpt, 1) == key);
        // excerpt ids are NOT part of the key; identical text hits the cache
        auto renumbered = excerpt;
        renumbered.excerpt_id = "other:9";
        CHECK(llm::ResponseCache::key(config, tmpl, renumbered, 1) == key);
    }
    SUBCASE("torn or foreign cache files read as misses") {
        testutil::write_text(tmp.file("cache") / "torn.json", "{\"raw_text\": \"Int");
        CHECK_FALSE(cache.lookup("torn").has_value());
        testutil::write_text(tmp.file("cache") / "foreign.json", "[1, 2, 3]");
        CHECK_FALSE(cache.lookup("foreign").has_value());
    }
}

TEST_CASE("annotate_corpus produces runs x excerpts records in stable order") {
    MockBackend backend;
    testutil::TempDir tmp;
    llm::ResponseCache cache(tmp.file("cache"));
    auto config = fast_config(backend);
    config.max_in_flight = 4;
    auto tmpl = llm::prompt_template("base");

    std::vector<corpus::Excerpt> excerpts;
    for (int i = 9; i >= 0; --i) excerpts.push_back(excerpt_fixture(i));  // deliberately unsorted

    auto records = llm::annotate_corpus(config, tmpl, excerpts, 3, cache);
    REQUIRE(records.size() == 30);
    CHECK(backend.hits() == 30);

    // sorted by (run, excerpt_id); annotator id encodes the run
    for (std::size_t i = 0; i < records.size(); ++i) {
        int run = 1 + static_cast<int>(i / 10);
        CHECK(records[i].annotator_id ==
              "mock-model:run" + std::to_string(run) + ":prompt-base");
        if (i % 10 != 0) CHECK(records[i - 1].excerpt_id < records[i].excerpt_id);
        CHECK(records[i].label == Label::Internal);
    }

    SUBCASE("a warm cache answers without any network call") {
        auto again = llm::annotate_corpus(config, tmpl, excerpts, 3, cache);
        CHECK(backend.hits() == 30);  // unchanged
        REQUIRE(again.size() == 30);
        for (std::size_t i = 0; i < again.size(); ++i) {
            CHECK(again[i].excerpt_id == records[i].excerpt_id);
            CHECK(again[i].annotator_id == records[i].annotator_id);
            CHECK(again[i].label == records[i].label);
            CHECK(again[i].confidence == records[i].confidence);
            CHECK(again[i].raw_output == records[i].raw_output);
        }
    }
    SUBCASE("adding a run reuses the first 30 answers") {
        auto more = llm::annotate_corpus(config, tmpl, excerpts, 4, cache);
        CHECK(more.size() == 40);
        CHECK(backend.hits() == 40);  // only run 4 hit the network
    }
}

TEST_CASE("per-excerpt failures become [error] records and are retried next run") {
    MockBackend backend;
    testutil::TempDir tmp;
    llm::ResponseCache cache(tmp.file("cache"));
    auto config = fast_config(backend);
    config.max_retries = 0;
    config.max_in_flight = 1;
    auto tmpl = llm::prompt_template("base");

    // fail exactly the request whose prompt mentions excerpt number 3
    std::atomic<bool> failing{true};
    backend.set_responder([&](const httplib::Request& req, httplib::Response& res) {
        if (failing.load() && req.body.find("Excerpt number 3 ") != std::string::npos) {
            res.status = 500;
            res.set_content("flaky", "text/plain");
            return;
        }
        json reply = {{"model", "mock-model"},
                      {"choices", json::array({{{"message", {{"role", "assistant"},
                                                             {"content", "zero"}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });

    std::vector<corpus::Excerpt> excerpts;
    for (int i = 0; i < 5; ++i) excerpts.push_back(excerpt_fixture(i));

    auto records = llm::annotate_corpus(config, tmpl, excerpts, 1, cache);
    REQUIRE(records.size() == 5);
    CHECK(records[3].label == Label::Invalid);
    REQUIRE(records[3].raw_output.has_value());
    CHECK(records[3].raw_output->rfind("[error] ", 0) == 0);
    for (std::size_t i : {0u, 1u, 2u, 4u}) CHECK(records[i].label == Label::Zero);
    CHECK(backend.hits() == 5);

    // the failure was not cached: a rerun re-queries only excerpt 3
    failing.store(false);
    auto repaired = llm::annotate_corpus(config, tmpl, excerpts, 1, cache);
    CHECK(backend.hits() == 6);
    CHECK(repaired[3].label == Label::Zero);
}

TEST_CASE("annotate_corpus rejects a nonpositive run count") {
    MockBackend backend;
    testutil::TempDir tmp;
    llm::ResponseCache cache(tmp.file("cache"));
    CHECK_THROWS_AS(llm::annotate_corpus(fast_config(backend), llm::prompt_template("base"), {},
                                         0, cache),
                    DataError);
}
