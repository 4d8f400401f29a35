#include "focalize/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "focalize/errors.hpp"
#include "focalize/util.hpp"

namespace focalize::corpus {

using nlohmann::json;

std::size_t count_words(std::string_view text) {
    std::size_t count = 0;
    std::size_t i = 0;
    const auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        bool has_alnum = false;
        while (i < text.size() && !is_space(text[i])) {
            if (util::is_ascii_alnum(text[i])) has_alnum = true;
            ++i;
        }
        if (has_alnum) ++count;
    }
    return count;
}

namespace {

struct ParagraphSpan {
    std::size_t begin;  // offset of first character
    std::size_t end;    // one past last character (excludes trailing newline)
};

bool line_is_blank(std::string_view line) {
    for (char c : line) {
        if (c != ' ' && c != '\t' && c != '\f' && c != '\v') return false;
    }
    return true;
}

std::vector<ParagraphSpan> find_paragraphs(std::string_view body) {
    std::vector<ParagraphSpan> spans;
    std::size_t pos = 0;
    bool in_para = false;
    ParagraphSpan current{0, 0};
    while (pos <= body.size()) {
        std::size_t eol = body.find('\n', pos);
        bool last = eol == std::string_view::npos;
        std::size_t line_end = last ? body.size() : eol;
        std::string_view line = body.substr(pos, line_end - pos);
        if (line_is_blank(line)) {
            if (in_para) {
                spans.push_back(current);
                in_para = false;
            }
        } else {
            if (!in_para) {
                current.begin = pos;
                in_para = true;
            }
            current.end = line_end;
        }
        if (last) break;
        pos = eol + 1;
    }
    if (in_para) spans.push_back(current);
    return spans;
}

}  // namespace

std::vector<Excerpt> segment(const Document& document, std::size_t min_words) {
    if (min_words < 1) throw DataError("min_words must be >= 1");
    const std::string body = util::normalize_line_endings(document.body);

    auto spans = find_paragraphs(body);
    if (spans.empty()) throw EmptyDocument("document has no paragraphs: " + document.doc_id);

    std::size_t window_begin = document.front_matter_end.value_or(0);
    std::size_t window_end = document.back_matter_start.value_or(body.size());
    if (window_begin > window_end || window_end > body.size()) {
        throw DataError("front/back matter offsets out of range for " + document.doc_id);
    }

    std::vector<Excerpt> out;
    std::size_t ordinal = 0;
    for (std::size_t idx = 0; idx < spans.size(); ++idx) {
        const auto& span = spans[idx];
        if (span.begin < window_begin || span.end > window_end) continue;
        std::string text = body.substr(span.begin, span.end - span.begin);
        std::size_t words = count_words(text);
        if (words < min_words) continue;
        Excerpt e;
        e.doc_id = document.doc_id;
        e.source_index = idx;
        e.excerpt_id = document.doc_id + ":" + std::to_string(idx);
        e.ordinal = ordinal++;
        e.text = std::move(text);
        e.word_count = words;
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

// uniform draw in [0, k) by rejection; avoids std::uniform_int_distribution,
// whose output is not specified identically across standard libraries
std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t k) {
    std::uint64_t threshold = (0 - k) % k;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % k;
    }
}

}  // namespace

std::vector<Excerpt> sample_excerpts(const std::vector<Excerpt>& excerpts, std::size_t n,
                                     std::uint64_t seed) {
    if (n > excerpts.size()) {
        throw SampleTooLarge("requested " + std::to_string(n) + " of " +
                             std::to_string(excerpts.size()) + " excerpts");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(excerpts.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded_uniform(rng, idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<Excerpt> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(excerpts[idx[i]]);
    return out;
}

namespace {

std::optional<std::size_t> toml_size_value(const std::string& content, const std::string& key) {
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k(util::trim(std::string_view(line).substr(0, eq)));
        if (k != key) continue;
        std::string v(util::trim(std::string_view(line).substr(eq + 1)));
        try {
            return static_cast<std::size_t>(std::stoull(v));
        } catch (const std::exception&) {
            throw SchemaError("sidecar value for " + key + " is not an integer", 0);
        }
    }
    return std::nullopt;
}

}  // namespace

Document load_document(const std::filesystem::path& text_path, const std::string& doc_id,
                       const std::string& title,
                       const std::optional<std::filesystem::path>& sidecar) {
    Document doc;
    doc.doc_id = doc_id;
    doc.title = title;
    doc.body = util::normalize_line_endings(util::read_file(text_path));
    if (doc.body.empty()) throw EmptyDocument("empty document file: " + text_path.string());

    if (sidecar) {
        std::string content = util::read_file(*sidecar);
        if (sidecar->extension() == ".json") {
            json j = json::parse(content, nullptr, false);
            if (j.is_discarded()) throw SchemaError("sidecar is not valid JSON", 0);
            if (j.contains("front_matter_end")) doc.front_matter_end = j["front_matter_end"].get<std::size_t>();
            if (j.contains("back_matter_start")) doc.back_matter_start = j["back_matter_start"].get<std::size_t>();
        } else {
            doc.front_matter_end = toml_size_value(content, "front_matter_end");
            doc.back_matter_start = toml_size_value(content, "back_matter_start");
        }
        std::size_t fm = doc.front_matter_end.value_or(0);
        std::size_t bm = doc.back_matter_start.value_or(doc.body.size());
        if (fm > bm || bm > doc.body.size()) {
            throw DataError("sidecar offsets violate 0 <= front_matter_end <= back_matter_start <= length(body)");
        }
    }
    return doc;
}

std::vector<Excerpt> load_excerpts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open excerpts file: " + path.string());
    std::vector<Excerpt> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError("invalid JSON", lineno);
        try {
            Excerpt e;
            e.excerpt_id = j.at("excerpt_id").get<std::string>();
            e.doc_id = j.at("doc_id").get<std::string>();
            e.source_index = j.at("source_index").get<std::size_t>();
            e.ordinal = j.at("ordinal").get<std::size_t>();
            e.word_count = j.at("word_count").get<std::size_t>();
            e.text = j.at("text").get<std::string>();
            out.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw SchemaError(std::string("bad excerpt record: ") + ex.what(), lineno);
        }
    }
    return out;
}

void save_excerpts(const std::filesystem::path& path, const std::vector<Excerpt>& excerpts) {
    std::ostringstream out;
    for (const auto& e : excerpts) {
        json j;
        j["excerpt_id"] = e.excerpt_id;
        j["doc_id"] = e.doc_id;
        j["source_index"] = e.source_index;
        j["ordinal"] = e.ordinal;
        j["word_count"] = e.word_count;
        j["text"] = e.text;
        out << j.dump() << '\n';
    }
    util::write_file_atomic(path, out.str());
}

}  // namespace focalize::corpus
