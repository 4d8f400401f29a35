#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace focalize::corpus {

/// A plain-text source document. `body` is stored with line endings
/// normalized to LF; front/back-matter offsets index into that body.
struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    std::optional<std::size_t> front_matter_end;
    std::optional<std::size_t> back_matter_start;
};

/// One qualifying paragraph. `source_index` is the paragraph's position in
/// the whole document (gaps appear where paragraphs were filtered out);
/// `ordinal` is dense over the emitted excerpts.
struct Excerpt {
    std::string excerpt_id;
    std::string doc_id;
    std::size_t source_index = 0;
    std::size_t ordinal = 0;
    std::string text;
    std::size_t word_count = 0;

    bool operator==(const Excerpt&) const = default;
};

/// Number of whitespace-delimited tokens containing at least one ASCII
/// alphanumeric character. "--" and bare dashes do not count.
std::size_t count_words(std::string_view text);

/// Splits the body into paragraphs (maximal runs separated by one or more
/// blank lines), keeps those fully inside the front/back-matter window with
/// word_count >= min_words. Throws EmptyDocument when the body has no
/// paragraphs at all.
std::vector<Excerpt> segment(const Document& document, std::size_t min_words);

/// Uniform sample of n distinct excerpts, deterministic in (input, n, seed).
/// Throws SampleTooLarge when n exceeds the input size.
std::vector<Excerpt> sample_excerpts(const std::vector<Excerpt>& excerpts, std::size_t n,
                                     std::uint64_t seed);

/// Reads a UTF-8 text file; sidecar (JSON or flat TOML) may supply
/// front_matter_end / back_matter_start character offsets.
Document load_document(const std::filesystem::path& text_path, const std::string& doc_id,
                       const std::string& title,
                       const std::optional<std::filesystem::path>& sidecar = std::nullopt);

std::vector<Excerpt> load_excerpts(const std::filesystem::path& path);
void save_excerpts(const std::filesystem::path& path, const std::vector<Excerpt>& excerpts);

}  // namespace focalize::corpus
