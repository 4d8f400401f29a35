#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace focalize::util {

bool is_ascii_alnum(char c);

std::string to_lower(std::string_view s);

// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

// CRLF and lone CR become LF.
std::string normalize_line_endings(std::string_view s);

// Current UTC time as RFC3339 "YYYY-MM-DDTHH:MM:SSZ".
std::string rfc3339_now();

// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's contents. Throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Splits on a delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view s, char delim);

// Fixed-decimal formatting ("%.2f" style); reports use 2 for percents, 4 for r/confidence.
std::string format_fixed(double value, int decimals);

}  // namespace focalize::util
