#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace critiq {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Collapse every run of whitespace to a single space and trim the ends.
std::string collapse_whitespace(std::string_view s);

// Lowercase alphanumeric word tokens; everything else is a separator.
std::vector<std::string> tokenize(std::string_view s);

// Dedup key for question text: lowercase, collapse whitespace, strip
// trailing punctuation.
std::string normalize_question(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string to_hex(std::uint64_t value);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// UTC wall-clock time as ISO-8601; lives only in run provenance.
std::string iso8601_now();

bool is_valid_utf8(std::string_view s);

}  // namespace critiq
