#pragma once

#include <string>
#include <string_view>

namespace rulemix::text {

std::string trim(std::string_view s);

std::string lower_ascii(std::string_view s);

/// Collapses every run of whitespace to a single space and trims the ends.
std::string normalize_ws(std::string_view s);

/// Lowercased, whitespace-normalized form used for fuzzy text comparisons.
std::string fold(std::string_view s);

/// Number of whitespace-separated tokens.
std::size_t word_count(std::string_view s);

/// True when fold(needle) occurs as a substring of fold(haystack).
bool contains_folded(std::string_view haystack, std::string_view needle);

/// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

}  // namespace rulemix::text
