#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace proact::text {

std::string lower(std::string_view s);

/// Splits on anything that is not [a-z0-9], after lowercasing.
std::vector<std::string> words(std::string_view s);

/// Suffix stripping: one of {ing, ed, es, s}, then a trailing 'e'.
/// "es" is only stripped after a sibilant (boxes -> box); otherwise a
/// plural "s" is dropped, so "codes", "coded", "coding" and "code" agree.
std::string stem(std::string_view word);

std::vector<std::string> stems(std::string_view s);

/// Stems of the content words in s, with a small stopword list removed.
std::set<std::string> content_stems(std::string_view s);

/// content_stems plus the unstemmed content words, so text that already
/// holds stems still matches them.
std::set<std::string> match_keys(std::string_view s);

/// Lowercase, trimmed, punctuation stripped, inner whitespace collapsed,
/// leading article removed.
std::string canonical_phrase(std::string_view s);

std::string fixed6(double v);

/// Shortest round-trip decimal rendering.
std::string shortest(double v);

std::string hex64(std::uint64_t v);

std::string trim(std::string_view s);

/// Parses exactly `count` whitespace-separated decimal numbers.
std::optional<std::vector<double>> parse_numbers(std::string_view s, std::size_t count);

}  // namespace proact::text
