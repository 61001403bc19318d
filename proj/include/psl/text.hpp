#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace psl::text {

// Lowercase tokens, split on non-alphanumeric. Shared by the BM25 index,
// ROUGE-L and the corpus statistics so all text metrics agree on one
// tokenization.
std::vector<std::string> tokenize(std::string_view s);

// Rough token-count estimate: ceil(len/4) per alphanumeric run plus one per
// punctuation character, scaled by `multiplier`. Not a real tokenizer.
std::size_t estimate_tokens(std::string_view s, double multiplier = 1.0);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Splits on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);

uint64_t fnv1a64(std::string_view s);
std::string hex64(uint64_t v);

} // namespace psl::text
