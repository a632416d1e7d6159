#pragma once

#include <string>
#include <string_view>

namespace parafuse::utf8 {

bool is_valid(std::string_view text);

// Decodes to code points. Throws InputError on malformed input.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

// Unicode White_Space property.
bool is_space(char32_t c);

// ASCII punctuation plus the common Unicode punctuation blocks.
bool is_punct(char32_t c);

// Simple case mapping for Latin, Greek and Cyrillic letters.
char32_t to_lower(char32_t c);

std::string_view trim(std::string_view text);

// Trims and collapses internal whitespace runs to one ASCII space.
std::string normalize_space(std::string_view text);

}  // namespace parafuse::utf8
