#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace memexplain::text {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

bool is_unicode_space(char32_t c) noexcept;
bool is_unicode_punct(char32_t c) noexcept;

/// Words as split on Unicode whitespace. Used for corpus statistics and
/// explanation word limits; identical rule for Arabic and English.
std::vector<std::string> split_words(std::string_view s);
std::size_t count_words(std::string_view s);

/// Tokens for BLEU/METEOR: whitespace split, then every punctuation code
/// point becomes its own token.
std::vector<std::string> metric_tokens(std::string_view s);

/// Simple case folding (ASCII, Latin-1, Greek and Cyrillic basic blocks).
/// Scripts without case (Arabic) pass through unchanged.
std::string to_lower(std::string_view s);

std::string trim(std::string_view s);

}  // namespace memexplain::text
