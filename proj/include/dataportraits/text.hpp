#pragma once

#include <string>
#include <string_view>

namespace dataportraits::text {

// NFC normalization followed by default Unicode case folding. Accents are
// preserved ("Ñuñoa" -> "ñuñoa").
std::string fold(std::string_view utf8);

// Word characters are letters, digits, combining marks and '_'.
bool is_word_char(char32_t cp);
bool is_space(char32_t cp);

// Decodes one code point starting at `pos` and advances it. Invalid bytes
// decode as U+FFFD.
char32_t next_code_point(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

std::size_t code_point_count(std::string_view s);

}  // namespace dataportraits::text
