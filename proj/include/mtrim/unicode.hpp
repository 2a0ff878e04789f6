#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mtrim::uni {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes the code point starting at text[pos] and advances pos past it.
// Malformed sequences yield U+FFFD and advance by one byte; callers that
// must reject bad input should run validate_utf8 first.
char32_t decode_next(std::string_view text, std::size_t& pos);

// Appends the UTF-8 encoding of cp to out.
void append_utf8(char32_t cp, std::string& out);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

// Returns the byte offset of the first invalid UTF-8 sequence, or npos if
// the whole string is well formed.
std::size_t find_invalid_utf8(std::string_view text);
bool is_valid_utf8(std::string_view text);

// ' ', '\t', '\n', '\r' or Unicode category Zs.
bool is_whitespace(char32_t cp);

// Category Cc or Cf, except the three ASCII characters treated as whitespace.
bool is_control(char32_t cp);

// ASCII blocks 33-47, 58-64, 91-96, 123-126 or Unicode category P*.
bool is_punctuation(char32_t cp);

// CJK ideograph blocks that the cased multilingual tokenizer isolates.
bool is_cjk_ideograph(char32_t cp);

}  // namespace mtrim::uni
