#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace honeyfilter::utf8 {

// Strict decode: rejects overlong forms, surrogates and codepoints above
// U+10FFFF. Returns nullopt on any malformed sequence.
std::optional<std::u32string> decode(std::string_view bytes);

// Decode assuming validity; malformed bytes become U+FFFD.
std::u32string decode_lossy(std::string_view bytes);

std::string encode(std::u32string_view chars);
std::string encode(char32_t c);

bool is_valid(std::string_view bytes);

// Number of codepoints (bytes must be valid UTF-8).
std::size_t length(std::string_view bytes);

}  // namespace honeyfilter::utf8
