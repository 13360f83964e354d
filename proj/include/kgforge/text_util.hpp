#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kgforge::text {

bool is_space(char c);

// Maximal runs of non-whitespace bytes.
std::vector<std::string_view> whitespace_tokens(std::string_view s);
std::size_t token_count(std::string_view s);

// Tokens re-joined by single spaces. Removes line breaks and tabs, so the
// result is safe for tab-separated text files.
std::string collapse_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

}  // namespace kgforge::text
