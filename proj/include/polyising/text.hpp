#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace polyising {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

/// Parses a full token as a finite double; throws polyising::Error otherwise.
double parse_real(std::string_view token);

/// Splits on ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view line);

/// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string_view> split(std::string_view text, char delim);

}  // namespace polyising
