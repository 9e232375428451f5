#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wibp {

/// 17 significant digits, the text form used in CSV and tables.
std::string format_g17(double x);

/// Shortest text that parses back to the same double.
std::string format_shortest(double x);

/// Strict double parse: the whole string must be consumed.
double parse_double(std::string_view text, std::string_view what);
unsigned long long parse_uint(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace wibp
