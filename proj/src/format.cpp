#include "wibp/format.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "wibp/error.hpp"

namespace wibp {

std::string format_g17(double x) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_shortest(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    const std::string s(trim(text));
    if (s.empty()) throw ConfigError(std::string(what) + ": expected a number, got ''");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError(std::string(what) + ": expected a number, got '" + s + "'");
    return v;
}

unsigned long long parse_uint(std::string_view text, std::string_view what) {
    const std::string_view s = trim(text);
    unsigned long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        // Accept integral values written in scientific notation, e.g. 1e5.
        const double d = parse_double(s, what);
        if (d < 0.0 || d != static_cast<double>(static_cast<unsigned long long>(d)))
            throw ConfigError(std::string(what) + ": expected a nonnegative integer, got '" +
                              std::string(s) + "'");
        return static_cast<unsigned long long>(d);
    }
    return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        parts.emplace_back(trim(text.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::string_view trim(std::string_view text) {
    constexpr std::string_view ws = " \t\r\n";
    const auto first = text.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(ws);
    return text.substr(first, last - first + 1);
}

}  // namespace wibp
