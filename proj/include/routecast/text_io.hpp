#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace routecast {

// Shortest round-trip decimal form (via std::to_chars). Parsing the result
// with parse_double recovers the exact same bits, which is what makes saved
// maps, tables, and experiment outputs byte-stable across runs.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::size_t> parse_uint(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace routecast
