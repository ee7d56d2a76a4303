#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hwfl::csv {

/// Splits one RFC-4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

/// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Shortest decimal representation that parses back to the same double.
std::string format_real(double value);

/// Strict parse of the whole field; false on trailing garbage or empty input.
bool parse_real(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

}  // namespace hwfl::csv
