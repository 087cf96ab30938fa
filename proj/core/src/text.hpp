#pragma once

// Small text helpers shared by the CSV and config readers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hubspoke::detail {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);
/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_record(std::string_view line);
std::optional<double> parse_double(std::string_view s);
std::optional<bool> parse_bool(std::string_view s);
/// Shortest text that parses back to the identical double.
std::string format_double(double v);
std::string csv_escape(std::string_view field);

}  // namespace hubspoke::detail
