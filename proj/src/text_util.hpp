#pragma once

// Small CSV/number helpers shared by the readers and writers.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hbo::detail {

/// Splits one CSV record. Double-quoted fields may contain commas; "" is an
/// escaped quote. Surrounding whitespace of unquoted fields is trimmed.
std::vector<std::string> split_csv_line(std::string_view line);

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest representation that round-trips; "nan" for NaN.
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace hbo::detail
