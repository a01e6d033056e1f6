#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace specforge::util {

// Throws Error{code} with the path in the message when the file is missing.
std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_lower(std::string_view s);

// RFC-4180 quoting when the cell needs it.
std::string csv_cell(std::string_view s);

// Shortest decimal that round-trips, independent of locale ("0.7", "1").
std::string shortest_decimal(double v);
std::string fixed_decimal(double v, int digits);

std::string utc_timestamp();

}  // namespace specforge::util
