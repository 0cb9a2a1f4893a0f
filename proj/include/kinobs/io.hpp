#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kinobs {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Whole-string parse; throws std::invalid_argument on trailing garbage.
double parse_double(std::string_view text);
long parse_long(std::string_view text);

/// Writes to a sibling temporary file and renames it over path.
/// Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace kinobs
