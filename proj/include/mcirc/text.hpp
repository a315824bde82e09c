#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mcirc {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// Whole-token parsers; return false on trailing garbage or overflow.
bool parse_double(std::string_view token, double& out);
bool parse_size(std::string_view token, std::size_t& out);
bool parse_int(std::string_view token, int& out);

std::vector<std::string_view> split_ws(std::string_view line);
std::string_view trim(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace mcirc
