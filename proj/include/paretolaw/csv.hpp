#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace paretolaw::csv {

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

// Shortest representation that round-trips exactly.
std::string format_double(double value);

// Throw ParseError mentioning `context` on malformed input.
double parse_double(std::string_view text, std::string_view context);
std::int64_t parse_int(std::string_view text, std::string_view context);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace paretolaw::csv
