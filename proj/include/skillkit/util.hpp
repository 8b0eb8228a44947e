#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace skillkit {

// Reads an entire file as bytes. Throws std::runtime_error on failure.
std::string read_file(const std::string& path);

// Writes bytes, creating parent directories as needed.
void write_file(const std::string& path, std::string_view data);

// Collapses every run of whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

std::string to_lower(std::string_view text);

// Case-insensitive substring test (ASCII).
bool contains_ci(std::string_view haystack, std::string_view needle);

// Splits on '\n'; the terminator is not part of the returned views.
std::vector<std::string_view> split_lines(std::string_view text);

bool is_space_byte(char c);

}  // namespace skillkit
