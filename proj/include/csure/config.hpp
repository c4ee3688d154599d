#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace csure {

/// Reads `key = value` lines. Blank lines and text after `#` are ignored.
/// Keys keep file order. Throws DataError on unreadable files or lines
/// without `=`.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path);

// Value parsers; throw UsageError naming `key` on malformed input.
double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);
std::vector<double> parse_double_list(const std::string& key, const std::string& value);
std::vector<size_t> parse_size_list(const std::string& key, const std::string& value);

}  // namespace csure
