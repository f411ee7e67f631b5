#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace polarkit {

/// Flat "key = value" text. '#' starts a comment, blank lines are skipped and
/// a repeated key is a FormatError.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text, std::string_view source);
KeyValues read_key_values(const std::filesystem::path& path);

double parse_real(std::string_view value, std::string_view key);
long parse_integer(std::string_view value, std::string_view key);
bool parse_bool(std::string_view value, std::string_view key);

}  // namespace polarkit
