#include "polarkit/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "polarkit/error.hpp"

namespace polarkit {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text, std::string_view source) {
    KeyValues out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) throw FormatError(where + ": expected key=value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw FormatError(where + ": empty key");
        if (!out.emplace(std::string(key), std::string(value)).second) {
            throw FormatError(where + ": duplicate key '" + std::string(key) + "'");
        }
    }
    return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str(), path.string());
}

double parse_real(std::string_view value, std::string_view key) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || end != value.data() + value.size() || !std::isfinite(v)) {
        throw FormatError("key '" + std::string(key) + "': expected a real number, got '" + std::string(value) + "'");
    }
    return v;
}

long parse_integer(std::string_view value, std::string_view key) {
    long v = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || end != value.data() + value.size()) {
        throw FormatError("key '" + std::string(key) + "': expected an integer, got '" + std::string(value) + "'");
    }
    return v;
}

bool parse_bool(std::string_view value, std::string_view key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw FormatError("key '" + std::string(key) + "': expected true/false, got '" + std::string(value) + "'");
}

}  // namespace polarkit
