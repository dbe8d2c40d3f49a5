#pragma once

// Minimal CSV reading/writing: comma separator, first row header, optional
// double-quote quoting with "" as the escaped quote, LF or CRLF line ends.

#include <array>
#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ild/error.hpp"

namespace ild::csv {

using Record = std::vector<std::string>;

/// Reads one record. Returns std::nullopt at end of input. Quoted fields may
/// span several physical lines. `line_no` is advanced by the number of
/// physical lines consumed.
inline std::optional<Record> read_record(std::istream& in, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    ++line_no;

    Record fields;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i == line.size()) {
            if (in_quotes) {
                // Embedded newline inside a quoted field.
                std::string next;
                if (!std::getline(in, next)) {
                    throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
                }
                ++line_no;
                field.push_back('\n');
                line = std::move(next);
                i = 0;
                continue;
            }
            break;
        }
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\r' && i + 1 == line.size()) {
            // CRLF line end
        } else {
            field.push_back(c);
        }
        ++i;
    }
    fields.push_back(std::move(field));
    return fields;
}

inline std::string quote_if_needed(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_record(std::ostream& out, const Record& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote_if_needed(fields[i]);
    }
    out << '\n';
}

/// Shortest decimal representation that round-trips; identical on every
/// platform with a conforming to_chars.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace ild::csv
