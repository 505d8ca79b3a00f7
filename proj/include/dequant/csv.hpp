#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace dequant::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// Comma-separated text with a mandatory header. Fields are trimmed of
/// surrounding spaces; double quotes may wrap a field ("" escapes a quote).
/// Blank lines are skipped, CRLF and a leading UTF-8 BOM are accepted.
///
/// Throws Error(kParseError) naming `source` and the line when the header
/// differs from `header` or a row has the wrong number of fields.
std::vector<Row> parse(std::string_view text, std::string_view source, std::initializer_list<std::string_view> header);

/// Reads the file and parses it. Throws Error(kIoError) if it cannot be read.
std::vector<Row> read(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

/// Quotes a field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

int parse_int(const Row& row, std::size_t column, std::string_view source);
double parse_double(const Row& row, std::size_t column, std::string_view source);

/// Throws Error(kIoError) on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace dequant::csv
