#include "dequant/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dequant/error.hpp"

namespace dequant::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, std::string_view message) {
  throw Error(ErrorCode::kParseError, fmt::format("{}:{}: {}", source, line, message));
}

std::vector<std::string> split(std::string_view line, std::string_view source, std::size_t number) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (true) {
    std::string field;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) fail(source, number, "unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i < line.size() && line[i] != ',') fail(source, number, "text after closing quote");
    } else {
      const std::size_t end = std::min(line.find(',', i), line.size());
      field = std::string(trim(line.substr(i, end - i)));
      i = end;
    }
    out.push_back(std::move(field));
    if (i >= line.size()) return out;
    ++i;  // comma
  }
}

}  // namespace

std::vector<Row> parse(std::string_view text, std::string_view source, std::initializer_list<std::string_view> header) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<Row> rows;
  bool seen_header = false;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const std::size_t end = std::min(text.find('\n'), text.size());
    std::string_view line = text.substr(0, end);
    text.remove_prefix(std::min(end + 1, text.size()));
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (trim(line).empty()) continue;

    auto fields = split(line, source, number);
    if (!seen_header) {
      seen_header = true;
      bool matches = fields.size() == header.size();
      std::size_t k = 0;
      for (auto expected : header) matches = matches && fields[k++] == expected;
      if (!matches) {
        std::string wanted;
        for (auto expected : header) wanted += (wanted.empty() ? "" : ",") + std::string(expected);
        fail(source, number, fmt::format("expected header '{}'", wanted));
      }
      continue;
    }
    if (fields.size() != header.size()) {
      fail(source, number, fmt::format("expected {} fields, found {}", header.size(), fields.size()));
    }
    rows.push_back({number, std::move(fields)});
  }
  if (!seen_header) fail(source, 1, "missing header row");
  return rows;
}

std::vector<Row> read(const std::filesystem::path& path, std::initializer_list<std::string_view> header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot open {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, fmt::format("cannot read {}", path.string()));
  return parse(buffer.str(), path.string(), header);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

int parse_int(const Row& row, std::size_t column, std::string_view source) {
  const std::string& s = row.fields[column];
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(source, row.line, fmt::format("'{}' is not an integer", s));
  }
  return value;
}

double parse_double(const Row& row, std::size_t column, std::string_view source) {
  const std::string& s = row.fields[column];
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    fail(source, row.line, fmt::format("'{}' is not a finite number", s));
  }
  return value;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot open {} for writing", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("failed writing {}", path.string()));
}

}  // namespace dequant::csv
