#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "siot/error.hpp"

namespace siot::csv {

/// Splits one line on commas. No quoting: none of the formats here need it.
inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

/// Reads non-empty lines, stripping a trailing CR. `line_number` is 1-based.
struct Line {
  std::size_t line_number;
  std::string text;
};

inline std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (trim(text).empty()) continue;
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

/// Checks the header row and returns the data rows split into fields.
/// Errors carry `source:line` context.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_table(
    std::istream& in, std::string_view expected_header, std::string_view source) {
  auto lines = read_lines(in);
  if (lines.empty() || trim(lines.front().text) != expected_header) {
    fail(ErrorCode::MalformedRow,
         std::string(source) + ":1: expected header '" + std::string(expected_header) + "'");
  }
  const std::size_t columns = split(expected_header).size();
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i].text);
    if (fields.size() != columns) {
      fail(ErrorCode::MalformedRow, std::string(source) + ":" + std::to_string(lines[i].line_number) +
                                        ": expected " + std::to_string(columns) + " columns, got " +
                                        std::to_string(fields.size()));
    }
    std::vector<std::string> owned;
    owned.reserve(fields.size());
    for (auto f : fields) owned.emplace_back(trim(f));
    rows.emplace_back(lines[i].line_number, std::move(owned));
  }
  return rows;
}

inline std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

/// 17 significant digits: round-trips any double.
inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace siot::csv
