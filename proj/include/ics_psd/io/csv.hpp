#pragma once

// Numeric CSV in and out. First row is a header; an optional final column
// named "label" holds integer group labels. Values are written with 17
// significant digits so that a write/read cycle is lossless.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ics_psd/errors.hpp"
#include "ics_psd/linalg.hpp"

namespace ics_psd::io {

struct CsvTable {
  std::vector<std::string> header;
  DataMatrix data;
  std::optional<std::vector<int>> labels;
};

/// Shortest form is not required; %.17g round-trips every finite double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses CSV text. `source` names the input in error messages.
inline CsvTable parse_csv(std::string_view text, std::string_view source = "input") {
  const std::string where(source);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
    if (!detail::trim(line).empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw IoError(where + ": file is empty");
  if (lines.front().substr(0, 3) == "\xEF\xBB\xBF") lines.front().remove_prefix(3);

  CsvTable table;
  for (auto cell : detail::split_line(lines.front())) table.header.emplace_back(detail::trim(cell));
  if (lines.size() == 1) throw IoError(where + ": header present but no data rows");

  const auto width = static_cast<Index>(table.header.size());
  const bool has_label = width > 1 && table.header.back() == "label";
  const Index p = has_label ? width - 1 : width;
  const auto n = static_cast<Index>(lines.size() - 1);
  table.data.resize(n, p);
  if (has_label) table.labels.emplace(static_cast<std::size_t>(n), 0);

  for (Index i = 0; i < n; ++i) {
    const auto cells = detail::split_line(lines[static_cast<std::size_t>(i + 1)]);
    const std::string row = std::to_string(i + 2);
    if (static_cast<Index>(cells.size()) != width) {
      throw IoError(where + ": row " + row + " has " + std::to_string(cells.size()) +
                    " fields, header has " + std::to_string(width));
    }
    for (Index j = 0; j < p; ++j) {
      double v = 0.0;
      if (!detail::parse_number(cells[static_cast<std::size_t>(j)], v)) {
        throw IoError(where + ": row " + row + ", column '" + table.header[static_cast<std::size_t>(j)] +
                      "' is not numeric: '" + std::string(detail::trim(cells[static_cast<std::size_t>(j)])) + "'");
      }
      table.data(i, j) = v;
    }
    if (has_label) {
      const std::string_view cell = detail::trim(cells.back());
      int label = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw IoError(where + ": row " + row + ", label is not an integer: '" + std::string(cell) + "'");
      }
      (*table.labels)[static_cast<std::size_t>(i)] = label;
    }
  }
  return table;
}

inline CsvTable ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

/// Header defaults to x1..xp; labels become a trailing "label" column.
inline std::string format_csv(const DataMatrix& data, const std::vector<int>* labels = nullptr,
                              std::vector<std::string> header = {}) {
  if (header.empty()) {
    for (Index j = 0; j < data.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Index>(header.size()) != data.cols()) throw ShapeError("format_csv: header width mismatch");
  if (labels != nullptr && static_cast<Index>(labels->size()) != data.rows()) {
    throw ShapeError("format_csv: label count mismatch");
  }
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out += ',';
    out += header[j];
  }
  if (labels != nullptr) out += ",label";
  out += '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(data(i, j));
    }
    if (labels != nullptr) out += "," + std::to_string((*labels)[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

inline void write_text(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(path + ": write failed");
}

inline void emit_csv(const std::string& path, const DataMatrix& data,
                     const std::vector<int>* labels = nullptr, std::vector<std::string> header = {}) {
  write_text(path, format_csv(data, labels, std::move(header)));
}

}  // namespace ics_psd::io
