#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace migc {

/// Fixed textual form for reals in CSV output; identical bytes for identical
/// doubles on every platform with IEEE-754 printf.
inline std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

inline void append_csv_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
}

/// Splits simple comma-separated text (no quoting) into rows of fields.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t f = 0;
    for (;;) {
      const std::size_t comma = line.find(',', f);
      fields.emplace_back(line.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    rows.push_back(std::move(fields));
    start = end + 1;
  }
  return rows;
}

}  // namespace migc
