#ifndef EXPCA_TEXT_UTILS_HPP
#define EXPCA_TEXT_UTILS_HPP

// Internal helpers for the tab-separated text formats. Not installed.

#include <cmath>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "expca/error.hpp"

namespace expca::detail {

inline std::vector<std::string> split_tabs(const std::string &line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

// Physical lines, CR stripped; empty and "#"-prefixed lines are skipped but
// keep their 1-based file line number for error messages.
inline std::vector<std::pair<int, std::string>> content_lines(std::istream &in) {
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

inline bool is_missing_marker(const std::string &cell) {
  if (cell.empty()) return true;
  if (cell.size() != 2) return false;
  return (cell[0] == 'N' || cell[0] == 'n') && (cell[1] == 'A' || cell[1] == 'a');
}

inline double parse_number(const std::string &cell, int line_number, int column_number) {
  const char *begin = cell.c_str();
  char *end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + cell.size() || cell.empty()) {
    std::ostringstream msg;
    msg << "line " << line_number << ", column " << column_number << ": cannot parse '" << cell
        << "' as a number";
    fail(msg.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "line " << line_number << ", column " << column_number << ": non-finite value '" << cell
        << "'";
    fail(msg.str());
  }
  return value;
}

}  // namespace expca::detail

#endif
