#include "polytope/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polytope/error.hpp"

namespace polytope {

std::string format_double(double value) {
  // 17 significant digits round-trip any double exactly.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& where) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0.0;
  auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ValidationError(where + ": cannot parse number \"" + cell + "\"");
  }
  return value;
}

}  // namespace

int CsvTable::column_index(const std::string& name_or_index) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name_or_index) return static_cast<int>(i);
  }
  try {
    const int idx = std::stoi(name_or_index);
    if (idx >= 0 && idx < static_cast<int>(columns.size())) return idx;
  } catch (...) {
  }
  throw ValidationError("no CSV column named \"" + name_or_index + "\"");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  table.columns.resize(table.header.size());
  int row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ValidationError(path + " row " + std::to_string(row) +
                            ": expected " + std::to_string(table.header.size()) +
                            " cells, got " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      table.columns[c].push_back(
          parse_cell(cells[c], path + " row " + std::to_string(row)));
    }
    ++row;
  }
  return table;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  for (const std::string& cell : split_line(text)) {
    values.push_back(parse_cell(cell, "number list"));
  }
  return values;
}

}  // namespace polytope
