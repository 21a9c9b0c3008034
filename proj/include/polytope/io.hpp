#pragma once

#include <string>
#include <vector>

namespace polytope {

// 17-significant-digit decimal form; parses back to the same double.
std::string format_double(double value);

// Reads a CSV with a header row; all cells must be numeric.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  int column_index(const std::string& name_or_index) const;
};

CsvTable read_csv(const std::string& path);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace polytope
