#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace dff {

/// Minimal CSV support: comma-separated, optional double-quoted fields,
/// header row required by the loaders built on top.
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

/// Stable float formatting for reproducible report bytes.
std::string csv_num(double v, int precision = 10);

}  // namespace dff
