#pragma once
// Minimal CSV tables. Cells are stored as the exact strings that get
// written, with doubles formatted at full round-trip precision, so parsing
// an emitted file reproduces the in-memory table verbatim.

#include <filesystem>
#include <string>
#include <vector>

namespace amp::csv {

std::string format(double v);
std::string format(int v);
std::string format(long long v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

void write(const Table& table, const std::filesystem::path& path);
Table read(const std::filesystem::path& path);
bool equal(const Table& a, const Table& b);

}  // namespace amp::csv
