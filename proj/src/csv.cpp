#include "amp/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "amp/errors.hpp"

namespace amp::csv {

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format(int v) { return std::to_string(v); }
std::string format(long long v) { return std::to_string(v); }

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw domain_error("csv: row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw numerical_error("csv: cannot open " + path.string());
  write_line(out, table.columns);
  for (const auto& row : table.rows) write_line(out, row);
  if (!out) throw numerical_error("csv: write failed for " + path.string());
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw numerical_error("csv: cannot open " + path.string());
  Table t;
  std::string line;
  if (std::getline(in, line)) t.columns = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
  }
  return t;
}

bool equal(const Table& a, const Table& b) { return a.columns == b.columns && a.rows == b.rows; }

}  // namespace amp::csv
