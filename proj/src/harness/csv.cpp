#include "cvo/harness/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvo::harness {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error("csv schema error: missing column '" + name + "'");
}

std::optional<double> CsvTable::optional_number(std::size_t row, const std::string& name) const {
  const std::size_t c = column(name);
  if (row >= rows.size() || c >= rows[row].size())
    throw std::runtime_error("csv schema error: short row in column '" + name + "'");
  const std::string& cell = rows[row][c];
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error("csv schema error: non-numeric value '" + cell + "' in column '" +
                             name + "'");
  return v;
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const auto v = optional_number(row, name);
  if (!v) throw std::runtime_error("csv schema error: empty value in column '" + name + "'");
  return *v;
}

void CsvTable::require_columns(const std::vector<std::string>& names,
                               const std::string& file) const {
  for (const auto& n : names) {
    bool found = false;
    for (const auto& h : header) found = found || h == n;
    if (!found) throw std::runtime_error("csv schema error in " + file + ": missing column '" + n + "'");
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("fmt: conversion failed");
  return std::string(buf, ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::logic_error("write_csv: row width differs from header in " + path.string());
    write_row(row);
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else if (!line.empty()) {
      if (cells.size() != table.header.size())
        throw std::runtime_error("csv schema error in " + path.string() + ": row has " +
                                 std::to_string(cells.size()) + " fields, header has " +
                                 std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw std::runtime_error("csv schema error: empty file " + path.string());
  return table;
}

}  // namespace cvo::harness
