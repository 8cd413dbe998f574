#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cvo::harness {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws naming the column
  double number(std::size_t row, const std::string& name) const;
  std::optional<double> optional_number(std::size_t row, const std::string& name) const;
  // Throws if any of `names` is missing from the header.
  void require_columns(const std::vector<std::string>& names, const std::string& file) const;
};

// Shortest representation that round-trips; identical across runs.
std::string fmt(double v);
std::string fmt(const std::optional<double>& v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace cvo::harness
