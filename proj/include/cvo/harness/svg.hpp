#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cvo::harness {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<std::optional<double>> y;
  // Optional shaded envelope, same length as x when present.
  std::vector<double> band_lo;
  std::vector<double> band_hi;
  bool markers_only = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // Horizontal reference line, e.g. the joint baseline.
  std::optional<double> reference;
  std::string reference_label;
};

// SVG 1.1 line chart. Output depends only on the chart contents.
std::string render_svg(const Chart& chart);

}  // namespace cvo::harness
