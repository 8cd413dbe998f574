#include "cvo/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cvo::harness {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) < 1e-2 || std::abs(v) >= 1e4))
    std::snprintf(buf, sizeof buf, "%.1e", v);
  else
    std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render_svg(const Chart& chart) {
  Range xr, yr;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i < s.y.size() && s.y[i]) {
        xr.add(s.x[i]);
        yr.add(*s.y[i]);
      }
      if (i < s.band_lo.size()) yr.add(s.band_lo[i]);
      if (i < s.band_hi.size()) yr.add(s.band_hi[i]);
    }
  }
  if (chart.reference) yr.add(*chart.reference);
  xr.finish();
  yr.finish();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(chart.title) << "</text>\n";

  // Axes and ticks.
  o << "<g stroke=\"black\" fill=\"none\">\n"
    << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw)
    << "\" y2=\"" << num(kTop + ph) << "\"/>\n"
    << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
    << "\" y2=\"" << num(kTop + ph) << "\"/>\n</g>\n";
  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = xr.lo + (xr.hi - xr.lo) * t / kTicks;
    const double yv = yr.lo + (yr.hi - yr.lo) * t / kTicks;
    o << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(xv))
      << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 18)
      << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n"
      << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft + pw)
      << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#e0e0e0\"/>\n"
      << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(yv) + 4)
      << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16)
    << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n"
    << "<text transform=\"translate(18," << num(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";

  if (chart.reference) {
    o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(*chart.reference)) << "\" x2=\""
      << num(kLeft + pw) << "\" y2=\"" << num(py(*chart.reference))
      << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  }

  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const Series& s = chart.series[si];
    const std::string color = kPalette[si % std::size(kPalette)];
    if (!s.band_lo.empty() && s.band_lo.size() == s.x.size() && s.band_hi.size() == s.x.size()) {
      o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o << num(px(s.x[i])) << "," << num(py(s.band_hi[i])) << " ";
      for (std::size_t i = s.x.size(); i-- > 0;)
        o << num(px(s.x[i])) << "," << num(py(s.band_lo[i])) << (i ? " " : "");
      o << "\"/>\n";
    }
    // Split the series into runs of consecutive defined points.
    std::vector<std::vector<std::size_t>> runs(1);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i < s.y.size() && s.y[i]) runs.back().push_back(i);
      else if (!runs.back().empty()) runs.emplace_back();
    }
    for (const auto& run : runs) {
      if (run.empty()) continue;
      if (run.size() == 1 || s.markers_only) {
        for (std::size_t i : run)
          o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(*s.y[i]))
            << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        continue;
      }
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t n = 0; n < run.size(); ++n)
        o << num(px(s.x[run[n]])) << "," << num(py(*s.y[run[n]])) << (n + 1 < run.size() ? " " : "");
      o << "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(si);
    o << "<rect x=\"" << num(kWidth - kRight + 14) << "\" y=\"" << num(ly - 8)
      << "\" width=\"14\" height=\"10\" fill=\"" << color << "\"/>\n"
      << "<text x=\"" << num(kWidth - kRight + 34) << "\" y=\"" << num(ly) << "\">"
      << escape(s.name) << "</text>\n";
  }
  if (chart.reference && !chart.reference_label.empty()) {
    const double ly = kTop + 10 + 18.0 * static_cast<double>(chart.series.size());
    o << "<line x1=\"" << num(kWidth - kRight + 14) << "\" y1=\"" << num(ly - 3) << "\" x2=\""
      << num(kWidth - kRight + 28) << "\" y2=\"" << num(ly - 3)
      << "\" stroke=\"black\" stroke-dasharray=\"4,2\"/>\n"
      << "<text x=\"" << num(kWidth - kRight + 34) << "\" y=\"" << num(ly) << "\">"
      << escape(chart.reference_label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace cvo::harness
