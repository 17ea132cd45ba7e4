#pragma once

// Minimal SVG previews of run records: line charts for one-dimensional sweeps
// and a colour map for heatmaps. Meant for a quick look, not for print.

#include "steerkit/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace steerkit::cli {

namespace svg_detail {

inline constexpr double width = 640.0;
inline constexpr double height = 420.0;
inline constexpr double margin = 56.0;

inline const std::vector<std::string> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
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
  void settle() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi == lo) hi = lo + 1.0;
  }
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

inline void header(std::ostream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
     << "</text>\n";
}

inline void axes(std::ostream& os, const Range& x, const Range& y, const std::string& xlabel,
                 const std::string& ylabel) {
  const double x0 = margin, x1 = width - margin, y0 = height - margin, y1 = margin;
  os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double t = k / 4.0;
    const double px = x0 + t * (x1 - x0), py = y0 - t * (y0 - y1);
    os << "<text x=\"" << px << "\" y=\"" << y0 + 14 << "\" text-anchor=\"middle\">"
       << num(x.lo + t * (x.hi - x.lo)) << "</text>\n";
    os << "<text x=\"" << x0 - 4 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
       << num(y.lo + t * (y.hi - y.lo)) << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << height - 14 << "\" text-anchor=\"middle\">" << escape(xlabel)
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << (y0 + y1) / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

// Blue (low) through white (1/2) to red (high), clamped to [0, 1].
inline std::string diverging(double v) {
  if (!std::isfinite(v)) return "#808080";
  const double t = std::clamp(v, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(40 + s * 215), g = static_cast<int>(90 + s * 165), b = 255;
  } else {
    const double s = (t - 0.5) / 0.5;
    r = 255, g = static_cast<int>(255 - s * 200), b = static_cast<int>(255 - s * 215);
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

inline void write_curves(const RunRecord& rec, std::ostream& os) {
  Range x, y;
  for (const auto& row : rec.rows) {
    x.add(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) y.add(row[c]);
  }
  x.settle();
  y.settle();
  header(os, rec.scenario.name);
  axes(os, x, y, rec.columns[0].name, "value");
  const double x0 = margin, x1 = width - margin, y0 = height - margin, y1 = margin;
  if (y.lo < steering_bound && steering_bound < y.hi) {
    const double py = y.map(steering_bound, y0, y1);
    os << "<line x1=\"" << x0 << "\" x2=\"" << x1 << "\" y1=\"" << py << "\" y2=\"" << py
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t c = 1; c < rec.columns.size(); ++c) {
    const std::string& colour = palette[(c - 1) % palette.size()];
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"" << points
           << "\"/>\n";
      points.clear();
    };
    for (const auto& row : rec.rows) {
      if (!std::isfinite(row[c]) || !std::isfinite(row[0])) {
        flush();
        continue;
      }
      points += num(x.map(row[0], x0, x1)) + "," + num(y.map(row[c], y0, y1)) + " ";
    }
    flush();
    const double ly = y1 + 14.0 * static_cast<double>(c);
    os << "<text x=\"" << x1 - 6 << "\" y=\"" << ly << "\" text-anchor=\"end\" fill=\"" << colour << "\">"
       << escape(rec.columns[c].name) << "</text>\n";
  }
  os << "</svg>\n";
}

inline void write_heatmap(const RunRecord& rec, std::ostream& os) {
  std::vector<double> xs, ys;
  for (const auto& row : rec.rows) {
    if (xs.empty() || row[1] == ys.front()) xs.push_back(row[0]);
    if (ys.empty() || row[1] != ys.back()) ys.push_back(row[1]);
  }
  Range x, y;
  for (double v : xs) x.add(v);
  for (double v : ys) y.add(v);
  x.settle();
  y.settle();
  header(os, rec.scenario.name);
  const double x0 = margin, x1 = width - margin, y0 = height - margin, y1 = margin;
  const double cw = (x1 - x0) / static_cast<double>(xs.size());
  const double ch = (y0 - y1) / static_cast<double>(ys.size());
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const std::size_t xi = i % xs.size(), yi = i / xs.size();
    os << "<rect x=\"" << num(x0 + xi * cw) << "\" y=\"" << num(y0 - (yi + 1) * ch) << "\" width=\"" << num(cw + 0.05)
       << "\" height=\"" << num(ch + 0.05) << "\" fill=\"" << diverging(rec.rows[i][2]) << "\"/>\n";
  }
  // Axes label cell centres.
  Range xc{x.lo, x.hi}, yc{y.lo, y.hi};
  axes(os, xc, yc, rec.columns[0].name, rec.columns[1].name);
  os << "</svg>\n";
}

}  // namespace svg_detail

// Renders a preview; modes without a natural picture produce nothing.
inline bool write_svg(const RunRecord& rec, std::ostream& os) {
  if (rec.rows.empty() || rec.columns.size() < 2) return false;
  switch (rec.scenario.mode) {
    case Mode::Heatmap: svg_detail::write_heatmap(rec, os); return true;
    case Mode::Curve:
    case Mode::CrossCorrelation:
    case Mode::NThreshold:
    case Mode::ValidateOracle:
    case Mode::ValidateAdiabatic: svg_detail::write_curves(rec, os); return true;
    case Mode::WorkingPoint: return false;
  }
  return false;
}

}  // namespace steerkit::cli
