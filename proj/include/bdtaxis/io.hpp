// Deterministic artifact writers for the command-line workflows: CSV tables,
// JSON documents, and self-contained SVG charts (axis/polyline/rect markup
// emitted directly, no external assets). Every floating-point number goes
// through one fixed formatter, so identical inputs yield byte-identical
// files.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdtaxis/params.hpp"

namespace bdtaxis {

/// Key-ordered JSON document (insertion order preserved on serialization).
using Json = nlohmann::ordered_json;

/// Shortest exact decimal form used in every emitted file.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Compact form for chart coordinates and tick labels.
inline std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

/// CSV with a header row; '.' decimal separator, '\n' line ends.
inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) text += ',';
    text += header[j];
  }
  text += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ConfigError("csv row width does not match the header");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) text += ',';
      text += fmt17(row[j]);
    }
    text += '\n';
  }
  write_text(path, text);
}

inline void write_json(const std::string& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

namespace svg {

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// 1-2-5 tick spacing aiming for about `target` intervals.
inline double nice_step(double range, int target) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  if (norm < 1.5) step = 1.0;
  else if (norm < 3.5) step = 2.0;
  else if (norm < 7.5) step = 5.0;
  return step * mag;
}

struct Axis {
  double lo = 0.0, hi = 1.0;  // data range (padded)
  double p0 = 0.0, p1 = 1.0;  // pixel range
  double map(double v) const { return p0 + (v - lo) / (hi - lo) * (p1 - p0); }
};

inline Axis make_axis(double lo, double hi, double p0, double p1) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) { lo = 0.0; hi = 1.0; }
  if (hi <= lo) {
    const double c = lo;
    lo = c - std::max(1.0, std::abs(c));
    hi = c + std::max(1.0, std::abs(c));
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return Axis{lo, hi, p0, p1};
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

/// Linear interpolation through a fixed dark-to-bright color ramp.
inline std::string ramp_color(double t) {
  static const double stops[][3] = {
      {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
      {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
      {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
      {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 10.0;
  const int i = std::min(9, static_cast<int>(pos));
  const double f = pos - i;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<unsigned>(std::lround(255.0 * (stops[i][0] + f * (stops[i + 1][0] - stops[i][0])))),
                static_cast<unsigned>(std::lround(255.0 * (stops[i][1] + f * (stops[i + 1][1] - stops[i][1])))),
                static_cast<unsigned>(std::lround(255.0 * (stops[i][2] + f * (stops[i + 1][2] - stops[i][2])))));
  return buf;
}

}  // namespace svg

/// One curve of a line chart; non-finite samples split the polyline.
struct Series {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;
  bool dashed = false;
};

/// Line/scatter chart with axes, 1-2-5 ticks, and a legend.
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series) {
  const double W = 860, H = 540, ml = 76, mr = 24, mt = 46, mb = 58;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw ConfigError("chart series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  const svg::Axis ax = svg::make_axis(xlo, xhi, ml, W - mr);
  const svg::Axis ay = svg::make_axis(ylo, yhi, H - mb, mt);

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::px(W) +
         "\" height=\"" + svg::px(H) + "\" viewBox=\"0 0 " + svg::px(W) + " " +
         svg::px(H) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + svg::px(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + svg::escape(title) + "</text>\n";

  // Grid and ticks.
  const double sx = svg::nice_step(ax.hi - ax.lo, 6);
  const double sy = svg::nice_step(ay.hi - ay.lo, 6);
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (double t = std::ceil(ax.lo / sx) * sx; t <= ax.hi + 1e-12 * sx; t += sx) {
    const double gx = ax.map(t);
    out += "<line x1=\"" + svg::px(gx) + "\" y1=\"" + svg::px(mt) + "\" x2=\"" +
           svg::px(gx) + "\" y2=\"" + svg::px(H - mb) +
           "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + svg::px(gx) + "\" y=\"" + svg::px(H - mb + 16) +
           "\" text-anchor=\"middle\">" + fmt6(t == 0.0 ? 0.0 : t) + "</text>\n";
  }
  for (double t = std::ceil(ay.lo / sy) * sy; t <= ay.hi + 1e-12 * sy; t += sy) {
    const double gy = ay.map(t);
    out += "<line x1=\"" + svg::px(ml) + "\" y1=\"" + svg::px(gy) + "\" x2=\"" +
           svg::px(W - mr) + "\" y2=\"" + svg::px(gy) +
           "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + svg::px(ml - 6) + "\" y=\"" + svg::px(gy + 4) +
           "\" text-anchor=\"end\">" + fmt6(t == 0.0 ? 0.0 : t) + "</text>\n";
  }
  out += "</g>\n";
  out += "<rect x=\"" + svg::px(ml) + "\" y=\"" + svg::px(mt) + "\" width=\"" +
         svg::px(W - ml - mr) + "\" height=\"" + svg::px(H - mt - mb) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out += "<text x=\"" + svg::px((ml + W - mr) / 2) + "\" y=\"" + svg::px(H - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         svg::escape(xlabel) + "</text>\n";
  out += "<text x=\"20\" y=\"" + svg::px((mt + H - mb) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 20 " + svg::px((mt + H - mb) / 2) + ")\">" +
         svg::escape(ylabel) + "</text>\n";

  // Data.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = svg::palette(si);
    std::string pts;
    auto flush = [&]() {
      if (pts.empty()) return;
      out += "<polyline fill=\"none\" stroke=\"";
      out += color;
      out += "\" stroke-width=\"1.6\"";
      if (s.dashed) out += " stroke-dasharray=\"6 4\"";
      out += " points=\"" + pts + "\"/>\n";
      pts.clear();
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += svg::px(ax.map(s.x[i])) + "," + svg::px(ay.map(s.y[i]));
    }
    flush();
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out += "<circle cx=\"" + svg::px(ax.map(s.x[i])) + "\" cy=\"" +
               svg::px(ay.map(s.y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    }
  }

  // Legend (skip when every label is empty).
  bool any_label = false;
  for (const auto& s : series) any_label = any_label || !s.label.empty();
  if (any_label) {
    const double lx = W - mr - 210, ly0 = mt + 10;
    out += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect x=\"" + svg::px(lx - 8) + "\" y=\"" + svg::px(ly0 - 14) +
           "\" width=\"210\" height=\"" + svg::px(18.0 * series.size() + 10) +
           "\" fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#cccccc\"/>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
      const double ly = ly0 + 18.0 * si;
      out += "<line x1=\"" + svg::px(lx) + "\" y1=\"" + svg::px(ly - 4) +
             "\" x2=\"" + svg::px(lx + 26) + "\" y2=\"" + svg::px(ly - 4) +
             "\" stroke=\"" + svg::palette(si) + "\" stroke-width=\"2\"";
      if (series[si].dashed) out += " stroke-dasharray=\"6 4\"";
      out += "/>\n";
      out += "<text x=\"" + svg::px(lx + 32) + "\" y=\"" + svg::px(ly) + "\">" +
             svg::escape(series[si].label) + "</text>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  write_text(path, out);
}

/// Space-time heat map: rows index the vertical axis bottom-to-top (one row
/// per sample time), columns the horizontal axis. Large fields are block-mean
/// downsampled so the file stays small.
inline void write_svg_heatmap(const std::string& path, const std::string& title,
                              const std::string& xlabel, const std::string& ylabel,
                              const std::vector<std::vector<double>>& field,
                              double x0, double x1, double y0, double y1) {
  if (field.empty() || field.front().empty())
    throw ConfigError("heat map needs a nonempty field");
  const std::size_t cols_in = field.front().size();
  for (const auto& r : field)
    if (r.size() != cols_in) throw ConfigError("heat map rows have unequal widths");

  // Block-mean downsample to at most 144 x 108 cells.
  const std::size_t cols = std::min<std::size_t>(cols_in, 144);
  const std::size_t rows = std::min<std::size_t>(field.size(), 108);
  std::vector<std::vector<double>> cell(rows, std::vector<double>(cols, 0.0));
  double vlo = INFINITY, vhi = -INFINITY;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t r0 = r * field.size() / rows, r1 = (r + 1) * field.size() / rows;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t c0 = c * cols_in / cols, c1 = (c + 1) * cols_in / cols;
      double acc = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i = r0; i < std::max(r1, r0 + 1); ++i)
        for (std::size_t j = c0; j < std::max(c1, c0 + 1); ++j) {
          acc += field[i][j];
          ++cnt;
        }
      cell[r][c] = acc / static_cast<double>(cnt);
      if (std::isfinite(cell[r][c])) {
        vlo = std::min(vlo, cell[r][c]);
        vhi = std::max(vhi, cell[r][c]);
      }
    }
  }
  if (!std::isfinite(vlo)) { vlo = 0.0; vhi = 1.0; }
  if (vhi <= vlo) { vlo -= 0.5; vhi += 0.5; }

  const double W = 860, H = 540, ml = 76, mr = 96, mt = 46, mb = 58;
  const double pw = (W - ml - mr) / static_cast<double>(cols);
  const double ph = (H - mt - mb) / static_cast<double>(rows);
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::px(W) +
         "\" height=\"" + svg::px(H) + "\" viewBox=\"0 0 " + svg::px(W) + " " +
         svg::px(H) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + svg::px(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + svg::escape(title) + "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    // Row 0 is the earliest sample; draw it at the bottom.
    const double ry = H - mb - (static_cast<double>(r) + 1.0) * ph;
    for (std::size_t c = 0; c < cols; ++c) {
      const double t = (cell[r][c] - vlo) / (vhi - vlo);
      out += "<rect x=\"" + svg::px(ml + static_cast<double>(c) * pw) + "\" y=\"" +
             svg::px(ry) + "\" width=\"" + svg::px(pw + 0.5) + "\" height=\"" +
             svg::px(ph + 0.5) + "\" fill=\"" + svg::ramp_color(t) + "\"/>\n";
    }
  }
  out += "<rect x=\"" + svg::px(ml) + "\" y=\"" + svg::px(mt) + "\" width=\"" +
         svg::px(W - ml - mr) + "\" height=\"" + svg::px(H - mt - mb) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // Axis end labels and titles.
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  out += "<text x=\"" + svg::px(ml) + "\" y=\"" + svg::px(H - mb + 16) +
         "\" text-anchor=\"middle\">" + fmt6(x0) + "</text>\n";
  out += "<text x=\"" + svg::px(W - mr) + "\" y=\"" + svg::px(H - mb + 16) +
         "\" text-anchor=\"middle\">" + fmt6(x1) + "</text>\n";
  out += "<text x=\"" + svg::px(ml - 6) + "\" y=\"" + svg::px(H - mb) +
         "\" text-anchor=\"end\">" + fmt6(y0) + "</text>\n";
  out += "<text x=\"" + svg::px(ml - 6) + "\" y=\"" + svg::px(mt + 10) +
         "\" text-anchor=\"end\">" + fmt6(y1) + "</text>\n";
  out += "</g>\n";
  out += "<text x=\"" + svg::px((ml + W - mr) / 2) + "\" y=\"" + svg::px(H - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         svg::escape(xlabel) + "</text>\n";
  out += "<text x=\"20\" y=\"" + svg::px((mt + H - mb) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 20 " + svg::px((mt + H - mb) / 2) + ")\">" +
         svg::escape(ylabel) + "</text>\n";

  // Color bar.
  const double bx = W - mr + 24, bw = 16, bh = H - mt - mb;
  for (int i = 0; i < 64; ++i) {
    const double t = (i + 0.5) / 64.0;
    out += "<rect x=\"" + svg::px(bx) + "\" y=\"" +
           svg::px(H - mb - (i + 1) * bh / 64.0) + "\" width=\"" + svg::px(bw) +
           "\" height=\"" + svg::px(bh / 64.0 + 0.5) + "\" fill=\"" +
           svg::ramp_color(t) + "\"/>\n";
  }
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  out += "<text x=\"" + svg::px(bx + bw + 4) + "\" y=\"" + svg::px(H - mb) + "\">" +
         fmt6(vlo) + "</text>\n";
  out += "<text x=\"" + svg::px(bx + bw + 4) + "\" y=\"" + svg::px(mt + 10) + "\">" +
         fmt6(vhi) + "</text>\n";
  out += "</g>\n";
  out += "</svg>\n";
  write_text(path, out);
}

}  // namespace bdtaxis
