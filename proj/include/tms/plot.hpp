#pragma once

// Minimal SVG line charts for Monte Carlo result files: one polyline per
// series, a shaded band of +-2 standard errors, point markers and a legend.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tms/csv.hpp"
#include "tms/error.hpp"
#include "tms/format.hpp"

namespace tms {

struct PlotSpec {
  std::string input_path;
  std::string output_path;
  std::string x_column = "s";
  std::string series_column = "method";
  std::string y_column = "value";
  std::string band_column = "mc_se";
  std::string title;
  /// Keep only rows whose `metric` column equals this (ignored if the file
  /// has no such column).
  std::optional<std::string> metric;
};

namespace detail {

struct SeriesPoint {
  double x, y, band;
};

inline std::string xml_escape(const std::string& s) {
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

// Tick step of 1, 2 or 5 times a power of ten giving about five ticks.
inline double tick_step(double span) {
  if (!(span > 0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace detail

/// SVG document for the table; throws MissingColumn or InvalidInput (no data).
inline std::string render_plot_svg(const CsvTable& table, const PlotSpec& spec) {
  const std::size_t cx = table.column(spec.x_column), cs = table.column(spec.series_column),
                    cy = table.column(spec.y_column), cb = table.column(spec.band_column);
  const std::optional<std::size_t> cm =
      spec.metric && table.has("metric") ? std::optional(table.column("metric")) : std::nullopt;

  std::vector<std::string> order;
  std::map<std::string, std::vector<detail::SeriesPoint>> series;
  const auto& rows = table.rows();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (cm && rows[r][*cm] != *spec.metric) continue;
    const auto& name = rows[r][cs];
    if (!series.count(name)) order.push_back(name);
    series[name].push_back({detail::cell_double(rows[r][cx], r, "x"),
                            detail::cell_double(rows[r][cy], r, "y"),
                            detail::cell_double(rows[r][cb], r, "band")});
  }
  if (series.empty()) throw Error(ErrorKind::InvalidInput, "no data to plot");

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (auto& [name, pts] : series) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.x < b.x; });
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y - 2 * p.band);
      y1 = std::max(y1, p.y + 2 * p.band);
    }
  }
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  y0 = std::min(y0, 0.0);

  const double width = 720, height = 480, left = 80, right = 160, top = 50, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << detail::xml_escape(spec.title)
        << "</text>\n";
  }
  // axes and ticks
  svg << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\"/>\n</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const double xs = detail::tick_step(x1 - x0), ys = detail::tick_step(y1 - y0);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    svg << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">" << format_double(std::round(t / xs) * xs) << "</text>\n";
  }
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\""
        << py(t) << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(t) + 4
        << "\" text-anchor=\"end\">" << format_double(std::round(t / ys) * ys) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\""
      << " font-size=\"13\">" << detail::xml_escape(spec.x_column) << "</text>\n"
      << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\""
      << " transform=\"rotate(-90 20 " << top + ph / 2 << ")\">"
      << detail::xml_escape(spec.metric ? *spec.metric : spec.y_column) << "</text>\n</g>\n";

  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& pts = series.at(order[k]);
    const char* color = palette[k % (sizeof palette / sizeof *palette)];
    svg << "<g class=\"series\" data-name=\"" << detail::xml_escape(order[k]) << "\">\n";
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (const auto& p : pts) svg << px(p.x) << ',' << py(p.y + 2 * p.band) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      svg << px(it->x) << ',' << py(it->y - 2 * it->band) << ' ';
    }
    svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) svg << px(p.x) << ',' << py(p.y) << ' ';
    svg << "\"/>\n";
    for (const auto& p : pts) {
      svg << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = top + 20 + 20 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw + 20 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 45
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << left + pw + 52 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(order[k])
        << "</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void render_plot(const PlotSpec& spec) {
  std::ifstream in(spec.input_path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + spec.input_path);
  const auto table = CsvTable::parse(in);
  const std::string svg = render_plot_svg(table, spec);
  detail::write_file(spec.output_path, [&](std::ostream& o) { o << svg; });
}

}  // namespace tms
