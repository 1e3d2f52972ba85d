// Copyright 2026 The mppca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPPCA_REPORT_HPP
#define MPPCA_REPORT_HPP

/*!@file
 * Static SVG monitoring charts: one statistic against sample index with its
 * control limit drawn as a single dashed line. Output depends only on the
 * input values, so equal inputs give byte-identical files.
 */

#include <mppca/data_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace mppca {

struct ChartSeries {
  std::string name;  // e.g. "tc2"
  std::string title;
  std::vector<std::int64_t> index;
  std::vector<double> values;
  double limit = 0.0;
};

namespace detail {

// Fixed 3-decimal coordinates keep the text stable across platforms.
inline std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

}  // namespace detail

inline std::string render_chart_svg(const ChartSeries& s) {
  if (s.values.empty() || s.index.size() != s.values.size()) {
    throw DataError("chart '" + s.name + "' needs a non-empty series with one index per value");
  }
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 300.0;
  constexpr double kLeft = 60.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 30.0;
  constexpr double kBottom = 40.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
  double y_min = std::min(0.0, std::min(*lo_it, s.limit));
  double y_max = std::max(*hi_it, s.limit);
  if (y_max <= y_min) y_max = y_min + 1.0;
  y_max += 0.05 * (y_max - y_min);
  const auto x_min = static_cast<double>(s.index.front());
  double x_max = static_cast<double>(s.index.back());
  if (x_max <= x_min) x_max = x_min + 1.0;

  const auto px = [&](double x) { return kLeft + plot_w * (x - x_min) / (x_max - x_min); };
  const auto py = [&](double y) { return kTop + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"300\" viewBox=\"0 0 800 300\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"300\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         detail::escape_xml(s.title) + "</text>\n";
  svg += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + detail::coord(kLeft) + "\" y1=\"" + detail::coord(kTop + plot_h) + "\" x2=\"" +
         detail::coord(kLeft + plot_w) + "\" y2=\"" + detail::coord(kTop + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + detail::coord(kLeft) + "\" y1=\"" + detail::coord(kTop) + "\" x2=\"" +
         detail::coord(kLeft) + "\" y2=\"" + detail::coord(kTop + plot_h) + "\"/>\n";
  svg += "</g>\n";
  const auto label = [&](double x, double y, const std::string& anchor, const std::string& text) {
    svg += "<text x=\"" + detail::coord(x) + "\" y=\"" + detail::coord(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + text + "</text>\n";
  };
  label(kLeft, kTop + plot_h + 16.0, "start", std::to_string(s.index.front()));
  label(kLeft + plot_w, kTop + plot_h + 16.0, "end", std::to_string(s.index.back()));
  label(kLeft + plot_w / 2.0, kHeight - 6.0, "middle", "sample");
  label(kLeft - 6.0, kTop + plot_h, "end", format_double(y_min));
  label(kLeft - 6.0, kTop + 10.0, "end", format_double(y_max));

  svg += "<polyline class=\"series\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    if (n > 0) svg += ' ';
    svg += detail::coord(px(static_cast<double>(s.index[n]))) + "," + detail::coord(py(s.values[n]));
  }
  svg += "\"/>\n";
  svg += "<line class=\"threshold\" x1=\"" + detail::coord(kLeft) + "\" y1=\"" + detail::coord(py(s.limit)) +
         "\" x2=\"" + detail::coord(kLeft + plot_w) + "\" y2=\"" + detail::coord(py(s.limit)) +
         "\" stroke=\"crimson\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
  label(kLeft + plot_w, py(s.limit) - 4.0, "end", "limit " + format_double(s.limit));
  svg += "</svg>\n";
  return svg;
}

/// T^2, SPE and T_c^2 charts from a statistics table. The limit is taken
/// from the first row.
inline std::vector<ChartSeries> chart_series(const StatisticsTable& t) {
  if (t.size() == 0) throw DataError("statistics table has no rows");
  return {
      {"t2", "T2 statistic", t.index, t.t2, t.j_t2.front()},
      {"spe", "SPE statistic", t.index, t.spe, t.j_spe.front()},
      {"tc2", "Tc2 statistic", t.index, t.tc2, t.j_tc2.front()},
  };
}

/// Plotted series as CSV: index,<name>,limit.
inline std::string format_series_csv(const ChartSeries& s) {
  std::string out = "index," + s.name + ",limit\n";
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    out += std::to_string(s.index[n]) + "," + format_double(s.values[n]) + "," + format_double(s.limit) + "\n";
  }
  return out;
}

}  // namespace mppca

#endif  // MPPCA_REPORT_HPP
