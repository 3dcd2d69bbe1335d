// Copyright 2026 The lexnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lexnav/error.hpp"
#include "lexnav/harness/metrics.hpp"

namespace lexnav::harness {

struct PlotSeries {
  std::string label;
  std::vector<BandPoint> points;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// Success rate vs environment step, one line per series with a shaded
/// min/max band. A single-point series is drawn as a marker.
inline void emit_plot(const std::vector<PlotSeries>& series, std::ostream& sink,
                      const std::string& title = "success rate") {
  if (series.empty()) throw ValidationError("emit_plot: no series");
  long max_step = 0;
  for (const auto& s : series) {
    if (s.points.empty()) throw ValidationError("emit_plot: series '" + s.label + "' is empty");
    for (const auto& p : s.points) max_step = std::max(max_step, p.env_step);
  }
  if (max_step == 0) max_step = 1;

  constexpr double W = 720, H = 420, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](long step) { return left + pw * static_cast<double>(step) / static_cast<double>(max_step); };
  auto sy = [&](double rate) { return top + ph * (1.0 - std::clamp(rate, 0.0, 1.0)); };
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  using detail::fmt;

  sink << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
       << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"15\">" << detail::xml_escape(title) << "</text>\n";

  // Axes and grid.
  sink << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double rate = k / 4.0;
    sink << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(sy(rate)) << "\" x2=\"" << fmt(left + pw)
         << "\" y2=\"" << fmt(sy(rate)) << "\" stroke=\"#ddd\"/>\n"
         << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(sy(rate) + 4) << "\" text-anchor=\"end\">"
         << fmt(rate) << "</text>\n";
    const long step = max_step * k / 4;
    sink << "<text x=\"" << fmt(sx(step)) << "\" y=\"" << fmt(top + ph + 18) << "\" text-anchor=\"middle\">"
         << step << "</text>\n";
  }
  sink << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
       << fmt(top + ph) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\""
       << fmt(top + ph) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(H - 10) << "\" text-anchor=\"middle\">"
       << "environment steps</text>\n"
       << "<text x=\"18\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fmt(top + ph / 2) << ")\">trailing success rate</text>\n"
       << "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = palette[i % std::size(palette)];
    if (s.points.size() == 1) {
      const auto& p = s.points.front();
      sink << "<circle cx=\"" << fmt(sx(p.env_step)) << "\" cy=\"" << fmt(sy(p.mean)) << "\" r=\"4\" fill=\""
           << color << "\"/>\n";
    } else {
      sink << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (const auto& p : s.points) sink << fmt(sx(p.env_step)) << ',' << fmt(sy(p.max)) << ' ';
      for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) {
        sink << fmt(sx(it->env_step)) << ',' << fmt(sy(it->min)) << ' ';
      }
      sink << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
      for (const auto& p : s.points) sink << fmt(sx(p.env_step)) << ',' << fmt(sy(p.mean)) << ' ';
      sink << "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(i);
    sink << "<rect x=\"" << fmt(left + pw + 14) << "\" y=\"" << fmt(ly - 9) << "\" width=\"12\" height=\"3\" fill=\""
         << color << "\"/>\n"
         << "<text x=\"" << fmt(left + pw + 32) << "\" y=\"" << fmt(ly - 4)
         << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::xml_escape(s.label) << "</text>\n";
  }
  sink << "</svg>\n";
}

inline std::string plot_svg(const std::vector<PlotSeries>& series, const std::string& title = "success rate") {
  std::ostringstream ss;
  emit_plot(series, ss, title);
  return ss.str();
}

}  // namespace lexnav::harness
