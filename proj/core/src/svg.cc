// Copyright 2026 The llpbag Authors.
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

#include "llpbag/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace llpbag {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string Escape(const std::string& s) {
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

void DataRange(const LineChart& chart, bool x_axis, double* lo, double* hi) {
  *lo = std::numeric_limits<double>::infinity();
  *hi = -std::numeric_limits<double>::infinity();
  for (const Series& s : chart.series) {
    const auto& v = x_axis ? s.x : s.y;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) continue;
      const double err = (!x_axis && i < s.y_err.size()) ? s.y_err[i] : 0.0;
      *lo = std::min(*lo, v[i] - err);
      *hi = std::max(*hi, v[i] + err);
    }
  }
  if (!std::isfinite(*lo)) {
    *lo = 0.0;
    *hi = 1.0;
  }
  if (*hi - *lo < 1e-12) {
    *lo -= 0.5;
    *hi += 0.5;
  }
}

}  // namespace

std::string RenderSvg(const LineChart& chart) {
  double x0 = chart.x_min, x1 = chart.x_max, y0 = chart.y_min, y1 = chart.y_max;
  if (x0 == x1) DataRange(chart, true, &x0, &x1);
  if (y0 == y1) DataRange(chart, false, &y0, &y1);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(kWidth)
     << "\" height=\"" << Num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << Num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << Escape(chart.title) << "</text>\n";
  os << "<rect x=\"" << Num(kLeft) << "\" y=\"" << Num(kTop) << "\" width=\"" << Num(pw)
     << "\" height=\"" << Num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double fx = x0 + (x1 - x0) * t / kTicks;
    const double fy = y0 + (y1 - y0) * t / kTicks;
    os << "<line x1=\"" << Num(px(fx)) << "\" y1=\"" << Num(kTop + ph) << "\" x2=\""
       << Num(px(fx)) << "\" y2=\"" << Num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << Num(px(fx)) << "\" y=\"" << Num(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << Tick(fx) << "</text>\n";
    os << "<line x1=\"" << Num(kLeft - 5) << "\" y1=\"" << Num(py(fy)) << "\" x2=\""
       << Num(kLeft) << "\" y2=\"" << Num(py(fy)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << Num(kLeft - 8) << "\" y=\"" << Num(py(fy) + 4)
       << "\" text-anchor=\"end\">" << Tick(fy) << "</text>\n";
  }
  os << "<text x=\"" << Num(kLeft + pw / 2) << "\" y=\"" << Num(kHeight - 12)
     << "\" text-anchor=\"middle\">" << Escape(chart.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << Num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(chart.y_label) << "</text>\n";

  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const Series& s = chart.series[si];
    os << "<polyline fill=\"none\" stroke=\"" << Escape(s.color) << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    const std::size_t m = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << Num(px(s.x[i])) << ',' << Num(py(s.y[i])) << (i + 1 < m ? " " : "");
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < std::min(m, s.y_err.size()); ++i) {
      os << "<line x1=\"" << Num(px(s.x[i])) << "\" y1=\"" << Num(py(s.y[i] - s.y_err[i]))
         << "\" x2=\"" << Num(px(s.x[i])) << "\" y2=\"" << Num(py(s.y[i] + s.y_err[i]))
         << "\" stroke=\"" << Escape(s.color) << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(si);
    os << "<line x1=\"" << Num(kLeft + pw + 12) << "\" y1=\"" << Num(ly - 4) << "\" x2=\""
       << Num(kLeft + pw + 32) << "\" y2=\"" << Num(ly - 4) << "\" stroke=\""
       << Escape(s.color) << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << Num(kLeft + pw + 36) << "\" y=\"" << Num(ly) << "\">"
       << Escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace llpbag
