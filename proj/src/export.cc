// Copyright 2026 The AM-MTEEG Authors
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

#include "ammteeg/export.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "ammteeg/errors.h"

namespace ammteeg {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 40.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};

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

void RequireMatrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ConfigError(std::string(what) + " must be [channels x length], got " +
                      ShapeToString(t.shape()));
  }
}

}  // namespace

void WriteWaveformCsv(std::ostream& out, const Tensor& waveform) {
  RequireMatrix(waveform, "waveform");
  out << "channel,timestep,value\n";
  for (std::size_t c = 0; c < waveform.dim(0); ++c) {
    for (std::size_t t = 0; t < waveform.dim(1); ++t) {
      out << fmt::format("{},{},{:.17g}\n", c, t, waveform.at(c, t));
    }
  }
}

void WriteErpCsv(std::ostream& out, const Erp& erp) {
  out << "class,channel,timestep,value\n";
  for (std::size_t k = 0; k < erp.means.size(); ++k) {
    const Tensor& m = erp.means[k];
    for (std::size_t c = 0; c < m.dim(0); ++c) {
      for (std::size_t t = 0; t < m.dim(1); ++t) {
        out << fmt::format("{},{},{},{:.17g}\n", k, c, t, m.at(c, t));
      }
    }
  }
}

std::vector<PlotSeries> ChannelSeries(const Tensor& waveform,
                                      const std::string& prefix) {
  RequireMatrix(waveform, "waveform");
  std::vector<PlotSeries> out;
  const std::size_t len = waveform.dim(1);
  for (std::size_t c = 0; c < waveform.dim(0); ++c) {
    PlotSeries s;
    s.name = prefix + std::to_string(c);
    s.values.assign(waveform.values().begin() + c * len,
                    waveform.values().begin() + (c + 1) * len);
    out.push_back(std::move(s));
  }
  return out;
}

void WriteLinePlotSvg(std::ostream& out, const std::string& title,
                      const std::vector<PlotSeries>& series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t longest = 0;
  for (const PlotSeries& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    longest = std::max(longest, s.values.size());
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  const double dx = longest > 1 ? plot_w / static_cast<double>(longest - 1) : 0;

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" "
      "width=\"{}\" height=\"{}\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\">"
      "{}</text>\n",
      kMargin, kMargin / 2 + 5, Escape(title));
  out << fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"#999\"/>\n",
      kMargin, kMargin, plot_w, plot_h);
  out << fmt::format(
      "<text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">"
      "{:.3g}</text>\n",
      kMargin + 4, hi);
  out << fmt::format(
      "<text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">"
      "{:.3g}</text>\n",
      kMargin + plot_h, lo);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    out << fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" "
        "points=\"",
        color);
    for (std::size_t t = 0; t < s.values.size(); ++t) {
      const double v = std::isfinite(s.values[t]) ? s.values[t] : lo;
      const double x = kMargin + dx * static_cast<double>(t);
      const double y = kMargin + plot_h * (hi - v) / (hi - lo);
      out << fmt::format("{}{:.2f},{:.2f}", t ? " " : "", x, y);
    }
    out << "\"/>\n";
    out << fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" "
        "fill=\"{}\">{}</text>\n",
        kWidth - kMargin + 4, kMargin + 12.0 * static_cast<double>(i + 1),
        color, Escape(s.name));
  }
  out << "</svg>\n";
}

double PearsonCorrelation(std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw ConfigError("correlation needs two non-empty series of equal length");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace ammteeg
